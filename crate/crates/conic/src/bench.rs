//! Benchmark harness: instance generators with analytically known
//! solutions, ε-sweep execution with projection-count accounting, scaling
//! slope estimation, and CSV emission.

use std::io::Write as _;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::auglag::{
    a_ial_run_with, ial_run, optimal_params_auglag, AugLagConfig, InnerPath, ParamVariant,
};
use crate::cones::{Cone, SimpleSet};
use crate::error::{Error, Result};
use crate::icfg::ThetaSchedule;
use crate::nsmooth::{ns_outer_count, ns_params, ns_run, NsConfig};
use crate::penalty::{a_pm_run_with, penalty_params, penalty_run, PenaltyConfig, PenaltyKind};
use crate::problem::{ConicProblem, KnownSolution, Objective};
use crate::report::SolveReport;

/// One ε-sweep data point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub method: String,
    pub eps: f64,
    pub proj_u: u64,
    pub proj_k: u64,
    pub proj_kstar: u64,
    pub matvec: u64,
    pub outer_iters: u64,
    pub subopt_gap: f64,
    pub infeas: f64,
    pub wall_ms: f64,
}

impl SweepRecord {
    pub fn count(&self, field: SlopeField) -> u64 {
        match field {
            SlopeField::ProjU => self.proj_u,
            SlopeField::ProjK => self.proj_k,
            SlopeField::ProjKstar => self.proj_kstar,
            SlopeField::Total => self.proj_u + self.proj_k + self.proj_kstar,
        }
    }

    fn from_report(report: &SolveReport, eps: f64, f_star: f64) -> SweepRecord {
        SweepRecord {
            method: report.method.clone(),
            eps,
            proj_u: report.counters.proj_u,
            proj_k: report.counters.proj_k,
            proj_kstar: report.counters.proj_kstar,
            matvec: report.counters.matvec_total(),
            outer_iters: report.outer_iters as u64,
            subopt_gap: report.final_f_value - f_star,
            infeas: report.final_infeas,
            wall_ms: report.wall_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeField {
    ProjU,
    ProjK,
    ProjKstar,
    Total,
}

impl FromStr for SlopeField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proj_U" => Ok(SlopeField::ProjU),
            "proj_K" => Ok(SlopeField::ProjK),
            "proj_Kstar" => Ok(SlopeField::ProjKstar),
            "total" => Ok(SlopeField::Total),
            other => Err(Error::parameter(format!(
                "unknown count field `{other}` (expected proj_U, proj_K, proj_Kstar, or total)"
            ))),
        }
    }
}

// Minimum of a separable diagonal quadratic (or linear) objective over a box.
fn box_objective_min(objective: &Objective, lower: &[f64], upper: &[f64]) -> f64 {
    let eval_coord = |q: f64, c: f64, lo: f64, hi: f64| -> f64 {
        let cand = if q > 0.0 { (-c / q).clamp(lo, hi) } else if c >= 0.0 { lo } else { hi };
        0.5 * q * cand * cand + c * cand
    };
    match objective {
        Objective::Zero => 0.0,
        Objective::Linear { c } => c
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(&ci, (&lo, &hi))| eval_coord(0.0, ci, lo, hi))
            .sum(),
        Objective::QuadDiag { q, c } => q
            .iter()
            .zip(c)
            .zip(lower.iter().zip(upper))
            .map(|((&qi, &ci), (&lo, &hi))| eval_coord(qi, ci, lo, hi))
            .sum(),
    }
}

/// Equality-constrained diagonal QP, built backward from a chosen
/// primal-dual pair so the KKT system holds exactly. Box margin 1 around
/// the optimizer keeps it strictly interior.
pub fn gen_equality_qp(n: usize, seed: u64) -> Result<(ConicProblem, KnownSolution)> {
    if n < 2 {
        return Err(Error::parameter(format!("equality_qp needs n >= 2, got {n}")));
    }
    let m = if n >= 4 { 2 } else { 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a_mat = Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0));
    let c_lin = Array1::from_shape_fn(n, |_| rng.gen_range(-0.5..0.5));
    let x_star = Array1::from_shape_fn(m, |_| {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        sign * rng.gen_range(0.5..1.5)
    });
    // stationarity: u* + c + Aᵀx* = 0
    let u_star = -(a_mat.t().dot(&x_star)) - &c_lin;
    let g_vec = -a_mat.dot(&u_star); // residual Au - b must vanish
    let lower: Vec<f64> = u_star.iter().map(|v| v - 1.0).collect();
    let upper: Vec<f64> = u_star.iter().map(|v| v + 1.0).collect();
    let q = Array1::ones(n);
    let objective = Objective::QuadDiag { q, c: c_lin };
    let f_star = objective.value(u_star.view());
    let f_lower = box_objective_min(&objective, &lower, &upper);
    let r_d = x_star.dot(&x_star).sqrt();
    let problem = ConicProblem::new(
        objective,
        SimpleSet::Box { lower, upper },
        a_mat,
        g_vec,
        Cone::Zero { dim: m },
    )?;
    Ok((
        problem,
        KnownSolution {
            f_star,
            x_star: Some(x_star.to_vec()),
            r_d: Some(r_d),
            f_lower: Some(f_lower),
        },
    ))
}

/// Linear objective over a box with orthant constraints Gu+g ≥ 0, built
/// backward with strict complementarity.
pub fn gen_orthant_lp(n: usize, m: usize, seed: u64) -> Result<(ConicProblem, KnownSolution)> {
    if n < 1 || m < 1 {
        return Err(Error::parameter(format!("orthant_lp needs n, m >= 1, got n={n}, m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g_mat = Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0));
    let u_star = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
    let active = (m + 1) / 2;
    // multipliers in the polar cone (nonpositive), slack only where inactive
    let mut x_star = Array1::zeros(m);
    let mut slack = Array1::zeros(m);
    for i in 0..m {
        if i < active {
            x_star[i] = -rng.gen_range(0.5..1.5);
        } else {
            slack[i] = rng.gen_range(0.5..1.5);
        }
    }
    let c_lin = -(g_mat.t().dot(&x_star)); // interior stationarity
    let g_vec = &slack - &g_mat.dot(&u_star);
    let lower: Vec<f64> = u_star.iter().map(|v| v - 1.0).collect();
    let upper: Vec<f64> = u_star.iter().map(|v| v + 1.0).collect();
    let objective = Objective::Linear { c: c_lin };
    let f_star = objective.value(u_star.view());
    let f_lower = box_objective_min(&objective, &lower, &upper);
    let r_d = x_star.dot(&x_star).sqrt();
    let problem = ConicProblem::new(
        objective,
        SimpleSet::Box { lower, upper },
        g_mat,
        g_vec,
        Cone::NonnegOrthant { dim: m },
    )?;
    Ok((
        problem,
        KnownSolution {
            f_star,
            x_star: Some(x_star.to_vec()),
            r_d: Some(r_d),
            f_lower: Some(f_lower),
        },
    ))
}

/// Feasibility instance (zero objective) with a second-order-cone
/// constraint; the generated point is strictly feasible so the zero
/// multiplier certifies optimality.
pub fn gen_soc_feasibility(n: usize, seed: u64) -> Result<(ConicProblem, KnownSolution)> {
    if n < 1 {
        return Err(Error::parameter(format!("soc_feasibility needs n >= 1, got {n}")));
    }
    let m = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g_mat = Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0));
    let u_star = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
    // strictly interior SOC point (scalar coordinate last, t > ||v||)
    let mut slack = Array1::zeros(m);
    for i in 0..m - 1 {
        slack[i] = rng.gen_range(-0.5..0.5);
    }
    slack[m - 1] = 2.0;
    let g_vec = &slack - &g_mat.dot(&u_star);
    let lower: Vec<f64> = u_star.iter().map(|v| v - 1.0).collect();
    let upper: Vec<f64> = u_star.iter().map(|v| v + 1.0).collect();
    let problem = ConicProblem::new(
        Objective::Zero,
        SimpleSet::Box { lower, upper },
        g_mat,
        g_vec,
        Cone::SecondOrder { dim: m },
    )?;
    Ok((
        problem,
        KnownSolution {
            f_star: 0.0,
            x_star: Some(vec![0.0; m]),
            // ||x*|| = 0; record a conservative multiplier-radius bound
            r_d: Some(1.0),
            f_lower: Some(0.0),
        },
    ))
}

/// min u₂ over the p-power epigraph with the degenerate constraint u₁ = 0:
/// the feasible set is the single point (0,0) and no bounded multiplier
/// exists. The unbounded set gets a diameter override from the box
/// [0,B]×[−B,B] used to define the finite lower bound f_* = −B^{1/p}.
pub fn gen_example42(p: f64) -> Result<(ConicProblem, KnownSolution)> {
    if p < 2.0 {
        return Err(Error::parameter(format!("example42 needs p >= 2, got {p}")));
    }
    let b = 10.0f64;
    let reach = b.powf(1.0 / p);
    let diameter = (b * b + 4.0 * reach * reach).sqrt();
    let problem = ConicProblem::new(
        Objective::Linear { c: ndarray::array![0.0, 1.0] },
        SimpleSet::PPowerEpigraph { p },
        ndarray::array![[1.0, 0.0]],
        ndarray::array![0.0],
        Cone::Zero { dim: 1 },
    )?
    .with_diameter(diameter);
    Ok((
        problem,
        KnownSolution { f_star: 0.0, x_star: None, r_d: None, f_lower: Some(-reach) },
    ))
}

/// Generator dispatch used by the CLI.
pub fn make_instance(
    id: &str,
    n: usize,
    p: f64,
    seed: u64,
) -> Result<(ConicProblem, KnownSolution)> {
    match id {
        "equality_qp" => gen_equality_qp(n, seed),
        "orthant_lp" => gen_orthant_lp(n, (n / 2).max(1), seed),
        "soc_feasibility" => gen_soc_feasibility(n, seed),
        "example42" => gen_example42(p),
        other => Err(Error::parameter(format!("unknown instance generator `{other}`"))),
    }
}

fn need_rd(known: &KnownSolution) -> Result<f64> {
    known
        .r_d
        .ok_or_else(|| Error::parameter("method requires a known multiplier radius R_d"))
}

fn need_delta_star(known: &KnownSolution) -> Result<f64> {
    known
        .delta_star()
        .ok_or_else(|| Error::parameter("method requires a known objective spread Delta*"))
}

/// One solver invocation at accuracy eps with method-specific parameter
/// derivation. The Lagrangian sweeps deliberately run at an 8×
/// sub-optimal smoothing so the outer loop stays active while total inner
/// projections keep the theorem's 1/ε scaling.
pub fn run_method_at_eps(
    problem: &ConicProblem,
    known: &KnownSolution,
    method: &str,
    eps: f64,
) -> Result<SolveReport> {
    if eps <= 0.0 {
        return Err(Error::parameter(format!("eps must be positive, got {eps}")));
    }
    let l_f = problem.objective.l_f();
    let norm_g = problem.norm_g();
    match method {
        "ial" | "fial" => {
            let r_d = need_rd(known)?;
            let variant = if method == "ial" { ParamVariant::Gradient } else { ParamVariant::Fast };
            let (mu_opt, _) = optimal_params_auglag(variant, eps, r_d, l_f, norm_g)?;
            let mu = mu_opt / 8.0;
            let l_d = 1.0 / mu;
            let (schedule, outer, delta) = match variant {
                ParamVariant::Gradient => {
                    // each trajectory-bound term driven below eps/2
                    let k = ((8.0 * l_d * r_d / eps).ceil() as usize).max(1);
                    let delta = (eps / 6.0).min(k as f64 * eps * eps / (48.0 * l_d));
                    (ThetaSchedule::Constant, k, delta)
                }
                ParamVariant::Fast => {
                    let k = ((32.0 * l_d * r_d / eps).sqrt().ceil() as usize).max(1);
                    let delta =
                        (eps / (6.0 * k as f64)).min(k as f64 * eps * eps / (768.0 * l_d));
                    (ThetaSchedule::Accelerated, k, delta)
                }
            };
            let mut config = AugLagConfig::new(mu, delta, outer, schedule);
            config.f_star = Some(known.f_star);
            ial_run(problem, &config)
        }
        "aial" => a_ial_run_with(problem, 1.0, eps, InnerPath::Auto, Some(known.f_star)),
        "ns" => {
            let r_d = need_rd(known)?;
            let k_outer = ns_outer_count(eps, norm_g, problem.d_u(), r_d)?;
            let (mu, delta) = ns_params(k_outer, norm_g, r_d, problem.d_u(), eps)?;
            let mut config = NsConfig::new(mu, delta, k_outer);
            config.path = if l_f > 0.0 { InnerPath::Smooth } else { InnerPath::Auto };
            config.f_star = Some(known.f_star);
            ns_run(problem, &config)
        }
        "qp" | "np" => {
            let delta_star = need_delta_star(known)?;
            let kind = if method == "qp" { PenaltyKind::D } else { PenaltyKind::N };
            let params = penalty_params(kind, eps, delta_star)?;
            let mut config = PenaltyConfig::new(kind, params.rho);
            config.mu_smooth = params.mu_smooth;
            config.delta_star = Some(delta_star);
            config.f_star = Some(known.f_star);
            penalty_run(problem, &config, eps)
        }
        "apm" => a_pm_run_with(problem, 1.0, eps, PenaltyKind::D, Some(known.f_star)),
        other => Err(Error::parameter(format!("unknown method `{other}`"))),
    }
}

/// ε sweep: one record per accuracy level, counters reset per point.
pub fn sweep_run(
    problem: &ConicProblem,
    known: &KnownSolution,
    method: &str,
    eps_list: &[f64],
) -> Result<Vec<SweepRecord>> {
    if eps_list.is_empty() {
        return Err(Error::parameter("eps list must be nonempty"));
    }
    for w in eps_list.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::parameter("eps list must be strictly decreasing"));
        }
    }
    let mut records = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let report = run_method_at_eps(problem, known, method, eps)
            .map_err(|e| Error::parameter(format!("sweep point eps={eps} failed: {e}")))?;
        records.push(SweepRecord::from_report(&report, eps, known.f_star));
    }
    Ok(records)
}

/// Least-squares slope of log(count) against log(1/eps).
pub fn fit_slope(records: &[SweepRecord], field: SlopeField) -> Result<f64> {
    if records.len() < 3 {
        return Err(Error::parameter(format!(
            "slope fit needs at least 3 records, got {}",
            records.len()
        )));
    }
    let mut xs = Vec::with_capacity(records.len());
    let mut ys = Vec::with_capacity(records.len());
    for r in records {
        let count = r.count(field);
        if count == 0 {
            return Err(Error::parameter("slope fit requires all counts to be positive"));
        }
        if r.eps <= 0.0 {
            return Err(Error::parameter("slope fit requires positive eps values"));
        }
        xs.push((1.0 / r.eps).ln());
        ys.push((count as f64).ln());
    }
    let n = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    if sxx <= 0.0 {
        return Err(Error::parameter("slope fit is degenerate: all eps values coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    Ok(sxy / sxx)
}

pub const CSV_HEADER: &str =
    "method,eps,proj_U,proj_K,proj_Kstar,matvec,outer_iters,subopt_gap,infeas,wall_ms";

/// Write records as CSV (header always present, 17 significant digits on
/// floats so the round trip is exact).
pub fn emit_csv(records: &[SweepRecord], path: &str) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_string(), source };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    let write = |out: &mut dyn std::io::Write, s: String| {
        out.write_all(s.as_bytes()).map_err(|source| Error::Io { path: path.to_string(), source })
    };
    write(&mut out, format!("{CSV_HEADER}\n"))?;
    for r in records {
        write(
            &mut out,
            format!(
                "{},{:.16e},{},{},{},{},{},{:.16e},{:.16e},{:.16e}\n",
                r.method,
                r.eps,
                r.proj_u,
                r.proj_k,
                r.proj_kstar,
                r.matvec,
                r.outer_iters,
                r.subopt_gap,
                r.infeas,
                r.wall_ms
            ),
        )?;
    }
    out.flush().map_err(|source| Error::Io { path: path.to_string(), source })
}

pub fn read_csv(path: &str) -> Result<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_string(), source })?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        Some(h) => return Err(Error::Parse(format!("unexpected CSV header: `{h}`"))),
        None => return Err(Error::Parse("empty CSV file".into())),
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Parse(format!(
                "CSV row {} has {} fields, expected 10",
                idx + 2,
                fields.len()
            )));
        }
        let f = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse(format!("bad float `{s}` in CSV row {}", idx + 2)))
        };
        let u = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse(format!("bad count `{s}` in CSV row {}", idx + 2)))
        };
        records.push(SweepRecord {
            method: fields[0].to_string(),
            eps: f(fields[1])?,
            proj_u: u(fields[2])?,
            proj_k: u(fields[3])?,
            proj_kstar: u(fields[4])?,
            matvec: u(fields[5])?,
            outer_iters: u(fields[6])?,
            subopt_gap: f(fields[7])?,
            infeas: f(fields[8])?,
            wall_ms: f(fields[9])?,
        });
    }
    Ok(records)
}
