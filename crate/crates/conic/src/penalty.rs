//! Penalty reformulations without multiplier-existence assumptions:
//! quadratic penalty, smoothed nondifferentiable penalty, theorem-driven
//! parameter selection, and the adaptive scheme that doubles ρ until the
//! iterate is ε-feasible.

use ndarray::{Array1, ArrayView1};

use crate::auglag::InnerPath;
use crate::error::{Error, Result};
use crate::icfg::{icfg_run, FnOracle, IcfgOptions, ObjectiveProx, OracleEval, SetIndicatorProx, ThetaSchedule};
use crate::problem::{ConicProblem, Counters};
use crate::report::{OuterRecord, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    /// Differentiable quadratic penalty f + (ρ/2)dist².
    D,
    /// Smoothed nondifferentiable penalty f + ρ√(dist²+μ²).
    N,
}

#[derive(Debug, Clone)]
pub struct PenaltyConfig {
    pub kind: PenaltyKind,
    pub rho: f64,
    /// Smoothing parameter for the nondifferentiable variant.
    pub mu_smooth: Option<f64>,
    /// Known optimality gap Δ* = f* − f_* driving the iteration budget.
    pub delta_star: Option<f64>,
    /// Explicit iteration override (otherwise the theorem budget).
    pub iters: Option<usize>,
    pub path: InnerPath,
    pub f_star: Option<f64>,
}

impl PenaltyConfig {
    pub fn new(kind: PenaltyKind, rho: f64) -> Self {
        PenaltyConfig {
            kind,
            rho,
            mu_smooth: None,
            delta_star: None,
            iters: None,
            path: InnerPath::Auto,
            f_star: None,
        }
    }

    pub fn l_psi(&self, l_f: f64, norm_g: f64) -> f64 {
        l_f + self.rho * norm_g * norm_g
    }

    pub fn l_phi(&self, l_f: f64, norm_g: f64) -> Result<f64> {
        let mu = self
            .mu_smooth
            .ok_or_else(|| Error::Config("smoothed penalty requires mu_smooth".into()))?;
        if mu <= 0.0 {
            return Err(Error::parameter(format!("mu_smooth must be positive, got {mu}")));
        }
        Ok(l_f + self.rho * norm_g / mu)
    }
}

#[derive(Debug, Clone)]
pub struct PenaltyEval {
    pub value: f64,
    pub grad: Array1<f64>,
}

/// Quadratic penalty ψ_ρ(u) = f(u) + (ρ/2)dist_K(Gu+g)². One cone
/// projection, two matvecs.
pub fn quad_penalty_eval(
    problem: &ConicProblem,
    u: ArrayView1<f64>,
    rho: f64,
    c: &mut Counters,
) -> Result<PenaltyEval> {
    if rho <= 0.0 {
        return Err(Error::parameter(format!("rho must be positive, got {rho}")));
    }
    let r = problem.matvec(u, c) + &problem.g_vec;
    let proj = problem.project_cone(r.view(), c);
    let resid = &r - &proj;
    let dist_sq = resid.dot(&resid);
    let value = problem.f_value(u) + 0.5 * rho * dist_sq;
    let grad = problem.grad_f(u, c) + &(problem.matvec_t(resid.view(), c) * rho);
    Ok(PenaltyEval { value, grad })
}

/// Smoothed nondifferentiable penalty φ_{ρ,μ}(u) = f(u) + ρ√(dist²+μ²).
pub fn smooth_ndp_eval(
    problem: &ConicProblem,
    u: ArrayView1<f64>,
    rho: f64,
    mu: f64,
    c: &mut Counters,
) -> Result<PenaltyEval> {
    if rho <= 0.0 {
        return Err(Error::parameter(format!("rho must be positive, got {rho}")));
    }
    if mu <= 0.0 {
        return Err(Error::parameter(format!(
            "smoothing parameter must be positive, got {mu} (the mu = 0 limit is nonsmooth)"
        )));
    }
    let r = problem.matvec(u, c) + &problem.g_vec;
    let proj = problem.project_cone(r.view(), c);
    let resid = &r - &proj;
    let dist_sq = resid.dot(&resid);
    let root = (dist_sq + mu * mu).sqrt();
    let value = problem.f_value(u) + rho * root;
    let grad = problem.grad_f(u, c) + &(problem.matvec_t(resid.view(), c) * (rho / root));
    Ok(PenaltyEval { value, grad })
}

#[derive(Debug, Clone)]
pub struct PenaltyParams {
    pub rho: f64,
    pub mu_smooth: Option<f64>,
    /// Set when eps is too large for the differentiable variant's
    /// guarantee (eps ≥ Δ*/2); parameters are still returned.
    pub warn: bool,
}

/// ε-targeted penalty parameters: ρ = 4Δ*/ε² (differentiable, clamped to
/// at least 1) or ρ = 2Δ*/ε + 1 with μ = ε/2 (smoothed).
pub fn penalty_params(kind: PenaltyKind, eps: f64, delta_star: f64) -> Result<PenaltyParams> {
    if eps <= 0.0 {
        return Err(Error::parameter(format!("eps must be positive, got {eps}")));
    }
    if delta_star < 0.0 {
        return Err(Error::parameter(format!("delta_star must be nonnegative, got {delta_star}")));
    }
    Ok(match kind {
        PenaltyKind::D => PenaltyParams {
            rho: (4.0 * delta_star / (eps * eps)).max(1.0),
            mu_smooth: None,
            warn: eps >= delta_star / 2.0,
        },
        PenaltyKind::N => PenaltyParams {
            rho: 2.0 * delta_star / eps + 1.0,
            mu_smooth: Some(eps / 2.0),
            warn: false,
        },
    })
}

fn theorem_budget(
    kind: PenaltyKind,
    l_f: f64,
    d_u: f64,
    norm_g: f64,
    delta_star: f64,
    eps: f64,
) -> usize {
    let smooth_part = (2.0 * l_f * d_u * d_u / eps).sqrt();
    let raw = match kind {
        PenaltyKind::D => smooth_part + (8.0 * delta_star).sqrt() * norm_g * d_u / eps.powf(1.5),
        PenaltyKind::N => {
            smooth_part + (12.0 * delta_star * norm_g * d_u * d_u / eps.powi(3)).sqrt()
        }
    };
    (raw.ceil() as usize).max(1)
}

/// One penalty solve with the accelerated engine for the a-priori budget;
/// the last iterate is returned.
pub fn penalty_run(problem: &ConicProblem, config: &PenaltyConfig, eps: f64) -> Result<SolveReport> {
    if eps <= 0.0 {
        return Err(Error::parameter(format!("eps must be positive, got {eps}")));
    }
    if config.rho <= 0.0 {
        return Err(Error::parameter(format!("rho must be positive, got {}", config.rho)));
    }
    let start = std::time::Instant::now();
    let budget = match config.iters {
        Some(n) => n.max(1),
        None => {
            let delta_star = config.delta_star.ok_or_else(|| {
                Error::Config("penalty budget needs delta_star (or an explicit iteration count)".into())
            })?;
            if !problem.d_u().is_finite() {
                return Err(Error::capability("theorem budget needs a finite set diameter D_U"));
            }
            theorem_budget(
                config.kind,
                problem.objective.l_f(),
                problem.d_u(),
                problem.norm_g(),
                delta_star,
                eps,
            )
        }
    };

    let mut counters = Counters::default();
    let z0 = problem.set.center();
    let rho = config.rho;
    let norm_g = problem.norm_g();
    let l_f = problem.objective.l_f();

    let run = match config.kind {
        PenaltyKind::D => {
            let simple_ok = problem.objective.prox_available(&problem.set);
            let use_simple = match config.path {
                InnerPath::Simple if !simple_ok => {
                    return Err(Error::capability(
                        "objective has no closed-form prox over this set; use the smooth path",
                    ))
                }
                InnerPath::Simple => true,
                InnerPath::Smooth => false,
                InnerPath::Auto => simple_ok,
            };
            if use_simple {
                // split: smooth part (rho/2)dist^2, prox part f over U
                let mut oracle = FnOracle {
                    delta: 0.0,
                    l: rho * norm_g * norm_g,
                    f: |u: ArrayView1<f64>, c: &mut Counters| {
                        let r = problem.matvec(u, c) + &problem.g_vec;
                        let proj = problem.project_cone(r.view(), c);
                        let resid = &r - &proj;
                        let value = 0.5 * rho * resid.dot(&resid);
                        let grad = problem.matvec_t(resid.view(), c) * rho;
                        Ok(OracleEval { value, grad, primal: None })
                    },
                };
                let prox = ObjectiveProx { objective: &problem.objective, set: &problem.set };
                icfg_run(
                    &mut oracle,
                    &prox,
                    z0.view(),
                    IcfgOptions::new(ThetaSchedule::Accelerated, budget),
                    &mut counters,
                )?
            } else {
                let mut oracle = FnOracle {
                    delta: 0.0,
                    l: l_f + rho * norm_g * norm_g,
                    f: |u: ArrayView1<f64>, c: &mut Counters| {
                        let ev = quad_penalty_eval(problem, u, rho, c)?;
                        Ok(OracleEval { value: ev.value, grad: ev.grad, primal: None })
                    },
                };
                let prox = SetIndicatorProx { set: &problem.set };
                icfg_run(
                    &mut oracle,
                    &prox,
                    z0.view(),
                    IcfgOptions::new(ThetaSchedule::Accelerated, budget),
                    &mut counters,
                )?
            }
        }
        PenaltyKind::N => {
            let mu = config
                .mu_smooth
                .ok_or_else(|| Error::Config("smoothed penalty requires mu_smooth".into()))?;
            if mu <= 0.0 {
                return Err(Error::parameter(format!("mu_smooth must be positive, got {mu}")));
            }
            let mut oracle = FnOracle {
                delta: 0.0,
                l: l_f + rho * norm_g / mu,
                f: |u: ArrayView1<f64>, c: &mut Counters| {
                    let ev = smooth_ndp_eval(problem, u, rho, mu, c)?;
                    Ok(OracleEval { value: ev.value, grad: ev.grad, primal: None })
                },
            };
            let prox = SetIndicatorProx { set: &problem.set };
            icfg_run(
                &mut oracle,
                &prox,
                z0.view(),
                IcfgOptions::new(ThetaSchedule::Accelerated, budget),
                &mut counters,
            )?
        }
    };

    let u = run.last;
    let final_infeas = problem.infeasibility(u.view());
    let final_f_value = problem.f_value(u.view());
    let f_star = config.f_star;
    Ok(SolveReport {
        method: match config.kind {
            PenaltyKind::D => "qp".into(),
            PenaltyKind::N => "np".into(),
        },
        primal: u.to_vec(),
        outer_iters: budget,
        counters: counters.clone(),
        history: vec![OuterRecord {
            k: 1,
            infeas: final_infeas,
            f_value: final_f_value,
            subopt: f_star.map(|fs| final_f_value - fs),
            counters,
        }],
        final_infeas,
        final_f_value,
        final_subopt: f_star.map(|fs| final_f_value - fs),
        converged: true,
        rho_final: Some(config.rho),
        mu_final: config.mu_smooth,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Adaptive penalty: solve each stage to subproblem gap ≤ eps, double ρ
/// while the iterate is more than ε-infeasible.
pub fn a_pm_run(
    problem: &ConicProblem,
    rho0: f64,
    eps: f64,
    kind: PenaltyKind,
) -> Result<SolveReport> {
    a_pm_run_with(problem, rho0, eps, kind, None)
}

pub fn a_pm_run_with(
    problem: &ConicProblem,
    rho0: f64,
    eps: f64,
    kind: PenaltyKind,
    f_star: Option<f64>,
) -> Result<SolveReport> {
    if rho0 <= 0.0 || eps <= 0.0 {
        return Err(Error::parameter("rho0 and eps must be positive"));
    }
    if !problem.d_u().is_finite() {
        return Err(Error::capability("stage budget needs a finite set diameter D_U"));
    }
    const MAX_DOUBLINGS: usize = 60;
    let start = std::time::Instant::now();
    let l_f = problem.objective.l_f();
    let norm_g = problem.norm_g();
    let d_u = problem.d_u();
    let mut counters = Counters::default();
    let mut history = Vec::new();
    let mut rho = rho0;

    for k in 1..=MAX_DOUBLINGS {
        let l = match kind {
            PenaltyKind::D => l_f + rho * norm_g * norm_g,
            PenaltyKind::N => l_f + rho * norm_g / (eps / 2.0),
        };
        // accelerated exact-oracle budget for subproblem gap <= eps
        let stage_iters = ((d_u * (2.0 * l / eps).sqrt()).ceil() as usize).max(1);
        let mut config = PenaltyConfig::new(kind, rho);
        config.iters = Some(stage_iters);
        config.f_star = f_star;
        if kind == PenaltyKind::N {
            config.mu_smooth = Some(eps / 2.0);
        }
        let stage = penalty_run(problem, &config, eps)?;
        counters.proj_u += stage.counters.proj_u;
        counters.proj_k += stage.counters.proj_k;
        counters.proj_kstar += stage.counters.proj_kstar;
        counters.matvec_g += stage.counters.matvec_g;
        counters.matvec_gt += stage.counters.matvec_gt;
        counters.grad_f += stage.counters.grad_f;
        let u = Array1::from_vec(stage.primal);

        // counted feasibility check
        let r = problem.matvec(u.view(), &mut counters) + &problem.g_vec;
        let proj = problem.project_cone(r.view(), &mut counters);
        let dist = {
            let d = &r - &proj;
            d.dot(&d).sqrt()
        };
        let f_value = problem.f_value(u.view());
        history.push(OuterRecord {
            k,
            infeas: dist,
            f_value,
            subopt: f_star.map(|fs| f_value - fs),
            counters: counters.clone(),
        });
        if !dist.is_finite() {
            return Err(Error::numerical(format!("non-finite residual at stage {k}")));
        }
        if dist <= eps {
            return Ok(SolveReport {
                method: "apm".into(),
                primal: u.to_vec(),
                outer_iters: k,
                counters,
                history,
                final_infeas: dist,
                final_f_value: f_value,
                final_subopt: f_star.map(|fs| f_value - fs),
                converged: true,
                rho_final: Some(rho),
                mu_final: if kind == PenaltyKind::N { Some(eps / 2.0) } else { None },
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        rho *= 2.0;
    }
    Err(Error::NonConvergence(format!(
        "adaptive penalty did not reach infeasibility {eps} within {MAX_DOUBLINGS} doublings"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{norm2, Cone, SimpleSet};
    use crate::problem::Objective;
    use ndarray::{array, Array2};

    fn equality_qp() -> ConicProblem {
        // min 1/2||u||^2 s.t. u1+u2=1 over [-5,5]^2; f*=0.25, f_*=0
        ConicProblem::new(
            Objective::QuadDiag { q: array![1.0, 1.0], c: array![0.0, 0.0] },
            SimpleSet::Box { lower: vec![-5.0, -5.0], upper: vec![5.0, 5.0] },
            array![[1.0, 1.0]],
            array![-1.0],
            Cone::Zero { dim: 1 },
        )
        .unwrap()
    }

    // min u2 s.t. u1 = 0 over the power-cone epigraph |u2|^p <= u1
    fn power_instance(p: f64) -> ConicProblem {
        ConicProblem::new(
            Objective::Linear { c: array![0.0, 1.0] },
            SimpleSet::PPowerEpigraph { p },
            array![[1.0, 0.0]],
            array![0.0],
            Cone::Zero { dim: 1 },
        )
        .unwrap()
        .with_diameter(25.0)
    }

    #[test]
    fn quad_penalty_feasible_point() {
        let p = equality_qp();
        let mut c = Counters::default();
        let u = array![0.5, 0.5];
        let ev = quad_penalty_eval(&p, u.view(), 7.0, &mut c).unwrap();
        assert!((ev.value - 0.25).abs() < 1e-14);
        // penalty term contributes nothing; grad = grad f = u
        assert!(norm2(&(&ev.grad - &u)) < 1e-12);
    }

    #[test]
    fn quad_penalty_zero_cone_zero_objective() {
        let p = ConicProblem::new(
            Objective::Zero,
            SimpleSet::FullSpace { dim: 2 },
            array![[1.0, 2.0]],
            array![0.5],
            Cone::Zero { dim: 1 },
        )
        .unwrap();
        let mut c = Counters::default();
        let u = array![1.0, -0.25];
        let rho = 3.0;
        let ev = quad_penalty_eval(&p, u.view(), rho, &mut c).unwrap();
        let resid = 1.0 - 0.5 + 0.5; // u1 + 2 u2 + 0.5
        let expect = array![rho * resid, rho * 2.0 * resid];
        assert!(norm2(&(&ev.grad - &expect)) < 1e-12);
    }

    #[test]
    fn smooth_ndp_feasible_point() {
        let p = equality_qp();
        let mut c = Counters::default();
        let ev = smooth_ndp_eval(&p, array![0.5, 0.5].view(), 7.0, 0.1, &mut c).unwrap();
        assert!((ev.value - (0.25 + 7.0 * 0.1)).abs() < 1e-12);
        assert!(smooth_ndp_eval(&p, array![0.5, 0.5].view(), 7.0, 0.0, &mut c).is_err());
    }

    #[test]
    fn smooth_ndp_large_dist_expansion() {
        let p = equality_qp();
        let mut c = Counters::default();
        let u = array![4.0, 4.0]; // dist = 7
        let rho = 2.0;
        let mu = 1e-3;
        let ev = smooth_ndp_eval(&p, u.view(), rho, mu, &mut c).unwrap();
        let dist = 7.0;
        let plain = p.f_value(u.view()) + rho * dist;
        assert!((ev.value - plain).abs() <= rho * mu * mu / (2.0 * dist) + 1e-12);
    }

    #[test]
    fn penalty_grads_match_finite_difference() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for trial in 0..100 {
            let g_mat = Array2::from_shape_fn((3, 2), |_| rng.gen_range(-1.0..1.0));
            let p = ConicProblem::new(
                Objective::QuadDiag {
                    q: array![rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)],
                    c: array![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                },
                SimpleSet::FullSpace { dim: 2 },
                g_mat,
                array![
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0)
                ],
                Cone::Product {
                    parts: vec![Cone::NonnegOrthant { dim: 1 }, Cone::SecondOrder { dim: 2 }],
                },
            )
            .unwrap();
            let u = array![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let rho = rng.gen_range(0.5..4.0);
            let mu = rng.gen_range(0.05..0.5);
            let mut c = Counters::default();
            let evq = quad_penalty_eval(&p, u.view(), rho, &mut c).unwrap();
            let evn = smooth_ndp_eval(&p, u.view(), rho, mu, &mut c).unwrap();
            let h = 1e-6;
            for i in 0..2 {
                let mut up = u.clone();
                let mut um = u.clone();
                up[i] += h;
                um[i] -= h;
                let q_fd = (quad_penalty_eval(&p, up.view(), rho, &mut c).unwrap().value
                    - quad_penalty_eval(&p, um.view(), rho, &mut c).unwrap().value)
                    / (2.0 * h);
                let n_fd = (smooth_ndp_eval(&p, up.view(), rho, mu, &mut c).unwrap().value
                    - smooth_ndp_eval(&p, um.view(), rho, mu, &mut c).unwrap().value)
                    / (2.0 * h);
                assert!((q_fd - evq.grad[i]).abs() < 1e-5, "trial {trial} quad coord {i}");
                assert!((n_fd - evn.grad[i]).abs() < 1e-5, "trial {trial} smooth coord {i}");
            }
        }
    }

    #[test]
    fn smoothing_sandwich() {
        let p = equality_qp();
        let mut c = Counters::default();
        for &(u1, u2) in &[(0.0, 0.0), (2.0, -1.0), (4.0, 4.0)] {
            let u = array![u1, u2];
            let rho = 3.0;
            let mu = 0.2;
            let dist = p.infeasibility(u.view());
            let exact = p.f_value(u.view()) + rho * dist;
            let smoothed = smooth_ndp_eval(&p, u.view(), rho, mu, &mut c).unwrap().value;
            assert!(smoothed >= exact - 1e-12);
            assert!(smoothed <= exact + rho * mu + 1e-12);
        }
    }

    #[test]
    fn penalty_params_examples() {
        let d = penalty_params(PenaltyKind::D, 0.1, 1.0).unwrap();
        assert!((d.rho - 400.0).abs() < 1e-12);
        assert!(!d.warn);
        let n = penalty_params(PenaltyKind::N, 0.1, 1.0).unwrap();
        assert!((n.rho - 21.0).abs() < 1e-12);
        assert!((n.mu_smooth.unwrap() - 0.05).abs() < 1e-15);
        // degenerate: already optimal at the unconstrained minimum
        let d0 = penalty_params(PenaltyKind::D, 0.1, 0.0).unwrap();
        assert_eq!(d0.rho, 1.0);
        // warn when eps is too large for the guarantee
        assert!(penalty_params(PenaltyKind::D, 0.6, 1.0).unwrap().warn);
    }

    #[test]
    fn power_instance_closed_form() {
        // quadratic penalty minimizer: u2 = -(1/(p rho))^{1/(2p-1)}
        let p = 2.0;
        let rho = 4.0;
        let prob = power_instance(p);
        let mut config = PenaltyConfig::new(PenaltyKind::D, rho);
        config.iters = Some(30_000);
        let report = penalty_run(&prob, &config, 1e-3).unwrap();
        let u2_expect = -(1.0 / (p * rho)).powf(1.0 / (2.0 * p - 1.0));
        assert!((u2_expect + 0.5).abs() < 1e-15); // -(1/8)^{1/3} = -0.5
        assert!((report.primal[1] - u2_expect).abs() < 1e-4, "u2 = {}", report.primal[1]);
        assert!((report.primal[0] - 0.25).abs() < 1e-4, "u1 = {}", report.primal[0]);
    }

    #[test]
    fn power_instance_dist_monotone_in_rho() {
        let prob = power_instance(3.0);
        let mut last = f64::INFINITY;
        for rho in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let mut config = PenaltyConfig::new(PenaltyKind::D, rho);
            config.iters = Some(20_000);
            let report = penalty_run(&prob, &config, 1e-3).unwrap();
            assert!(report.final_infeas <= last + 1e-6);
            last = report.final_infeas;
        }
    }

    #[test]
    fn equality_qp_one_sided_pass_kind_d() {
        use crate::problem::{check_eps_optimal, KnownSolution, OptCheckMode};
        let p = equality_qp();
        let eps = 0.1;
        let delta_star = 0.25;
        let params = penalty_params(PenaltyKind::D, eps, delta_star).unwrap();
        let mut config = PenaltyConfig::new(PenaltyKind::D, params.rho);
        config.delta_star = Some(delta_star);
        let report = penalty_run(&p, &config, eps).unwrap();
        let known = KnownSolution {
            f_star: 0.25,
            x_star: Some(vec![-0.5]),
            r_d: Some(0.5),
            f_lower: Some(0.0),
        };
        let u = Array1::from_vec(report.primal);
        let chk = check_eps_optimal(&p, &known, u.view(), eps, OptCheckMode::OneSided).unwrap();
        assert!(chk.pass, "gap {}, infeas {}", chk.subopt_gap, chk.infeas);
    }

    #[test]
    fn equality_qp_one_sided_pass_kind_n() {
        use crate::problem::{check_eps_optimal, KnownSolution, OptCheckMode};
        let p = equality_qp();
        let eps = 0.1;
        let delta_star = 0.25;
        let params = penalty_params(PenaltyKind::N, eps, delta_star).unwrap();
        let mut config = PenaltyConfig::new(PenaltyKind::N, params.rho);
        config.mu_smooth = params.mu_smooth;
        config.delta_star = Some(delta_star);
        let report = penalty_run(&p, &config, eps).unwrap();
        let known = KnownSolution {
            f_star: 0.25,
            x_star: Some(vec![-0.5]),
            r_d: Some(0.5),
            f_lower: Some(0.0),
        };
        let u = Array1::from_vec(report.primal);
        let chk = check_eps_optimal(&p, &known, u.view(), eps, OptCheckMode::OneSided).unwrap();
        assert!(chk.pass, "gap {}, infeas {}", chk.subopt_gap, chk.infeas);
    }

    #[test]
    fn a_pm_single_stage_when_rho_large() {
        let p = equality_qp();
        let eps = 0.1;
        let rho0 = 4.0 * 0.25 / (eps * eps); // threshold already met
        let report = a_pm_run(&p, rho0, eps, PenaltyKind::D).unwrap();
        assert_eq!(report.outer_iters, 1);
        assert!(report.final_infeas <= eps);
    }

    #[test]
    fn a_pm_power_instance_feasibility() {
        let prob = power_instance(2.0);
        let eps = 0.05;
        let report = a_pm_run(&prob, 1.0, eps, PenaltyKind::D).unwrap();
        // infeasibility is |u1| for this instance
        assert!(report.primal[0].abs() <= eps + 1e-9);
        let doublings = (report.rho_final.unwrap() / 1.0).log2().round() as usize;
        assert_eq!(report.outer_iters, doublings + 1);
    }
}
