//! Augmented Lagrangian smoothing of the dual: inner ICFG solves to a
//! prescribed accuracy, the resulting inexact dual oracle, inexact
//! (fast) augmented Lagrangian outer loops with primal averaging, and the
//! adaptive variant that doubles the smoothing parameter.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::icfg::{
    icfg_run, DeltaLOracle, IcfgOptions, IdentityProx, ObjectiveProx, OracleEval,
    SetIndicatorProx, ThetaSchedule,
};
use crate::problem::{ConicProblem, Counters};
use crate::report::{OuterRecord, SolveReport};

/// Which inner composite split to use for the subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerPath {
    /// Pick Simple when the objective has a closed-form prox, else Smooth.
    Auto,
    /// φ = penalty part only, ψ = f + indicator of U (prox step).
    Simple,
    /// φ = full smooth objective (needs L_f), ψ = indicator of U.
    Smooth,
}

impl InnerPath {
    pub(crate) fn resolve(self, problem: &ConicProblem) -> Result<ResolvedPath> {
        let simple_ok = problem.objective.prox_available(&problem.set);
        match self {
            InnerPath::Simple if !simple_ok => Err(Error::capability(
                "objective has no closed-form prox over this set; use the smooth path",
            )),
            InnerPath::Simple => Ok(ResolvedPath::Simple),
            InnerPath::Smooth => Ok(ResolvedPath::Smooth),
            InnerPath::Auto => Ok(if simple_ok { ResolvedPath::Simple } else { ResolvedPath::Smooth }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ResolvedPath {
    Simple,
    Smooth,
}

pub struct AugLagConfig {
    pub mu: f64,
    pub delta: f64,
    /// Initial multiplier; defaults to the origin.
    pub x0: Option<Array1<f64>>,
    pub outer_budget: usize,
    pub schedule: ThetaSchedule,
    pub path: InnerPath,
    /// Optimal value, when known, for suboptimality tracking in reports.
    pub f_star: Option<f64>,
}

impl AugLagConfig {
    pub fn new(mu: f64, delta: f64, outer_budget: usize, schedule: ThetaSchedule) -> Self {
        AugLagConfig {
            mu,
            delta,
            x0: None,
            outer_budget,
            schedule,
            path: InnerPath::Auto,
            f_star: None,
        }
    }

    /// Dual smoothness constant `L_d = 1/μ`.
    pub fn l_d(&self) -> f64 {
        1.0 / self.mu
    }
}

#[derive(Debug, Clone)]
pub struct AugLagEval {
    pub value: f64,
    pub grad_x: Array1<f64>,
}

/// Value and x-gradient of the augmented Lagrangian at (u, x). Costs one
/// matvec and one K-projection.
pub fn auglag_eval(
    problem: &ConicProblem,
    u: ArrayView1<f64>,
    x: ArrayView1<f64>,
    mu: f64,
    c: &mut Counters,
) -> Result<AugLagEval> {
    if mu <= 0.0 {
        return Err(Error::parameter(format!("mu must be positive, got {mu}")));
    }
    if x.len() != problem.m() {
        return Err(Error::DimensionMismatch { expected: problem.m(), got: x.len() });
    }
    let r = problem.matvec(u, c) + &problem.g_vec;
    let shifted = &r + &(&x.to_owned() / mu);
    let proj = problem.project_cone(shifted.view(), c);
    let resid = &shifted - &proj;
    let dist_sq = resid.dot(&resid);
    let value = problem.f_value(u) + 0.5 * mu * dist_sq - x.dot(&x) / (2.0 * mu);
    let grad_x = &r - &proj;
    Ok(AugLagEval { value, grad_x })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerMode {
    /// Objective handled through its prox; `L_f = 0` by convention.
    SimpleF,
    /// Objective folded into the smooth part.
    SmoothF,
}

/// A-priori inner iteration count guaranteeing inner gap ≤ δ:
/// ⌈D_U √(2(L_f + μ‖G‖²)/δ)⌉.
pub fn inner_budget(
    mode: InnerMode,
    norm_g: f64,
    d_u: f64,
    mu: f64,
    l_f: f64,
    delta: f64,
) -> Result<usize> {
    if delta <= 0.0 {
        return Err(Error::parameter(format!("inner accuracy delta must be positive, got {delta}")));
    }
    if !d_u.is_finite() {
        return Err(Error::capability("inner budget needs a finite set diameter D_U"));
    }
    let l_f = match mode {
        InnerMode::SimpleF => 0.0,
        InnerMode::SmoothF => l_f,
    };
    let val = d_u * (2.0 * (l_f + mu * norm_g * norm_g) / delta).sqrt();
    Ok((val.ceil() as usize).max(1))
}

/// Runs the inner ICFG for the a-priori budget, returning a point whose
/// augmented Lagrangian gap at x is at most δ.
pub fn inner_solve(
    problem: &ConicProblem,
    x: ArrayView1<f64>,
    mu: f64,
    delta: f64,
    path: InnerPath,
    c: &mut Counters,
) -> Result<Array1<f64>> {
    let resolved = path.resolve(problem)?;
    let norm_g = problem.norm_g();
    let l_f = problem.objective.l_f();
    let (mode, l) = match resolved {
        ResolvedPath::Simple => (InnerMode::SimpleF, mu * norm_g * norm_g),
        ResolvedPath::Smooth => (InnerMode::SmoothF, l_f + mu * norm_g * norm_g),
    };
    let budget = inner_budget(mode, norm_g, problem.d_u(), mu, l_f, delta)?;
    let z0 = problem.set.center();
    let x_owned = x.to_owned();

    // smooth part gradient: μ G^T (w - [w]_K) with w = Gu + g + x/μ,
    // plus ∇f(u) on the smooth path.
    let include_f = resolved == ResolvedPath::Smooth;
    let problem_ref = problem;
    let mut oracle = crate::icfg::FnOracle {
        delta: 0.0,
        l,
        f: move |u: ArrayView1<f64>, c: &mut Counters| {
            let w = problem_ref.matvec(u, c) + &problem_ref.g_vec + &(&x_owned / mu);
            let proj = problem_ref.project_cone(w.view(), c);
            let resid = &w - &proj;
            let dist_sq = resid.dot(&resid);
            let mut grad = problem_ref.matvec_t(resid.view(), c) * mu;
            let mut value = 0.5 * mu * dist_sq;
            if include_f {
                grad += &problem_ref.grad_f(u, c);
                value += problem_ref.f_value(u);
            }
            Ok(OracleEval { value, grad, primal: None })
        },
    };

    let opts = IcfgOptions::new(ThetaSchedule::Accelerated, budget);
    let run = match resolved {
        ResolvedPath::Simple => {
            let prox = ObjectiveProx { objective: &problem.objective, set: &problem.set };
            icfg_run(&mut oracle, &prox, z0.view(), opts, c)?
        }
        ResolvedPath::Smooth => {
            let prox = SetIndicatorProx { set: &problem.set };
            icfg_run(&mut oracle, &prox, z0.view(), opts, c)?
        }
    };
    Ok(run.last)
}

/// Inexact dual oracle built from δ-accurate inner solves: a
/// (3δ, 2L_d)-oracle for the negated augmented dual.
pub struct AugLagDualOracle<'a> {
    pub problem: &'a ConicProblem,
    pub mu: f64,
    pub delta: f64,
    pub path: InnerPath,
}

impl DeltaLOracle for AugLagDualOracle<'_> {
    fn delta(&self) -> f64 {
        3.0 * self.delta
    }

    fn lipschitz(&self) -> f64 {
        2.0 / self.mu
    }

    fn eval(&mut self, x: ArrayView1<f64>, c: &mut Counters) -> Result<OracleEval> {
        let u = inner_solve(self.problem, x, self.mu, self.delta, self.path, c)?;
        let ev = auglag_eval(self.problem, u.view(), x, self.mu, c)?;
        // dual maximization negated into the minimization engine
        Ok(OracleEval { value: -ev.value, grad: -ev.grad_x, primal: Some(u) })
    }
}

pub fn dual_oracle_auglag<'a>(
    problem: &'a ConicProblem,
    mu: f64,
    delta: f64,
    path: InnerPath,
) -> Result<AugLagDualOracle<'a>> {
    if mu <= 0.0 {
        return Err(Error::parameter(format!("mu must be positive, got {mu}")));
    }
    Ok(AugLagDualOracle { problem, mu, delta, path })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamVariant {
    Gradient,
    Fast,
}

/// ε-targeted smoothing/accuracy pair (μ, δ).
pub fn optimal_params_auglag(
    variant: ParamVariant,
    eps: f64,
    r_d: f64,
    l_f: f64,
    norm_g: f64,
) -> Result<(f64, f64)> {
    if eps <= 0.0 || r_d <= 0.0 {
        return Err(Error::parameter(format!(
            "eps and R_d must be positive, got eps={eps}, R_d={r_d}"
        )));
    }
    if norm_g == 0.0 && l_f > 0.0 {
        return Err(Error::parameter("norm_G = 0 with L_f > 0 leaves mu unconstrained"));
    }
    let base = 16.0 * r_d * r_d / eps;
    Ok(match variant {
        ParamVariant::Gradient => {
            let mu = if l_f > 0.0 { base.max(l_f / (norm_g * norm_g)) } else { base };
            (mu, eps / 3.0)
        }
        ParamVariant::Fast => (base, eps / 24.0),
    })
}

/// θ-weighted running average of primal inner solutions (Eq.-style
/// weights: the j-th oracle evaluation carries weight θ_j, θ_1 = 1).
#[derive(Debug, Clone)]
pub struct PrimalAverage {
    sum: Array1<f64>,
    weight: f64,
}

impl PrimalAverage {
    pub fn new(dim: usize) -> Self {
        PrimalAverage { sum: Array1::zeros(dim), weight: 0.0 }
    }

    pub fn push(&mut self, theta: f64, u: ArrayView1<f64>) {
        self.sum += &(&u.to_owned() * theta);
        self.weight += theta;
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn average(&self) -> Array1<f64> {
        &self.sum / self.weight
    }
}

/// Inexact augmented Lagrangian method: ICFG on the negated dual, primal
/// averaging over inner solutions.
pub fn ial_run(problem: &ConicProblem, config: &AugLagConfig) -> Result<SolveReport> {
    if config.mu <= 0.0 || config.delta <= 0.0 {
        return Err(Error::parameter("mu and delta must be positive"));
    }
    let start = std::time::Instant::now();
    let m = problem.m();
    let x0 = match &config.x0 {
        Some(x) => {
            if x.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: x.len() });
            }
            x.clone()
        }
        None => Array1::zeros(m),
    };

    let mut counters = Counters::default();
    let mut oracle = AugLagDualOracle {
        problem,
        mu: config.mu,
        delta: config.delta,
        path: config.path,
    };
    let mut avg = PrimalAverage::new(problem.n());
    let mut history: Vec<OuterRecord> = Vec::with_capacity(config.outer_budget);
    let f_star = config.f_star;

    // Primal averaging weights the inner solution produced at each
    // oracle evaluation point w^k with theta_k (theta_1 = 1).
    let history_ref = &mut history;
    let avg_ref = &mut avg;
    let mut observe = |info: &crate::icfg::IterInfo, c: &mut Counters| -> Result<bool> {
        let u = info.eval.primal.as_ref().expect("dual oracle always returns a primal witness");
        avg_ref.push(info.theta, u.view());
        let u_hat = avg_ref.average();
        let infeas = problem.infeasibility(u_hat.view());
        let f_value = problem.f_value(u_hat.view());
        history_ref.push(OuterRecord {
            k: info.k,
            infeas,
            f_value,
            subopt: f_star.map(|fs| f_value - fs),
            counters: c.clone(),
        });
        Ok(false)
    };
    let opts = IcfgOptions {
        schedule: config.schedule,
        budget: config.outer_budget,
        record_history: false,
        stop: Some(&mut observe),
    };
    let run = icfg_run(&mut oracle, &IdentityProx, x0.view(), opts, &mut counters)?;
    drop(run);

    let u_hat = avg.average();
    let final_infeas = problem.infeasibility(u_hat.view());
    let final_f_value = problem.f_value(u_hat.view());
    Ok(SolveReport {
        method: match config.schedule {
            ThetaSchedule::Constant => "ial".into(),
            ThetaSchedule::Accelerated => "fial".into(),
        },
        primal: u_hat.to_vec(),
        outer_iters: history.len(),
        counters,
        history,
        final_infeas,
        final_f_value,
        final_subopt: f_star.map(|fs| final_f_value - fs),
        converged: true,
        rho_final: None,
        mu_final: Some(config.mu),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Adaptive augmented Lagrangian: multiplier ascent with μ doubling until
/// the last primal point is ε-feasible.
pub fn a_ial_run(problem: &ConicProblem, mu0: f64, eps: f64) -> Result<SolveReport> {
    a_ial_run_with(problem, mu0, eps, InnerPath::Auto, None)
}

pub fn a_ial_run_with(
    problem: &ConicProblem,
    mu0: f64,
    eps: f64,
    path: InnerPath,
    f_star: Option<f64>,
) -> Result<SolveReport> {
    if mu0 <= 0.0 || eps <= 0.0 {
        return Err(Error::parameter("mu0 and eps must be positive"));
    }
    const MAX_DOUBLINGS: usize = 60;
    let start = std::time::Instant::now();
    let delta = eps / 3.0;
    let mut counters = Counters::default();
    let mut x: Array1<f64> = Array1::zeros(problem.m());
    let mut mu = mu0;
    let mut history = Vec::new();

    for k in 1..=MAX_DOUBLINGS {
        let u = inner_solve(problem, x.view(), mu, delta, path, &mut counters)?;
        let ev = auglag_eval(problem, u.view(), x.view(), mu, &mut counters)?;
        // feasibility stop on the raw residual (counted cone projection)
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
            return Err(Error::numerical(format!("non-finite residual at outer iteration {k}")));
        }
        if dist <= eps {
            return Ok(SolveReport {
                method: "aial".into(),
                primal: u.to_vec(),
                outer_iters: k,
                counters,
                history,
                final_infeas: dist,
                final_f_value: f_value,
                final_subopt: f_star.map(|fs| f_value - fs),
                converged: true,
                rho_final: None,
                mu_final: Some(mu),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        x = &x + &(&ev.grad_x * mu);
        mu *= 2.0;
    }
    Err(Error::NonConvergence(format!(
        "adaptive augmented Lagrangian did not reach infeasibility {eps} within {MAX_DOUBLINGS} doublings"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{norm2, Cone, SimpleSet};
    use crate::problem::Objective;
    use ndarray::{array, Array2};

    // min 1/2||u||^2 s.t. u1+u2 = b over a box; u* = (b/2, b/2),
    // x* = -b/2, f* = b^2/4.
    fn equality_qp(b: f64, half_width: f64) -> ConicProblem {
        ConicProblem::new(
            Objective::QuadDiag { q: array![1.0, 1.0], c: array![0.0, 0.0] },
            SimpleSet::Box {
                lower: vec![-half_width, -half_width],
                upper: vec![half_width, half_width],
            },
            array![[1.0, 1.0]],
            array![-b],
            Cone::Zero { dim: 1 },
        )
        .unwrap()
    }

    // closed-form minimizer of L^ag_mu(.,x) over the plane for the
    // equality QP: (I + mu A^T A) u = mu A^T b - A^T x
    fn auglag_argmin_qp(b: f64, mu: f64, x: f64) -> Array1<f64> {
        // A = [1 1]; solve (I + mu J) u = rhs with J = ones(2,2)
        let rhs = array![mu * b - x, mu * b - x];
        // (I + mu J)^{-1} = I - (mu/(1+2mu)) J
        let s = rhs.sum();
        &rhs - &(Array1::from_elem(2, mu * s / (1.0 + 2.0 * mu)))
    }

    fn auglag_value_qp(problem: &ConicProblem, u: &Array1<f64>, x: f64, mu: f64) -> f64 {
        let mut c = Counters::default();
        auglag_eval(problem, u.view(), array![x].view(), mu, &mut c).unwrap().value
    }

    #[test]
    fn auglag_eval_zero_cone_gradient() {
        let p = equality_qp(1.0, 5.0);
        let mut c = Counters::default();
        let ev = auglag_eval(&p, array![2.0, 0.0].view(), array![0.7].view(), 3.0, &mut c).unwrap();
        // K = {0}: grad_x = Gu + g
        assert!((ev.grad_x[0] - 1.0).abs() < 1e-14);
        assert_eq!(c.proj_k, 1);
        assert_eq!(c.matvec_g, 1);
    }

    #[test]
    fn auglag_eval_feasible_zero_multiplier() {
        let p = equality_qp(1.0, 5.0);
        let mut c = Counters::default();
        let u = array![0.5, 0.5];
        let ev = auglag_eval(&p, u.view(), array![0.0].view(), 2.0, &mut c).unwrap();
        assert!(norm2(&ev.grad_x) < 1e-14);
        assert!((ev.value - p.f_value(u.view())).abs() < 1e-14);
    }

    #[test]
    fn auglag_eval_matches_finite_difference() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g_mat = Array2::from_shape_fn((3, 2), |_| rng.gen_range(-1.0..1.0));
        let p = ConicProblem::new(
            Objective::Linear { c: array![0.3, -0.2] },
            SimpleSet::Box { lower: vec![-2.0, -2.0], upper: vec![2.0, 2.0] },
            g_mat,
            array![0.1, -0.4, 0.2],
            Cone::Product {
                parts: vec![Cone::NonnegOrthant { dim: 1 }, Cone::SecondOrder { dim: 2 }],
            },
        )
        .unwrap();
        let mu = 1.7;
        let u = array![0.4, -0.9];
        let x = array![0.3, -0.6, 1.1];
        let mut c = Counters::default();
        let ev = auglag_eval(&p, u.view(), x.view(), mu, &mut c).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let vp = auglag_eval(&p, u.view(), xp.view(), mu, &mut c).unwrap().value;
            let vm = auglag_eval(&p, u.view(), xm.view(), mu, &mut c).unwrap().value;
            assert!(
                ((vp - vm) / (2.0 * h) - ev.grad_x[i]).abs() < 1e-5,
                "finite difference mismatch in coordinate {i}"
            );
        }
    }

    #[test]
    fn inner_budget_examples() {
        assert_eq!(inner_budget(InnerMode::SimpleF, 1.0, 1.0, 2.0, 0.0, 1.0).unwrap(), 2);
        assert_eq!(inner_budget(InnerMode::SmoothF, 1.0, 1.0, 1.0, 2.0, 2.0).unwrap(), 2);
        // delta halved: grows by at most factor sqrt(2) plus one unit
        for &(ng, du, mu, lf, d) in
            &[(1.5, 3.0, 4.0, 0.5, 0.2), (1.0, 1.0, 2.0, 0.0, 1.0), (2.0, 10.0, 0.3, 1.0, 1e-3)]
        {
            let b1 = inner_budget(InnerMode::SmoothF, ng, du, mu, lf, d).unwrap();
            let b2 = inner_budget(InnerMode::SmoothF, ng, du, mu, lf, d / 2.0).unwrap();
            assert!(b2 as f64 <= b1 as f64 * 2f64.sqrt() + 1.0);
            assert!(b2 >= b1);
        }
        assert!(inner_budget(InnerMode::SimpleF, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn optimal_params_examples() {
        let (mu, delta) =
            optimal_params_auglag(ParamVariant::Gradient, 0.1, 1.0, 0.0, 1.0).unwrap();
        assert!((mu - 160.0).abs() < 1e-12);
        assert!((delta - 1.0 / 30.0).abs() < 1e-15);

        let (mu, delta) = optimal_params_auglag(ParamVariant::Fast, 0.1, 1.0, 0.0, 1.0).unwrap();
        assert!((mu - 160.0).abs() < 1e-12);
        assert!((delta - 1.0 / 240.0).abs() < 1e-15);

        // max branch: L_f/||G||^2 dominates
        let (mu, _) = optimal_params_auglag(ParamVariant::Gradient, 1.0, 0.1, 500.0, 1.0).unwrap();
        assert!((mu - 500.0).abs() < 1e-12);

        assert!(optimal_params_auglag(ParamVariant::Gradient, 0.1, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn inner_solve_simple_feasibility_objective() {
        // f = 0, K = Zero: minimize (mu/2)||Au - b||^2 over the box
        let p = ConicProblem::new(
            Objective::Zero,
            SimpleSet::Box { lower: vec![-2.0, -2.0], upper: vec![2.0, 2.0] },
            array![[1.0, 1.0]],
            array![-1.0],
            Cone::Zero { dim: 1 },
        )
        .unwrap();
        let mu = 2.0;
        let delta = 1e-6;
        let mut c = Counters::default();
        let u = inner_solve(&p, array![0.0].view(), mu, delta, InnerPath::Auto, &mut c).unwrap();
        // optimal value 0 (the line meets the box): phi(u) <= delta
        let resid = u.sum() - 1.0;
        assert!(0.5 * mu * resid * resid <= delta + 1e-12);
        assert!(c.proj_u > 0 && c.proj_k > 0);
    }

    #[test]
    fn inner_solve_reaches_known_minimizer() {
        let b = 1.0;
        let p = equality_qp(b, 5.0);
        let mu = 4.0;
        let delta = 1e-8;
        let x = 0.3;
        let u_star = auglag_argmin_qp(b, mu, x);
        let mut c = Counters::default();
        let u = inner_solve(&p, array![x].view(), mu, delta, InnerPath::Auto, &mut c).unwrap();
        // strong convexity 1 transfers the delta gap to iterate distance
        assert!(norm2(&(&u - &u_star)) <= (2.0 * delta).sqrt() + 1e-10);
        let gap = auglag_value_qp(&p, &u, x, mu) - auglag_value_qp(&p, &u_star, x, mu);
        assert!((-1e-12..=delta).contains(&gap), "gap {gap} outside [0, delta]");
    }

    #[test]
    fn inner_solve_budget_monotone_in_delta() {
        let p = equality_qp(1.0, 5.0);
        let mut c_coarse = Counters::default();
        let mut c_fine = Counters::default();
        inner_solve(&p, array![0.0].view(), 2.0, 1e-2, InnerPath::Auto, &mut c_coarse).unwrap();
        inner_solve(&p, array![0.0].view(), 2.0, 1e-6, InnerPath::Auto, &mut c_fine).unwrap();
        assert!(c_coarse.proj_u < c_fine.proj_u);
    }

    #[test]
    fn dual_oracle_value_matches_analytic() {
        let b = 1.0;
        let p = equality_qp(b, 5.0);
        let mu = 4.0;
        let delta = 1e-8;
        let mut oracle = dual_oracle_auglag(&p, mu, delta, InnerPath::Auto).unwrap();
        let mut c = Counters::default();
        for &x in &[0.0, -0.5, 0.8, 2.0] {
            let ev = oracle.eval(array![x].view(), &mut c).unwrap();
            let u_star = auglag_argmin_qp(b, mu, x);
            let d_exact = auglag_value_qp(&p, &u_star, x, mu);
            // minimization convention: oracle value approximates -d^ag(x)
            // from below within delta
            let diff = -ev.value - d_exact;
            assert!((-1e-9..=delta + 1e-12).contains(&diff), "x={x}: diff {diff}");
        }
    }

    #[test]
    fn dual_oracle_gradient_error_bound() {
        let b = 1.0;
        let p = equality_qp(b, 5.0);
        let mu = 4.0;
        let l_d = 1.0 / mu;
        for &delta in &[1e-4, 1e-6] {
            let mut oracle = dual_oracle_auglag(&p, mu, delta, InnerPath::Auto).unwrap();
            let mut c = Counters::default();
            for &x in &[0.0, 1.0, -2.0] {
                let ev = oracle.eval(array![x].view(), &mut c).unwrap();
                let u_star = auglag_argmin_qp(b, mu, x);
                let exact_grad = u_star.sum() - b; // Gu*+g for K = {0}
                let err = (-ev.grad[0] - exact_grad).abs();
                assert!(
                    err <= (4.0 * delta * l_d).sqrt() + 1e-8,
                    "x={x}, delta={delta}: grad error {err}"
                );
            }
        }
    }

    #[test]
    fn dual_oracle_sandwich() {
        use rand::prelude::*;
        let b = 1.0;
        let p = equality_qp(b, 5.0);
        let mu = 2.0;
        let delta = 1e-5;
        let l_out = 2.0 / mu;
        let mut oracle = dual_oracle_auglag(&p, mu, delta, InnerPath::Auto).unwrap();
        let mut c = Counters::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let x = rng.gen_range(-3.0..3.0);
            let y = rng.gen_range(-3.0..3.0);
            let ev_y = oracle.eval(array![y].view(), &mut c).unwrap();
            // exact negated dual at x
            let u_x = auglag_argmin_qp(b, mu, x);
            let phi_x = -auglag_value_qp(&p, &u_x, x, mu);
            let lin = ev_y.value + ev_y.grad[0] * (x - y);
            let lhs = phi_x - lin;
            assert!(lhs >= -1e-9, "lower sandwich violated: {lhs}");
            assert!(
                lhs <= 0.5 * l_out * (x - y) * (x - y) + 3.0 * delta + 1e-8,
                "upper sandwich violated: {lhs}"
            );
        }
    }

    #[test]
    fn primal_average_weight_identity() {
        // accelerated weights: sum_{j=1..k} theta_j = theta_k^2
        let mut avg = PrimalAverage::new(1);
        let mut theta = 1.0;
        for _ in 0..40 {
            avg.push(theta, array![1.0].view());
            let expect = theta * theta;
            assert!((avg.weight() - expect).abs() <= 1e-9 * expect);
            theta = crate::icfg::theta_next(theta);
        }
    }

    #[test]
    fn ial_run_reaches_optimum() {
        let p = equality_qp(1.0, 2.0);
        let mut config = AugLagConfig::new(10.0, 1e-5, 40, ThetaSchedule::Accelerated);
        config.f_star = Some(0.25);
        let report = ial_run(&p, &config).unwrap();
        assert_eq!(report.outer_iters, 40);
        assert!(report.final_infeas < 1e-2, "infeas {}", report.final_infeas);
        assert!(report.final_subopt.unwrap().abs() < 1e-2);
        assert_eq!(report.history.len(), 40);
        // infeasibility trend: last much better than first
        assert!(report.final_infeas < report.history[0].infeas);
    }

    #[test]
    fn a_ial_single_outer_when_mu_large() {
        // mu0 >= 16 R_d^2/eps with R_d = 0.5: one outer iteration suffices
        let p = equality_qp(1.0, 5.0);
        let eps = 1e-2;
        let mu0 = 16.0 * 0.25 / eps;
        let report = a_ial_run(&p, mu0, eps).unwrap();
        assert_eq!(report.outer_iters, 1);
        assert!(report.final_infeas <= eps);
    }

    #[test]
    fn a_ial_few_doublings_from_undershoot() {
        let p = equality_qp(1.0, 5.0);
        let eps = 1e-2;
        let mu0 = 16.0 * 0.25 / (8.0 * eps);
        let report = a_ial_run(&p, mu0, eps).unwrap();
        assert!(report.outer_iters <= 4, "outer iterations {}", report.outer_iters);
        assert!(report.final_infeas <= eps);
    }

    #[test]
    fn a_ial_passes_one_sided_check() {
        use crate::problem::{check_eps_optimal, KnownSolution, OptCheckMode};
        let p = equality_qp(1.0, 5.0);
        let eps = 1e-3;
        let report = a_ial_run(&p, 1.0, eps).unwrap();
        let known = KnownSolution {
            f_star: 0.25,
            x_star: Some(vec![-0.5]),
            r_d: Some(0.5),
            f_lower: Some(0.0),
        };
        let u = Array1::from_vec(report.primal.clone());
        // two-sided at eps directly: |f - f*| <= eps ||x*|| <= eps here
        let chk =
            check_eps_optimal(&p, &known, u.view(), eps, OptCheckMode::TwoSided).unwrap();
        assert!(chk.pass, "gap {}, infeas {}", chk.subopt_gap, chk.infeas);
    }
}
