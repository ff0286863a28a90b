//! Modified Nesterov smoothing of the dual: smooth only the Lagrangian
//! part d_U via a strongly convex prox term, keep the conic part as the
//! indicator of the polar cone, and run the composite fast-gradient
//! engine with prox = polar-cone projection.

use ndarray::{Array1, ArrayView1};

use crate::auglag::{InnerPath, PrimalAverage};
use crate::error::{Error, Result};
use crate::icfg::{icfg_run, FnOracle, IcfgOptions, OracleEval, ProxOp, ThetaSchedule};
use crate::problem::{ConicProblem, Counters};
use crate::report::{OuterRecord, SolveReport};

pub struct NsConfig {
    pub mu: f64,
    pub delta: f64,
    /// Prox center; defaults to the set center.
    pub u0: Option<Array1<f64>>,
    pub k_outer: usize,
    pub path: InnerPath,
    pub f_star: Option<f64>,
}

impl NsConfig {
    pub fn new(mu: f64, delta: f64, k_outer: usize) -> Self {
        NsConfig { mu, delta, u0: None, k_outer, path: InnerPath::Auto, f_star: None }
    }
}

#[derive(Debug, Clone)]
pub struct SmoothedLagEval {
    pub value: f64,
    pub grad_x: Array1<f64>,
}

/// Smoothed Lagrangian L_μ(u,x) = f(u) + ⟨x, Gu+g⟩ + (μ/2)‖u−u0‖²;
/// μ = 0 recovers the plain Lagrangian. One matvec.
pub fn smoothed_lag_eval(
    problem: &ConicProblem,
    u: ArrayView1<f64>,
    x: ArrayView1<f64>,
    mu: f64,
    u0: ArrayView1<f64>,
    c: &mut Counters,
) -> Result<SmoothedLagEval> {
    if mu < 0.0 {
        return Err(Error::parameter(format!("mu must be nonnegative, got {mu}")));
    }
    if x.len() != problem.m() {
        return Err(Error::DimensionMismatch { expected: problem.m(), got: x.len() });
    }
    if u0.len() != problem.n() {
        return Err(Error::DimensionMismatch { expected: problem.n(), got: u0.len() });
    }
    let r = problem.matvec(u, c) + &problem.g_vec;
    let d = &u.to_owned() - &u0;
    let value = problem.f_value(u) + x.dot(&r) + 0.5 * mu * d.dot(&d);
    Ok(SmoothedLagEval { value, grad_x: r })
}

/// Inner iteration count for the smooth-objective path:
/// ⌈√(L_f/μ) log(L_f D_U²/(4δ))⌉, clamped to at least 1.
pub fn inner_budget_ns(l_f: f64, mu: f64, d_u: f64, delta: f64) -> Result<usize> {
    if delta <= 0.0 || mu <= 0.0 {
        return Err(Error::parameter("mu and delta must be positive"));
    }
    if !d_u.is_finite() {
        return Err(Error::capability("inner budget needs a finite set diameter D_U"));
    }
    let raw = (l_f / mu).sqrt() * (l_f * d_u * d_u / (4.0 * delta)).ln();
    Ok((raw.ceil().max(1.0)) as usize)
}

/// δ-accurate minimizer of L_μ(·, x) over U.
pub fn inner_solve_ns(
    problem: &ConicProblem,
    x: ArrayView1<f64>,
    mu: f64,
    delta: f64,
    u0: ArrayView1<f64>,
    path: InnerPath,
    c: &mut Counters,
) -> Result<Array1<f64>> {
    if mu <= 0.0 {
        return Err(Error::parameter(format!("mu must be positive, got {mu}")));
    }
    let simple_ok = problem.objective.prox_available(&problem.set);
    let use_simple = match path {
        InnerPath::Simple if !simple_ok => {
            return Err(Error::capability(
                "objective has no closed-form prox over this set; use the smooth path",
            ))
        }
        InnerPath::Simple => true,
        InnerPath::Smooth => false,
        InnerPath::Auto => simple_ok,
    };

    let gtx = problem.matvec_t(x, c);
    if use_simple {
        // min f(u) + <G^T x, u> + (mu/2)||u - u0||^2 over U
        // = prox of f at the shifted center with stepsize 1/mu
        let shifted = &u0.to_owned() - &(&gtx / mu);
        return problem.prox_f(shifted.view(), 1.0 / mu, c);
    }

    let l_f = problem.objective.l_f();
    if l_f <= 0.0 {
        return Err(Error::capability(
            "smooth inner path requires a smooth objective (L_f > 0)",
        ));
    }
    let budget = inner_budget_ns(l_f, mu, problem.d_u(), delta)?;
    // accelerated method for the mu-strongly-convex composite: gradient
    // step on f(.) + <x, G.>, prox on (mu/2)||.-u0||^2 + indicator of U
    let l = l_f + mu;
    let beta = (l.sqrt() - mu.sqrt()) / (l.sqrt() + mu.sqrt());
    let t = 1.0 / l;
    let mut z_prev = u0.to_owned();
    let mut w = u0.to_owned();
    for k in 1..=budget {
        let grad = problem.grad_f(w.view(), c) + &gtx;
        let v = &w - &(&grad * t);
        // prox: argmin (mu/2)||u-u0||^2 + (1/2t)||u-v||^2 over U
        let blend = (&u0.to_owned() * (mu * t) + &v) / (1.0 + mu * t);
        c.proj_u += 1;
        let z = problem.set.project(blend.view())?;
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::numerical(format!("non-finite inner iterate at iteration {k}")));
        }
        w = &z + &((&z - &z_prev) * beta);
        z_prev = z;
    }
    Ok(z_prev)
}

/// ε-targeted smoothing and inner accuracy for a fixed outer count.
pub fn ns_params(
    k_outer: usize,
    norm_g: f64,
    r_d: f64,
    d_u: f64,
    eps: f64,
) -> Result<(f64, f64)> {
    if k_outer == 0 || norm_g <= 0.0 || r_d <= 0.0 || d_u <= 0.0 || eps <= 0.0 {
        return Err(Error::parameter("ns_params requires positive inputs"));
    }
    let mu = 2f64.powf(1.5) * norm_g * r_d / (d_u * k_outer as f64);
    let n_out = ns_outer_count(eps, norm_g, d_u, r_d)? as f64;
    let delta = (eps * eps / (8.0 * norm_g * d_u * r_d)).min(eps / (6.0 * n_out));
    Ok((mu, delta))
}

/// Outer iteration count ⌈6‖G‖D_U R_d / ε⌉ for ε-optimality.
pub fn ns_outer_count(eps: f64, norm_g: f64, d_u: f64, r_d: f64) -> Result<usize> {
    if eps <= 0.0 || norm_g <= 0.0 || d_u <= 0.0 || r_d <= 0.0 {
        return Err(Error::parameter("outer count requires positive inputs"));
    }
    Ok((6.0 * norm_g * d_u * r_d / eps).ceil() as usize)
}

struct PolarConeProx<'a> {
    problem: &'a ConicProblem,
}

impl ProxOp for PolarConeProx<'_> {
    fn prox(&self, z: ArrayView1<f64>, _t: f64, c: &mut Counters) -> Result<Array1<f64>> {
        Ok(self.problem.project_polar(z, c))
    }
}

/// Fast-gradient smoothing run: fixed outer count, multiplier iterates in
/// the polar cone, θ-weighted primal averaging.
pub fn ns_run(problem: &ConicProblem, config: &NsConfig) -> Result<SolveReport> {
    if config.mu <= 0.0 || config.delta <= 0.0 {
        return Err(Error::parameter("mu and delta must be positive"));
    }
    if config.k_outer == 0 {
        return Err(Error::parameter("k_outer must be at least 1"));
    }
    if !problem.d_u().is_finite() {
        return Err(Error::capability("smoothing run requires a bounded set (finite D_U)"));
    }
    let start = std::time::Instant::now();
    let u0 = match &config.u0 {
        Some(u) => {
            if u.len() != problem.n() {
                return Err(Error::DimensionMismatch { expected: problem.n(), got: u.len() });
            }
            u.clone()
        }
        None => problem.set.center(),
    };

    let mu = config.mu;
    let delta = config.delta;
    let path = config.path;
    let norm_g = problem.norm_g();
    let l_d = norm_g * norm_g / mu;
    let u0_oracle = u0.clone();
    let mut oracle = FnOracle {
        delta: 3.0 * delta,
        l: 2.0 * l_d,
        f: move |x: ArrayView1<f64>, c: &mut Counters| {
            let u = inner_solve_ns(problem, x, mu, delta, u0_oracle.view(), path, c)?;
            let ev = smoothed_lag_eval(problem, u.view(), x, mu, u0_oracle.view(), c)?;
            Ok(OracleEval { value: -ev.value, grad: -ev.grad_x, primal: Some(u) })
        },
    };

    let mut counters = Counters::default();
    let mut avg = PrimalAverage::new(problem.n());
    let mut history: Vec<OuterRecord> = Vec::with_capacity(config.k_outer);
    let f_star = config.f_star;
    let avg_ref = &mut avg;
    let history_ref = &mut history;
    // average over the inner solutions at the oracle evaluation points
    let mut observe = |info: &crate::icfg::IterInfo, c: &mut Counters| -> Result<bool> {
        let u = info.eval.primal.as_ref().expect("smoothing oracle always returns a primal");
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
        schedule: ThetaSchedule::Accelerated,
        budget: config.k_outer,
        record_history: false,
        stop: Some(&mut observe),
    };
    let x0: Array1<f64> = Array1::zeros(problem.m());
    let prox = PolarConeProx { problem };
    icfg_run(&mut oracle, &prox, x0.view(), opts, &mut counters)?;

    let u_hat = avg.average();
    let final_infeas = problem.infeasibility(u_hat.view());
    let final_f_value = problem.f_value(u_hat.view());
    Ok(SolveReport {
        method: "ns".into(),
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
