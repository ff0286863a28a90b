//! Inexact composite fast gradient engine: minimizes F = φ + ψ where φ is
//! accessed through a (δ,L)-oracle and ψ has an exact prox over the simple
//! domain. Constant and accelerated momentum schedules share one loop.

use ndarray::{Array1, ArrayView1};

use crate::cones::SimpleSet;
use crate::error::{Error, Result};
use crate::problem::{prox_simple, Counters, Objective};

/// One oracle evaluation. `primal` carries an optional witness (e.g. the
/// inner minimizer behind a dual function value) for caller-side averaging.
#[derive(Debug, Clone)]
pub struct OracleEval {
    pub value: f64,
    pub grad: Array1<f64>,
    pub primal: Option<Array1<f64>>,
}

/// First-order inexact (δ,L)-oracle for φ: the linearization at y
/// under-estimates φ and over-estimates it by at most (L/2)‖x−y‖² + δ.
pub trait DeltaLOracle {
    fn delta(&self) -> f64;
    fn lipschitz(&self) -> f64;
    fn eval(&mut self, y: ArrayView1<f64>, c: &mut Counters) -> Result<OracleEval>;
}

/// Closure-backed oracle, mostly for tests and penalty smoothings.
pub struct FnOracle<F> {
    pub delta: f64,
    pub l: f64,
    pub f: F,
}

impl<F> DeltaLOracle for FnOracle<F>
where
    F: FnMut(ArrayView1<f64>, &mut Counters) -> Result<OracleEval>,
{
    fn delta(&self) -> f64 {
        self.delta
    }

    fn lipschitz(&self) -> f64 {
        self.l
    }

    fn eval(&mut self, y: ArrayView1<f64>, c: &mut Counters) -> Result<OracleEval> {
        (self.f)(y, c)
    }
}

/// Exact prox of ψ with stepsize t over the domain.
pub trait ProxOp {
    fn prox(&self, z: ArrayView1<f64>, t: f64, c: &mut Counters) -> Result<Array1<f64>>;
}

/// ψ ≡ 0 over the full space.
pub struct IdentityProx;

impl ProxOp for IdentityProx {
    fn prox(&self, z: ArrayView1<f64>, _t: f64, _c: &mut Counters) -> Result<Array1<f64>> {
        Ok(z.to_owned())
    }
}

/// ψ = indicator of a simple set (counts one U-projection per call).
pub struct SetIndicatorProx<'a> {
    pub set: &'a SimpleSet,
}

impl ProxOp for SetIndicatorProx<'_> {
    fn prox(&self, z: ArrayView1<f64>, _t: f64, c: &mut Counters) -> Result<Array1<f64>> {
        c.proj_u += 1;
        self.set.project(z)
    }
}

/// ψ = f + indicator of the set, with closed-form prox.
pub struct ObjectiveProx<'a> {
    pub objective: &'a Objective,
    pub set: &'a SimpleSet,
}

impl ProxOp for ObjectiveProx<'_> {
    fn prox(&self, z: ArrayView1<f64>, t: f64, c: &mut Counters) -> Result<Array1<f64>> {
        c.proj_u += 1;
        prox_simple(self.objective, self.set, z, t)
    }
}

impl<F> ProxOp for F
where
    F: Fn(ArrayView1<f64>, f64, &mut Counters) -> Result<Array1<f64>>,
{
    fn prox(&self, z: ArrayView1<f64>, t: f64, c: &mut Counters) -> Result<Array1<f64>> {
        self(z, t, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaSchedule {
    /// θ_k = 1: gradient method, averaged output.
    Constant,
    /// FISTA weights, last-iterate output.
    Accelerated,
}

/// θ_{k+1} = (1 + √(1 + 4θ_k²)) / 2.
pub fn theta_next(theta: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt())
}

/// Per-iteration view handed to the stop callback.
pub struct IterInfo<'a> {
    /// 1-based iteration index.
    pub k: usize,
    pub z: &'a Array1<f64>,
    pub w: &'a Array1<f64>,
    /// Momentum weight θ_k in effect at this iteration (1 for Constant).
    pub theta: f64,
    pub eval: &'a OracleEval,
}

pub struct IcfgOptions<'a> {
    pub schedule: ThetaSchedule,
    pub budget: usize,
    pub record_history: bool,
    /// Called after each iteration with the shared counters; return
    /// `Ok(true)` to stop. Errors abort the run.
    pub stop: Option<&'a mut dyn FnMut(&IterInfo, &mut Counters) -> Result<bool>>,
}

impl IcfgOptions<'_> {
    pub fn new(schedule: ThetaSchedule, budget: usize) -> Self {
        IcfgOptions { schedule, budget, record_history: false, stop: None }
    }
}

#[derive(Debug, Clone)]
pub struct IcfgRun {
    pub last: Array1<f64>,
    /// Running average (1/k)Σ z^i for the Constant schedule; equals `last`
    /// under the Accelerated schedule.
    pub average: Array1<f64>,
    pub iters: usize,
    pub history: Vec<Array1<f64>>,
    pub stopped_early: bool,
}

impl IcfgRun {
    /// Theorem-convention output: average for Constant, last for
    /// Accelerated.
    pub fn output(&self, schedule: ThetaSchedule) -> &Array1<f64> {
        match schedule {
            ThetaSchedule::Constant => &self.average,
            ThetaSchedule::Accelerated => &self.last,
        }
    }
}

/// Single composite step z = prox_{ψ/L}(w − ∇φ(w)/L).
pub fn composite_step(
    oracle: &mut dyn DeltaLOracle,
    psi_prox: &dyn ProxOp,
    w: ArrayView1<f64>,
    c: &mut Counters,
) -> Result<Array1<f64>> {
    let l = oracle.lipschitz();
    let ev = oracle.eval(w, c)?;
    let shifted = &w.to_owned() - &(&ev.grad / l);
    psi_prox.prox(shifted.view(), 1.0 / l, c)
}

pub fn icfg_run(
    oracle: &mut dyn DeltaLOracle,
    psi_prox: &dyn ProxOp,
    z0: ArrayView1<f64>,
    mut opts: IcfgOptions,
    c: &mut Counters,
) -> Result<IcfgRun> {
    if opts.budget == 0 {
        return Err(Error::parameter("iteration budget must be at least 1"));
    }
    let l = oracle.lipschitz();
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::parameter(format!("oracle L must be positive and finite, got {l}")));
    }

    let mut z_prev = z0.to_owned();
    let mut w = z0.to_owned();
    let mut theta = 1.0_f64;
    let mut avg_sum: Array1<f64> = Array1::zeros(z0.len());
    let mut history = Vec::new();
    let mut iters = 0usize;
    let mut stopped_early = false;

    for k in 1..=opts.budget {
        let ev = oracle.eval(w.view(), c)?;
        let shifted = &w - &(&ev.grad / l);
        let z = psi_prox.prox(shifted.view(), 1.0 / l, c)?;
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::numerical(format!("non-finite iterate at iteration {k}")));
        }
        iters = k;
        avg_sum += &z;
        if opts.record_history {
            history.push(z.clone());
        }
        let stop = match opts.stop.as_deref_mut() {
            Some(cb) => cb(&IterInfo { k, z: &z, w: &w, theta, eval: &ev }, c)?,
            None => false,
        };

        let theta_nx = match opts.schedule {
            ThetaSchedule::Constant => 1.0,
            ThetaSchedule::Accelerated => theta_next(theta),
        };
        let beta = (theta - 1.0) / theta_nx;
        w = &z + &((&z - &z_prev) * beta);
        z_prev = z;
        theta = theta_nx;

        if stop {
            stopped_early = true;
            break;
        }
    }

    let average = match opts.schedule {
        ThetaSchedule::Constant => &avg_sum / iters as f64,
        ThetaSchedule::Accelerated => z_prev.clone(),
    };
    Ok(IcfgRun { last: z_prev, average, iters, history, stopped_early })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::norm2;
    use ndarray::array;

    fn quadratic_oracle(a: Array1<f64>, delta_inject: f64) -> impl DeltaLOracle {
        // φ(z) = 1/2 ||z - a||^2; optionally shift reported values by a
        // constant error within the (δ,L)-oracle envelope.
        FnOracle {
            delta: delta_inject,
            l: 1.0,
            f: move |y: ArrayView1<f64>, _c: &mut Counters| {
                let diff = &y.to_owned() - &a;
                Ok(OracleEval {
                    value: 0.5 * diff.dot(&diff) - 0.5 * delta_inject,
                    grad: diff,
                    primal: None,
                })
            },
        }
    }

    #[test]
    fn theta_next_golden_ratio() {
        assert!((theta_next(1.0) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn theta_next_strictly_increases() {
        let mut t = 1.0;
        for _ in 0..100 {
            let n = theta_next(t);
            assert!(n > t + 0.4);
            t = n;
        }
    }

    #[test]
    fn theta_bracket() {
        // θ_1 = 1, θ_{k+1} = next(θ_k); bracket (k+1)/2 ≤ θ_k ≤ k
        let mut t = 1.0;
        for k in 1..=21 {
            assert!((k as f64 + 1.0) / 2.0 <= t + 1e-12, "lower bracket at k={k}");
            assert!(t <= k as f64 + 1e-12, "upper bracket at k={k}");
            t = theta_next(t);
        }
    }

    #[test]
    fn composite_step_plain_gradient() {
        let mut oracle = quadratic_oracle(array![0.0, 0.0], 0.0);
        let mut c = Counters::default();
        let w = array![5.0, -3.0];
        let z = composite_step(&mut oracle, &IdentityProx, w.view(), &mut c).unwrap();
        // exact quadratic with L=1: one step lands on the minimizer
        assert!(norm2(&z) < 1e-15);
    }

    #[test]
    fn composite_step_clamps_into_box() {
        let mut oracle = FnOracle {
            delta: 0.0,
            l: 1.0,
            f: |_y: ArrayView1<f64>, _c: &mut Counters| {
                Ok(OracleEval { value: 0.0, grad: array![-3.0], primal: None })
            },
        };
        let set = SimpleSet::Box { lower: vec![0.0], upper: vec![1.0] };
        let mut c = Counters::default();
        let z = composite_step(
            &mut oracle,
            &SetIndicatorProx { set: &set },
            array![0.2].view(),
            &mut c,
        )
        .unwrap();
        assert_eq!(z, array![1.0]);
        assert_eq!(c.proj_u, 1);
    }

    #[test]
    fn accelerated_rate_exact_oracle() {
        // F gap ≤ 2L||z0 - a||^2 / (k+1)^2 at every k along the history
        let a = array![1.0, -2.0, 0.5];
        let z0 = array![4.0, 4.0, 4.0];
        let r2 = {
            let d = &z0 - &a;
            d.dot(&d)
        };
        let mut oracle = quadratic_oracle(a.clone(), 0.0);
        let mut opts = IcfgOptions::new(ThetaSchedule::Accelerated, 50);
        opts.record_history = true;
        let mut c = Counters::default();
        let run = icfg_run(&mut oracle, &IdentityProx, z0.view(), opts, &mut c).unwrap();
        assert_eq!(run.iters, 50);
        for (i, z) in run.history.iter().enumerate() {
            let k = (i + 1) as f64;
            let gap = {
                let d = z - &a;
                0.5 * d.dot(&d)
            };
            assert!(
                gap <= 2.0 * r2 / ((k + 1.0) * (k + 1.0)) + 1e-12,
                "accelerated bound violated at k={}",
                i + 1
            );
        }
        let final_gap = {
            let d = &run.last - &a;
            0.5 * d.dot(&d)
        };
        assert!(final_gap <= 2.0 * r2 / (51.0 * 51.0));
    }

    #[test]
    fn accelerated_rate_with_injected_delta() {
        let a = array![1.0, -2.0];
        let z0 = array![10.0, -10.0];
        let delta = 1e-3;
        let r2 = {
            let d = &z0 - &a;
            d.dot(&d)
        };
        let mut oracle = quadratic_oracle(a.clone(), delta);
        let mut opts = IcfgOptions::new(ThetaSchedule::Accelerated, 200);
        opts.record_history = true;
        let mut c = Counters::default();
        let run = icfg_run(&mut oracle, &IdentityProx, z0.view(), opts, &mut c).unwrap();
        for (i, z) in run.history.iter().enumerate() {
            let k = (i + 1) as f64;
            let gap = {
                let d = z - &a;
                0.5 * d.dot(&d)
            };
            assert!(gap <= 2.0 * r2 / ((k + 1.0) * (k + 1.0)) + k * delta + 1e-12);
        }
    }

    #[test]
    fn constant_schedule_average_rate() {
        let a = array![0.3, -0.7];
        let z0 = array![5.0, 5.0];
        let delta = 1e-4;
        let r2 = {
            let d = &z0 - &a;
            d.dot(&d)
        };
        let mut oracle = quadratic_oracle(a.clone(), delta);
        let opts = IcfgOptions::new(ThetaSchedule::Constant, 100);
        let mut c = Counters::default();
        let run = icfg_run(&mut oracle, &IdentityProx, z0.view(), opts, &mut c).unwrap();
        let gap = {
            let d = &run.average - &a;
            0.5 * d.dot(&d)
        };
        assert!(gap <= r2 / 200.0 + delta + 1e-12);
    }

    #[test]
    fn deterministic_bit_identical() {
        let a = array![1.0, 2.0, 3.0];
        let z0 = array![-4.0, 0.0, 9.0];
        let run_once = || {
            let mut oracle = quadratic_oracle(a.clone(), 0.0);
            let mut opts = IcfgOptions::new(ThetaSchedule::Accelerated, 40);
            opts.record_history = true;
            let mut c = Counters::default();
            icfg_run(&mut oracle, &IdentityProx, z0.view(), opts, &mut c).unwrap()
        };
        let r1 = run_once();
        let r2 = run_once();
        assert_eq!(r1.history.len(), r2.history.len());
        for (x, y) in r1.history.iter().zip(&r2.history) {
            assert_eq!(x, y, "iterate sequences must be bit-identical");
        }
    }

    #[test]
    fn divergence_names_iteration() {
        let mut oracle = FnOracle {
            delta: 0.0,
            l: 1.0,
            f: |_y: ArrayView1<f64>, _c: &mut Counters| {
                Ok(OracleEval { value: 0.0, grad: array![f64::NAN], primal: None })
            },
        };
        let err = icfg_run(
            &mut oracle,
            &IdentityProx,
            array![0.0].view(),
            IcfgOptions::new(ThetaSchedule::Constant, 10),
            &mut Counters::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("iteration 1"), "got: {err}");
    }

    #[test]
    fn stop_callback_halts() {
        let a = array![0.0];
        let mut oracle = quadratic_oracle(a, 0.0);
        let mut stop = |info: &IterInfo, _c: &mut Counters| Ok(info.k >= 3);
        let opts = IcfgOptions {
            schedule: ThetaSchedule::Accelerated,
            budget: 100,
            record_history: false,
            stop: Some(&mut stop),
        };
        let mut c = Counters::default();
        let run = icfg_run(&mut oracle, &IdentityProx, array![7.0].view(), opts, &mut c).unwrap();
        assert_eq!(run.iters, 3);
        assert!(run.stopped_early);
    }
}
