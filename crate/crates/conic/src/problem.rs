//! Problem data model: objective oracles, the conic constraint `Gu+g in K`
//! over a simple set `U`, per-run projection counters and the
//! epsilon-optimality check.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::cones::{norm2, Cone, SimpleSet};
use crate::error::{Error, Result};

/// Projection / matvec / gradient tallies for one solver run.
///
/// Counters belong to the run context, not to the problem: nested
/// inner/outer solvers share a single tally.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub proj_u: u64,
    pub proj_k: u64,
    pub proj_kstar: u64,
    pub matvec_g: u64,
    pub matvec_gt: u64,
    pub grad_f: u64,
}

impl Counters {
    pub fn total_projections(&self) -> u64 {
        self.proj_u + self.proj_k + self.proj_kstar
    }

    pub fn matvec_total(&self) -> u64 {
        self.matvec_g + self.matvec_gt
    }
}

/// Objective oracle: finite-valued convex functions on `U`.
///
/// All supported kinds are differentiable; the linear and zero kinds are
/// treated as simple (prox in closed form) with the convention `L_f = 0`.
/// The diagonal quadratic is both smooth and, over separable sets, simple.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Zero,
    Linear { c: Array1<f64> },
    QuadDiag { q: Array1<f64>, c: Array1<f64> },
}

impl Objective {
    pub fn value(&self, u: ArrayView1<f64>) -> f64 {
        match self {
            Objective::Zero => 0.0,
            Objective::Linear { c } => c.dot(&u),
            Objective::QuadDiag { q, c } => {
                0.5 * u.iter().zip(q).map(|(&x, &qi)| qi * x * x).sum::<f64>() + c.dot(&u)
            }
        }
    }

    pub fn gradient(&self, u: ArrayView1<f64>) -> Array1<f64> {
        match self {
            Objective::Zero => Array1::zeros(u.len()),
            Objective::Linear { c } => c.clone(),
            Objective::QuadDiag { q, c } => &(&u.to_owned() * q) + c,
        }
    }

    /// Lipschitz constant of the gradient; zero for simple kinds by the
    /// usual convention.
    pub fn l_f(&self) -> f64 {
        match self {
            Objective::Zero | Objective::Linear { .. } => 0.0,
            Objective::QuadDiag { q, .. } => q.iter().cloned().fold(0.0, f64::max),
        }
    }

    pub fn sigma_f(&self) -> f64 {
        match self {
            Objective::Zero | Objective::Linear { .. } => 0.0,
            Objective::QuadDiag { q, .. } => q.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// Whether `min_{u in U} f(u) + 1/(2t) ||u - z||^2` has a closed form
    /// for this objective/set pairing.
    pub fn prox_available(&self, set: &SimpleSet) -> bool {
        match self {
            Objective::Zero | Objective::Linear { .. } => true,
            Objective::QuadDiag { q, .. } => match set {
                SimpleSet::Box { .. } | SimpleSet::FullSpace { .. } => true,
                SimpleSet::Ball { .. } => {
                    let q0 = q.first().copied().unwrap_or(0.0);
                    q.iter().all(|&qi| (qi - q0).abs() <= 1e-14 * (1.0 + q0.abs()))
                }
                SimpleSet::PPowerEpigraph { .. } => false,
            },
        }
    }
}

/// Exact prox `argmin_{u in U} f(u) + 1/(2t) ||u - z||^2`.
pub fn prox_simple(
    f: &Objective,
    set: &SimpleSet,
    z: ArrayView1<f64>,
    t: f64,
) -> Result<Array1<f64>> {
    if t <= 0.0 {
        return Err(Error::parameter(format!("prox stepsize must be positive, got {t}")));
    }
    match f {
        Objective::Zero => set.project(z),
        Objective::Linear { c } => {
            let shifted = &z.to_owned() - &(c * t);
            set.project(shifted.view())
        }
        Objective::QuadDiag { q, c } => match set {
            SimpleSet::Box { .. } | SimpleSet::FullSpace { .. } => {
                let unclamped = Array1::from_iter(
                    z.iter()
                        .zip(q.iter().zip(c))
                        .map(|(&zi, (&qi, &ci))| (zi - t * ci) / (1.0 + t * qi)),
                );
                set.project(unclamped.view())
            }
            SimpleSet::Ball { .. } if f.prox_available(set) => {
                let q0 = q[0];
                let w = (&z.to_owned() - &(c * t)) / (1.0 + t * q0);
                set.project(w.view())
            }
            _ => Err(Error::capability(
                "no closed-form prox for this objective/set pairing",
            )),
        },
    }
}

/// The conic convex problem `min_{u in U} f(u)  s.t.  Gu + g in K`.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub objective: Objective,
    pub set: SimpleSet,
    pub g_mat: Array2<f64>,
    pub g_vec: Array1<f64>,
    pub cone: Cone,
    norm_g: f64,
    d_u: f64,
}

impl ConicProblem {
    pub fn new(
        objective: Objective,
        set: SimpleSet,
        g_mat: Array2<f64>,
        g_vec: Array1<f64>,
        cone: Cone,
    ) -> Result<Self> {
        let n = set.dim();
        let m = cone.dim();
        if g_mat.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g_mat.ncols() });
        }
        if g_mat.nrows() != m {
            return Err(Error::DimensionMismatch { expected: m, got: g_mat.nrows() });
        }
        if g_vec.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: g_vec.len() });
        }
        match &objective {
            Objective::Linear { c } if c.len() != n => {
                return Err(Error::DimensionMismatch { expected: n, got: c.len() });
            }
            Objective::QuadDiag { q, c } if q.len() != n || c.len() != n => {
                return Err(Error::DimensionMismatch { expected: n, got: q.len() });
            }
            _ => {}
        }
        let norm_g = spectral_norm(&g_mat);
        let d_u = set.diameter();
        Ok(ConicProblem { objective, set, g_mat, g_vec, cone, norm_g, d_u })
    }

    /// Override the recorded set diameter `D_U` (used when the effective
    /// feasible region is a bounded subset of an unbounded simple set).
    pub fn with_diameter(mut self, d_u: f64) -> Self {
        self.d_u = d_u;
        self
    }

    pub fn n(&self) -> usize {
        self.set.dim()
    }

    pub fn m(&self) -> usize {
        self.cone.dim()
    }

    /// Spectral norm `||G||`, precomputed by power iteration.
    pub fn norm_g(&self) -> f64 {
        self.norm_g
    }

    pub fn d_u(&self) -> f64 {
        self.d_u
    }

    // ---- instrumented operations (the complexity measure) ----

    pub fn matvec(&self, u: ArrayView1<f64>, c: &mut Counters) -> Array1<f64> {
        c.matvec_g += 1;
        self.g_mat.dot(&u)
    }

    pub fn matvec_t(&self, x: ArrayView1<f64>, c: &mut Counters) -> Array1<f64> {
        c.matvec_gt += 1;
        self.g_mat.t().dot(&x)
    }

    pub fn project_cone(&self, v: ArrayView1<f64>, c: &mut Counters) -> Array1<f64> {
        c.proj_k += 1;
        self.cone.project(v).expect("cone dims validated at construction")
    }

    pub fn project_polar(&self, v: ArrayView1<f64>, c: &mut Counters) -> Array1<f64> {
        c.proj_kstar += 1;
        self.cone.project_polar(v).expect("cone dims validated at construction")
    }

    pub fn project_set(&self, u: ArrayView1<f64>, c: &mut Counters) -> Result<Array1<f64>> {
        c.proj_u += 1;
        self.set.project(u)
    }

    pub fn grad_f(&self, u: ArrayView1<f64>, c: &mut Counters) -> Array1<f64> {
        c.grad_f += 1;
        self.objective.gradient(u)
    }

    pub fn prox_f(&self, z: ArrayView1<f64>, t: f64, c: &mut Counters) -> Result<Array1<f64>> {
        c.proj_u += 1;
        prox_simple(&self.objective, &self.set, z, t)
    }

    /// Instrumented gradient of `1/2 dist_K(Gu+g)^2`: one cone projection,
    /// two matvecs.
    pub fn half_sq_dist_grad(&self, u: ArrayView1<f64>, c: &mut Counters) -> Array1<f64> {
        let w = self.matvec(u, c) + &self.g_vec;
        let resid = &w - &self.project_cone(w.view(), c);
        self.matvec_t(resid.view(), c)
    }

    // ---- untracked diagnostics ----

    pub fn f_value(&self, u: ArrayView1<f64>) -> f64 {
        self.objective.value(u)
    }

    pub fn residual(&self, u: ArrayView1<f64>) -> Array1<f64> {
        self.g_mat.dot(&u) + &self.g_vec
    }

    pub fn infeasibility(&self, u: ArrayView1<f64>) -> f64 {
        self.cone
            .dist(self.residual(u).view())
            .expect("cone dims validated at construction")
    }
}

fn spectral_norm(g: &Array2<f64>) -> f64 {
    let n = g.ncols();
    if n == 0 || g.nrows() == 0 {
        return 0.0;
    }
    // deterministic start, slightly tilted to avoid orthogonal starts
    let mut v = Array1::from_iter((0..n).map(|i| 1.0 + 1e-3 * (i as f64)));
    let nv = norm2(&v);
    v /= nv;
    let mut prev = 0.0;
    for _ in 0..200 {
        let gv = g.dot(&v);
        let gtgv = g.t().dot(&gv);
        let lam = norm2(&gtgv);
        if lam == 0.0 {
            return 0.0;
        }
        v = gtgv / lam;
        let sigma = lam.sqrt();
        if (sigma - prev).abs() <= 1e-10 * sigma.max(1.0) {
            return sigma;
        }
        prev = sigma;
    }
    prev
}

/// Reference data attached to benchmark instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnownSolution {
    pub f_star: f64,
    pub x_star: Option<Vec<f64>>,
    /// Bound on the distance from `x^0 = 0` to an optimal multiplier.
    pub r_d: Option<f64>,
    /// `f_* = min_{u in U} f(u)`.
    pub f_lower: Option<f64>,
}

impl KnownSolution {
    /// `Delta^* = f^* - f_*`.
    pub fn delta_star(&self) -> Option<f64> {
        self.f_lower.map(|fl| self.f_star - fl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptCheckMode {
    TwoSided,
    /// Penalty-method acceptance: the lower bound relaxes to `-Delta^*`.
    OneSided,
}

#[derive(Debug, Clone)]
pub struct OptCheck {
    pub subopt_gap: f64,
    pub infeas: f64,
    pub pass: bool,
}

/// Definition-2.3 style epsilon-optimality check against a known `f^*`.
pub fn check_eps_optimal(
    problem: &ConicProblem,
    known: &KnownSolution,
    u: ArrayView1<f64>,
    eps: f64,
    mode: OptCheckMode,
) -> Result<OptCheck> {
    if eps <= 0.0 {
        return Err(Error::parameter(format!("eps must be positive, got {eps}")));
    }
    let u_feas = problem.set.project(u)?;
    let subopt_gap = problem.f_value(u_feas.view()) - known.f_star;
    let infeas = problem.infeasibility(u_feas.view());
    let lower_ok = match mode {
        OptCheckMode::TwoSided => subopt_gap >= -eps,
        OptCheckMode::OneSided => {
            let delta_star = known.delta_star().ok_or_else(|| {
                Error::Config("one-sided optimality check needs f_lower".into())
            })?;
            subopt_gap >= -delta_star - 1e-12
        }
    };
    Ok(OptCheck {
        subopt_gap,
        infeas,
        pass: lower_ok && subopt_gap <= eps && infeas <= eps,
    })
}

// ---- structured problem file (JSON) ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Zero,
    Linear { c: Vec<f64> },
    QuadraticDiag { q: Vec<f64>, c: Vec<f64> },
}

impl From<&Objective> for ObjectiveSpec {
    fn from(o: &Objective) -> Self {
        match o {
            Objective::Zero => ObjectiveSpec::Zero,
            Objective::Linear { c } => ObjectiveSpec::Linear { c: c.to_vec() },
            Objective::QuadDiag { q, c } => {
                ObjectiveSpec::QuadraticDiag { q: q.to_vec(), c: c.to_vec() }
            }
        }
    }
}

impl From<ObjectiveSpec> for Objective {
    fn from(s: ObjectiveSpec) -> Self {
        match s {
            ObjectiveSpec::Zero => Objective::Zero,
            ObjectiveSpec::Linear { c } => Objective::Linear { c: Array1::from_vec(c) },
            ObjectiveSpec::QuadraticDiag { q, c } => Objective::QuadDiag {
                q: Array1::from_vec(q),
                c: Array1::from_vec(c),
            },
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KnownSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_lower: Option<f64>,
}

/// On-disk schema: row-major `G`, explicit dimensions, tagged cone/set
/// trees and optional reference values.
#[derive(Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "G")]
    pub g_mat: Vec<f64>,
    pub g: Vec<f64>,
    pub cone: Cone,
    pub set: SimpleSet,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known: Option<KnownSpec>,
}

impl ProblemFile {
    pub fn from_problem(p: &ConicProblem, known: Option<&KnownSolution>) -> Self {
        ProblemFile {
            n: p.n(),
            m: p.m(),
            g_mat: p.g_mat.iter().cloned().collect(),
            g: p.g_vec.to_vec(),
            cone: p.cone.clone(),
            set: p.set.clone(),
            objective: (&p.objective).into(),
            known: known.map(|k| KnownSpec {
                f_star: Some(k.f_star),
                x_star: k.x_star.clone(),
                f_lower: k.f_lower,
            }),
        }
    }

    pub fn into_problem(self) -> Result<(ConicProblem, Option<KnownSolution>)> {
        if self.g_mat.len() != self.n * self.m {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.m,
                got: self.g_mat.len(),
            });
        }
        let g_mat = Array2::from_shape_vec((self.m, self.n), self.g_mat)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let problem = ConicProblem::new(
            self.objective.into(),
            self.set,
            g_mat,
            Array1::from_vec(self.g),
            self.cone,
        )?;
        let known = self.known.and_then(|k| {
            let r_d = k.x_star.as_ref().map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt());
            k.f_star.map(|f_star| KnownSolution {
                f_star,
                x_star: k.x_star,
                r_d,
                f_lower: k.f_lower,
            })
        });
        Ok((problem, known))
    }
}

pub fn load_problem(path: &str) -> Result<(ConicProblem, Option<KnownSolution>)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    let file: ProblemFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))?;
    file.into_problem()
}

pub fn save_problem(
    path: &str,
    problem: &ConicProblem,
    known: Option<&KnownSolution>,
) -> Result<()> {
    let file = ProblemFile::from_problem(problem, known);
    let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}
