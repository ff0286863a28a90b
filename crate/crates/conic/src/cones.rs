//! Closed convex cones and simple sets with exact Euclidean projections.
//!
//! Polar-cone projections are obtained through the Moreau decomposition
//! `v = [v]_K + [v]_{K*}` rather than per-variant formulas, so a single
//! projection routine backs all three operations (cone, polar, distance).

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonempty closed convex cone.
///
/// Second-order cones order their coordinates as `(x, t)` with the scalar
/// `t` last, i.e. `{(x, t) : ||x|| <= t}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cone {
    Zero { dim: usize },
    NonnegOrthant { dim: usize },
    SecondOrder { dim: usize },
    Product { parts: Vec<Cone> },
}

impl Cone {
    pub fn dim(&self) -> usize {
        match self {
            Cone::Zero { dim } | Cone::NonnegOrthant { dim } | Cone::SecondOrder { dim } => *dim,
            Cone::Product { parts } => parts.iter().map(Cone::dim).sum(),
        }
    }

    fn check_dim(&self, v: ArrayView1<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.check_dim(v)?;
        Ok(self.project_unchecked(v))
    }

    fn project_unchecked(&self, v: ArrayView1<f64>) -> Array1<f64> {
        match self {
            Cone::Zero { dim } => Array1::zeros(*dim),
            Cone::NonnegOrthant { .. } => v.mapv(|x| x.max(0.0)),
            Cone::SecondOrder { dim } => project_soc(v, *dim),
            Cone::Product { parts } => {
                let mut out = Array1::zeros(v.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    let block = part.project_unchecked(v.slice(ndarray::s![offset..offset + d]));
                    out.slice_mut(ndarray::s![offset..offset + d]).assign(&block);
                    offset += d;
                }
                out
            }
        }
    }

    /// Projection onto the polar cone `K* = {v : <v,k> <= 0 for all k in K}`,
    /// computed as the Moreau residual `v - [v]_K`.
    pub fn project_polar(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        let p = self.project(v)?;
        Ok(&v.to_owned() - &p)
    }

    /// Euclidean distance to the cone.
    pub fn dist(&self, v: ArrayView1<f64>) -> Result<f64> {
        let p = self.project(v)?;
        Ok(norm2(&(&v.to_owned() - &p)))
    }
}

/// SOC projection, standard three-case closed form. The boundary case
/// `||x|| = |t|` is resolved by the interior branch (continuous limit).
fn project_soc(v: ArrayView1<f64>, dim: usize) -> Array1<f64> {
    if dim == 1 {
        // degenerate SOC is the nonnegative ray
        return v.mapv(|x| x.max(0.0));
    }
    let t = v[dim - 1];
    let x = v.slice(ndarray::s![..dim - 1]);
    let nx = norm2(&x.to_owned());
    if nx <= t {
        return v.to_owned();
    }
    if nx <= -t {
        return Array1::zeros(dim);
    }
    let scale = (nx + t) / 2.0;
    let mut out = Array1::zeros(dim);
    if nx > 0.0 {
        for i in 0..dim - 1 {
            out[i] = scale * x[i] / nx;
        }
    }
    out[dim - 1] = scale;
    out
}

/// A simple convex set with closed-form (or 1-D root-finding) projection.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SimpleSet {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{(u1, u2) : |u2|^p <= u1}` in the plane, `p >= 1`.
    PPowerEpigraph {
        p: f64,
    },
    FullSpace {
        dim: usize,
    },
}

impl SimpleSet {
    pub fn dim(&self) -> usize {
        match self {
            SimpleSet::Box { lower, .. } => lower.len(),
            SimpleSet::Ball { center, .. } => center.len(),
            SimpleSet::PPowerEpigraph { .. } => 2,
            SimpleSet::FullSpace { dim } => *dim,
        }
    }

    /// Diameter `D_U`; `f64::INFINITY` for unbounded variants.
    pub fn diameter(&self) -> f64 {
        match self {
            SimpleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) * (u - l))
                .sum::<f64>()
                .sqrt(),
            SimpleSet::Ball { radius, .. } => 2.0 * radius,
            SimpleSet::PPowerEpigraph { .. } | SimpleSet::FullSpace { .. } => f64::INFINITY,
        }
    }

    fn check_dim(&self, v: ArrayView1<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, v: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.check_dim(v)?;
        match self {
            SimpleSet::Box { lower, upper } => Ok(Array1::from_iter(
                v.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&x, (&l, &u))| x.clamp(l, u)),
            )),
            SimpleSet::Ball { center, radius } => {
                let c = Array1::from_vec(center.clone());
                let d = &v.to_owned() - &c;
                let nd = norm2(&d);
                if nd <= *radius {
                    Ok(v.to_owned())
                } else {
                    Ok(&c + &(d * (*radius / nd)))
                }
            }
            SimpleSet::PPowerEpigraph { p } => project_power_epigraph(*p, v[0], v[1]),
            SimpleSet::FullSpace { .. } => Ok(v.to_owned()),
        }
    }

    /// A canonical interior-ish point used as prox center / start iterate.
    pub fn center(&self) -> Array1<f64> {
        match self {
            SimpleSet::Box { lower, upper } => Array1::from_iter(
                lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)),
            ),
            SimpleSet::Ball { center, .. } => Array1::from_vec(center.clone()),
            SimpleSet::PPowerEpigraph { .. } => Array1::zeros(2),
            SimpleSet::FullSpace { dim } => Array1::zeros(*dim),
        }
    }
}

/// Projection onto `{(u1,u2) : |u2|^p <= u1}` by safeguarded 1-D root
/// finding on the boundary stationarity condition: bisection bracketed on
/// `u2 in [-(||v||+1), ||v||+1]`, then Newton polish to 1e-12.
fn project_power_epigraph(p: f64, v1: f64, v2: f64) -> Result<Array1<f64>> {
    if p < 1.0 {
        return Err(Error::parameter(format!("power epigraph requires p >= 1, got {p}")));
    }
    if v2.abs().powf(p) <= v1 {
        return Ok(Array1::from_vec(vec![v1, v2]));
    }
    // Projection lies on the boundary u1 = |u2|^p. Stationarity of
    // (|u2|^p - v1)^2 + (u2 - v2)^2 in u2:
    let grad = |u2: f64| -> f64 {
        let a = u2.abs().powf(p);
        let da = if u2 == 0.0 {
            if p > 1.0 {
                0.0
            } else {
                u2.signum()
            }
        } else {
            p * u2.abs().powf(p - 1.0) * u2.signum()
        };
        (a - v1) * da + (u2 - v2)
    };
    let r = (v1 * v1 + v2 * v2).sqrt() + 1.0;
    let (mut lo, mut hi) = (-r, r);
    let (glo, ghi) = (grad(lo), grad(hi));
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::numerical(format!(
            "power epigraph projection bracket invalid at p={p}, v=({v1},{v2})"
        )));
    }
    let mut mid = 0.0;
    let mut converged = false;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let g = grad(mid);
        if g.abs() < 1e-14 || (hi - lo) < 1e-12 {
            converged = true;
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged {
        return Err(Error::numerical(format!(
            "power epigraph projection did not converge for p={p}, v=({v1},{v2})"
        )));
    }
    // Newton polish on the stationarity condition.
    let mut u2 = mid;
    for _ in 0..8 {
        let g = grad(u2);
        let h = numeric_second(&grad, u2);
        if h.abs() < 1e-30 {
            break;
        }
        let step = g / h;
        let next = u2 - step;
        if next < -r || next > r || !next.is_finite() {
            break;
        }
        u2 = next;
        if step.abs() < 1e-14 {
            break;
        }
    }
    Ok(Array1::from_vec(vec![u2.abs().powf(p), u2]))
}

fn numeric_second(grad: &dyn Fn(f64) -> f64, u: f64) -> f64 {
    let h = 1e-7 * (1.0 + u.abs());
    (grad(u + h) - grad(u - h)) / (2.0 * h)
}

/// Gradient of `u -> 1/2 dist_K(Gu+g)^2`, namely `G^T (Gu+g - [Gu+g]_K)`.
/// Lipschitz with constant `||G||^2`.
pub fn half_sq_dist_grad(
    g_mat: &ndarray::Array2<f64>,
    g_vec: ArrayView1<f64>,
    cone: &Cone,
    u: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    if g_mat.ncols() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: g_mat.ncols(),
            got: u.len(),
        });
    }
    if g_mat.nrows() != g_vec.len() || g_mat.nrows() != cone.dim() {
        return Err(Error::DimensionMismatch {
            expected: g_mat.nrows(),
            got: g_vec.len(),
        });
    }
    let w = g_mat.dot(&u) + &g_vec;
    let resid = &w - &cone.project(w.view())?;
    Ok(g_mat.t().dot(&resid))
}

pub(crate) fn norm2(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}
