//! Per-run solve reports shared by every method and the benchmark harness.

use serde::{Deserialize, Serialize};

use crate::problem::Counters;

/// Snapshot taken after one outer iteration; counters are cumulative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OuterRecord {
    pub k: usize,
    pub infeas: f64,
    pub f_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subopt: Option<f64>,
    pub counters: Counters,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: String,
    pub primal: Vec<f64>,
    pub outer_iters: usize,
    pub counters: Counters,
    pub history: Vec<OuterRecord>,
    pub final_infeas: f64,
    pub final_f_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_subopt: Option<f64>,
    pub converged: bool,
    /// Final penalty parameter for the adaptive penalty schemes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_final: Option<f64>,
    /// Final smoothing parameter for the adaptive augmented Lagrangian.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_final: Option<f64>,
    pub wall_ms: f64,
}
