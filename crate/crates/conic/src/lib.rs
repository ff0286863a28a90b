//! First-order methods for conic convex programs over simple sets, with
//! projection-count accounting for complexity experiments.

pub mod auglag;
pub mod bench;
pub mod cones;
pub mod error;
pub mod icfg;
pub mod nsmooth;
pub mod penalty;
pub mod problem;
pub mod report;

pub use bench::{
    emit_csv, fit_slope, make_instance, read_csv, sweep_run, SlopeField, SweepRecord,
};
pub use cones::{Cone, SimpleSet};
pub use error::{Error, Result};
pub use report::{OuterRecord, SolveReport};
pub use problem::{
    check_eps_optimal, load_problem, prox_simple, save_problem, ConicProblem, Counters,
    KnownSolution, Objective, OptCheck, OptCheckMode, ProblemFile,
};
