//! Command-line front end: one-shot solves on problem files, ε-sweep
//! benchmarks on generated instances, and slope fitting on sweep CSVs.

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array1;

use conic::auglag::{
    a_ial_run_with, ial_run, optimal_params_auglag, AugLagConfig, InnerPath, ParamVariant,
};
use conic::bench::{emit_csv, fit_slope, make_instance, read_csv, sweep_run, SlopeField};
use conic::icfg::ThetaSchedule;
use conic::nsmooth::{ns_outer_count, ns_params, ns_run, NsConfig};
use conic::penalty::{a_pm_run_with, penalty_params, penalty_run, PenaltyConfig, PenaltyKind};
use conic::problem::{load_problem, ConicProblem, KnownSolution};
use conic::report::SolveReport;
use conic::Error;

#[derive(Parser)]
#[command(name = "conic", about = "First-order conic solvers with projection accounting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Ial,
    Fial,
    Aial,
    Ns,
    Qp,
    Np,
    Apm,
}

impl Method {
    fn id(self) -> &'static str {
        match self {
            Method::Ial => "ial",
            Method::Fial => "fial",
            Method::Aial => "aial",
            Method::Ns => "ns",
            Method::Qp => "qp",
            Method::Np => "np",
            Method::Apm => "apm",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file to accuracy eps.
    Solve {
        #[arg(long)]
        problem: String,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        eps: f64,
        /// Multiplier-radius bound (overrides the problem file's value).
        #[arg(long)]
        rd: Option<f64>,
        /// Smoothing parameter override.
        #[arg(long)]
        mu: Option<f64>,
        /// Inner accuracy override.
        #[arg(long)]
        delta: Option<f64>,
        /// Penalty parameter override.
        #[arg(long)]
        rho: Option<f64>,
        /// Initial smoothing for the adaptive Lagrangian method.
        #[arg(long)]
        mu0: Option<f64>,
        /// Initial penalty for the adaptive penalty method.
        #[arg(long)]
        rho0: Option<f64>,
        /// Outer iteration override.
        #[arg(long)]
        kouter: Option<usize>,
        /// Write the solve report as JSON.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run an eps sweep on a generated instance and write a CSV.
    Bench {
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_delimiter = ',')]
        eps_list: Vec<f64>,
        #[arg(long)]
        out: String,
    },
    /// Fit the scaling exponent of a count column against 1/eps.
    Slope {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        field: String,
    },
}

fn known_rd(rd_flag: Option<f64>, known: &Option<KnownSolution>) -> Result<f64, Error> {
    rd_flag.or_else(|| known.as_ref().and_then(|k| k.r_d)).ok_or_else(|| {
        Error::parameter("method needs a multiplier-radius bound: pass --rd or embed it in the problem file")
    })
}

#[allow(clippy::too_many_arguments)]
fn run_solve(
    problem: &ConicProblem,
    known: &Option<KnownSolution>,
    method: Method,
    eps: f64,
    rd: Option<f64>,
    mu: Option<f64>,
    delta: Option<f64>,
    rho: Option<f64>,
    mu0: Option<f64>,
    rho0: Option<f64>,
    kouter: Option<usize>,
) -> Result<SolveReport, Error> {
    if eps <= 0.0 {
        return Err(Error::parameter(format!("eps must be positive, got {eps}")));
    }
    let f_star = known.as_ref().map(|k| k.f_star);
    let l_f = problem.objective.l_f();
    let norm_g = problem.norm_g();
    match method {
        Method::Ial | Method::Fial => {
            let r_d = known_rd(rd, known)?;
            let variant =
                if method == Method::Ial { ParamVariant::Gradient } else { ParamVariant::Fast };
            let (mu_def, delta_def) = optimal_params_auglag(variant, eps, r_d, l_f, norm_g)?;
            let mu = mu.unwrap_or(mu_def);
            let delta = delta.unwrap_or(delta_def);
            let l_d = 1.0 / mu;
            let (schedule, outer_def) = match variant {
                // outer budgets sized so each trajectory-bound term is
                // driven below eps
                ParamVariant::Gradient => {
                    (ThetaSchedule::Constant, (8.0 * l_d * r_d / eps).ceil() as usize)
                }
                ParamVariant::Fast => {
                    (ThetaSchedule::Accelerated, (32.0 * l_d * r_d / eps).sqrt().ceil() as usize)
                }
            };
            let mut config =
                AugLagConfig::new(mu, delta, kouter.unwrap_or(outer_def.max(1)), schedule);
            config.f_star = f_star;
            ial_run(problem, &config)
        }
        Method::Aial => a_ial_run_with(problem, mu0.unwrap_or(1.0), eps, InnerPath::Auto, f_star),
        Method::Ns => {
            let r_d = known_rd(rd, known)?;
            let k_outer = match kouter {
                Some(k) => k,
                None => ns_outer_count(eps, norm_g, problem.d_u(), r_d)?,
            };
            let (mu_def, delta_def) = ns_params(k_outer, norm_g, r_d, problem.d_u(), eps)?;
            let mut config = NsConfig::new(mu.unwrap_or(mu_def), delta.unwrap_or(delta_def), k_outer);
            config.f_star = f_star;
            ns_run(problem, &config)
        }
        Method::Qp | Method::Np => {
            let kind = if method == Method::Qp { PenaltyKind::D } else { PenaltyKind::N };
            let delta_star = known.as_ref().and_then(|k| k.delta_star());
            let (rho, mu_smooth) = match rho {
                Some(r) => (r, if kind == PenaltyKind::N { Some(mu.unwrap_or(eps / 2.0)) } else { None }),
                None => {
                    let ds = delta_star.ok_or_else(|| {
                        Error::parameter(
                            "penalty parameters need a known objective spread: pass --rho or embed f_star and f_lower",
                        )
                    })?;
                    let params = penalty_params(kind, eps, ds)?;
                    (params.rho, params.mu_smooth.or(mu))
                }
            };
            let mut config = PenaltyConfig::new(kind, rho);
            config.mu_smooth = mu_smooth;
            config.delta_star = delta_star;
            config.iters = kouter;
            config.f_star = f_star;
            if kouter.is_none() && delta_star.is_none() {
                return Err(Error::parameter(
                    "penalty iteration budget needs a known objective spread: pass --kouter or embed f_star and f_lower",
                ));
            }
            penalty_run(problem, &config, eps)
        }
        Method::Apm => {
            let kind = PenaltyKind::D;
            a_pm_run_with(problem, rho0.unwrap_or(1.0), eps, kind, f_star)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve { problem, method, eps, rd, mu, delta, rho, mu0, rho0, kouter, out } => {
            let (prob, known) = load_problem(&problem)?;
            let report =
                run_solve(&prob, &known, method, eps, rd, mu, delta, rho, mu0, rho0, kouter)?;
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Parse(format!("report serialization failed: {e}")))?;
                std::fs::write(&path, json).map_err(|source| Error::Io { path, source })?;
            }
            let u = Array1::from_vec(report.primal.clone());
            println!(
                "method={} outer_iters={} f={:.9e} infeas={:.3e} proj_U={} proj_K={} proj_Kstar={}",
                report.method,
                report.outer_iters,
                prob.f_value(u.view()),
                report.final_infeas,
                report.counters.proj_u,
                report.counters.proj_k,
                report.counters.proj_kstar,
            );
            Ok(())
        }
        Command::Bench { instance, p, n, seed, method, eps_list, out } => {
            let (prob, known) = make_instance(&instance, n, p, seed)?;
            let records = sweep_run(&prob, &known, method.id(), &eps_list)?;
            emit_csv(&records, &out)?;
            println!("wrote {} records to {out}", records.len());
            Ok(())
        }
        Command::Slope { input, field } => {
            let field: SlopeField = field.parse()?;
            let records = read_csv(&input)?;
            let slope = fit_slope(&records, field)?;
            println!("{slope:.6}");
            Ok(())
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Parse(_) => 4,
        Error::NonConvergence(_) | Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
