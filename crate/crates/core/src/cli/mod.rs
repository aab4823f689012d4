//! The `hvp` command-line front end.
//!
//! Every subcommand accepts either a strict JSON `--config` or flags that
//! build the same configuration. Reports go to stdout as JSON (and to
//! `--report` when given); fields are exported as CSV.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure,
//! 64 usage error.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::energy::ParameterStrategy;
use crate::error::Error;
use crate::study::Reference;
use config::{
    load, CoercivityConfig, ConvergenceConfig, DomainConfig, FieldCase, IdentitiesConfig, OracleCase,
    OracleConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Json(_) => EXIT_USAGE,
        Error::SolveFailure(_) | Error::SingularSystem | Error::Diverged { .. } => EXIT_NUMERICAL,
        Error::InvalidDomain(_)
        | Error::NonStarShaped(_)
        | Error::InvalidParams(_)
        | Error::NoAdmissibleAlpha(_)
        | Error::IncompatibleMesh { .. }
        | Error::Io(_) => EXIT_VALIDATION,
    }
}

#[derive(Debug, Parser)]
#[command(name = "hvp", version, about = "Coercive variational principles for the impedance Helmholtz problem")]
pub struct Cli {
    /// Record the run as deterministic. Reductions always use fixed-order
    /// chunked sums, so results do not depend on the thread count.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the Rellich and low-order Morawetz identities on closed-form fields.
    VerifyIdentities(IdentitiesArgs),
    /// Parameter pack, coercivity coefficients and thresholds.
    CoercivityReport(CoercivityArgs),
    /// Assemble and solve the H²-conforming Galerkin system.
    FemSolve(ConfigArg),
    /// Train the plane-wave network.
    NnTrain(ConfigArg),
    /// Export a 1D analytic reference solution.
    Oracle(OracleArgs),
    /// 1D convergence table against an analytic reference.
    ConvergenceStudy(ConvergenceArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DomainArg {
    Interval,
    Square,
    Cube,
}

impl DomainArg {
    fn dim(self) -> usize {
        match self {
            Self::Interval => 1,
            Self::Square => 2,
            Self::Cube => 3,
        }
    }
}

fn domain_from(dim: Option<usize>, domain: Option<DomainArg>) -> Result<DomainConfig, Error> {
    let d = match (dim, domain) {
        (Some(d), Some(a)) if d != a.dim() => {
            return Err(Error::Config(format!("--dim {d} conflicts with --domain {a:?}")));
        }
        (Some(d), _) => d,
        (None, Some(a)) => a.dim(),
        (None, None) => 2,
    };
    if !(1..=3).contains(&d) {
        return Err(Error::Config(format!("--dim must be 1, 2 or 3 (got {d})")));
    }
    Ok(DomainConfig::unit(d))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CaseArg {
    Constant,
    Linear,
    Polynomial,
    PlaneWave,
    Gaussian,
    All,
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub case: CaseArg,
    #[arg(long, default_value_t = 5.0)]
    pub k: f64,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub quad_order: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Recommended,
    Rule,
}

#[derive(Debug, Args)]
pub struct CoercivityArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, value_enum, default_value = "recommended")]
    pub strategy: StrategyArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OracleCaseArg {
    #[value(name = "1d-constant")]
    Constant1d,
    #[value(name = "1d-minimiser")]
    Minimiser1d,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "1d-constant")]
    pub case: OracleCaseArg,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub k: f64,
    #[arg(long, default_value_t = 1.0)]
    pub f: f64,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long)]
    pub gamma2: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReferenceArg {
    Exact,
    Minimiser,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub k: f64,
    /// Cells per unit length, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128")]
    pub cells: Vec<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    pub reference: ReferenceArg,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub quad_order: Option<usize>,
}

fn or_load<T: serde::de::DeserializeOwned>(
    path: &Option<PathBuf>,
    build: impl FnOnce() -> Result<T, Error>,
) -> Result<T, Error> {
    match path {
        Some(p) => load(p),
        None => build(),
    }
}

fn execute(cli: &Cli) -> Result<commands::Report, Error> {
    let det = cli.deterministic;
    match &cli.command {
        Command::VerifyIdentities(a) => {
            let mut cfg: IdentitiesConfig = or_load(&a.config, || {
                Ok(IdentitiesConfig {
                    domain: domain_from(a.dim, a.domain)?,
                    case: match a.case {
                        CaseArg::Constant => FieldCase::Constant,
                        CaseArg::Linear => FieldCase::Linear,
                        CaseArg::Polynomial => FieldCase::Polynomial,
                        CaseArg::PlaneWave => FieldCase::PlaneWave,
                        CaseArg::Gaussian => FieldCase::Gaussian,
                        CaseArg::All => FieldCase::All,
                    },
                    k: a.k,
                    beta: a.beta,
                    tolerance: 1e-9,
                    seed: 0,
                    deterministic: false,
                    quad_order: a.quad_order,
                })
            })?;
            cfg.deterministic |= det;
            commands::verify_identities(&cfg)
        }
        Command::CoercivityReport(a) => {
            let mut cfg: CoercivityConfig = or_load(&a.config, || {
                Ok(CoercivityConfig {
                    domain: domain_from(a.dim, a.domain)?,
                    k: a.k,
                    strategy: match a.strategy {
                        StrategyArg::Recommended => ParameterStrategy::Recommended,
                        StrategyArg::Rule => ParameterStrategy::Rule,
                    },
                    params: None,
                    seed: 0,
                    deterministic: false,
                    quad_order: None,
                })
            })?;
            cfg.deterministic |= det;
            commands::coercivity_report(&cfg)
        }
        Command::FemSolve(a) => {
            let mut cfg: config::FemSolveConfig = load(&a.config)?;
            cfg.deterministic |= det;
            commands::fem_solve(&cfg)
        }
        Command::NnTrain(a) => {
            let mut cfg: config::NnTrainConfig = load(&a.config)?;
            cfg.deterministic |= det;
            commands::nn_train(&cfg)
        }
        Command::Oracle(a) => {
            let mut cfg: OracleConfig = or_load(&a.config, || {
                Ok(OracleConfig {
                    case: match a.case {
                        OracleCaseArg::Constant1d => OracleCase::Constant1d,
                        OracleCaseArg::Minimiser1d => OracleCase::Minimiser1d,
                    },
                    k: a.k,
                    f: a.f,
                    domain: DomainConfig::unit(1),
                    gamma1: a.gamma1,
                    gamma2: a.gamma2,
                    points: a.points,
                    export: a.export.clone(),
                    seed: 0,
                    deterministic: false,
                    quad_order: None,
                })
            })?;
            cfg.deterministic |= det;
            commands::oracle(&cfg)
        }
        Command::ConvergenceStudy(a) => {
            let mut cfg: ConvergenceConfig = or_load(&a.config, || {
                Ok(ConvergenceConfig {
                    k: a.k,
                    f: 1.0,
                    cells: a.cells.clone(),
                    reference: match a.reference {
                        ReferenceArg::Exact => Reference::Exact,
                        ReferenceArg::Minimiser => Reference::Minimiser,
                    },
                    mode: crate::fem::PenaltyMode::Energy,
                    params: None,
                    csv: a.csv.clone(),
                    seed: 0,
                    deterministic: false,
                    quad_order: a.quad_order,
                })
            })?;
            cfg.deterministic |= det;
            commands::convergence(&cfg)
        }
    }
}

/// Caps the worker pool at `HVP_THREADS` when set.
fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("HVP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("HVP_THREADS must be a positive integer (got {v:?})")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    match execute(&cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.body).expect("report serialises");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if let Some(path) = &cli.report {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_VALIDATION;
                }
            }
            if report.passed {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::SingularSystem), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::InvalidParams("x".into())), EXIT_VALIDATION);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["hvp", "no-such-command"]), EXIT_USAGE);
        assert_eq!(run(["hvp", "coercivity-report", "--dim", "2", "--domain", "cube"]), EXIT_USAGE);
        assert_eq!(run(["hvp", "fem-solve", "--config", "/nonexistent/run.json"]), EXIT_USAGE);
    }

    #[test]
    fn coercivity_succeeds() {
        assert_eq!(run(["hvp", "coercivity-report", "--dim", "2"]), EXIT_OK);
    }
}
