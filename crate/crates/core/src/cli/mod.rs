//! Command-line front end. Parsing and execution live here so that the
//! binary stays a one-liner and tests can drive commands in-process.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad configuration or a failed
//! precondition (including refinement failure), 3 internal inconsistency.

mod commands;
mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::critical_families::FamilyId;
use crate::error::Error;

pub use commands::{run, SpectrumRecord, SweepRow, PerturbRow, VerifyCheck};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "HESSSYM_THREADS";
pub const DEFAULT_K_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    /// Reduced and brute-force spectra at a refined family member.
    Spectrum,
    /// Derivative, symmetry and spectrum consistency checks.
    Verify,
    /// Asymptotic quantities for k, 2k, 4k, ... up to --k-max.
    Sweep,
    /// Clustered spectra after seeded Gaussian perturbations.
    Perturb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "hesssym", version, about = "Hessian spectra at symmetric critical points of a two-layer ReLU student-teacher loss")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[arg(long, global = true, default_value = "global")]
    pub family: FamilyId,
    #[arg(long, global = true, default_value_t = 6)]
    pub k: usize,
    /// Last k of a sweep (sweep only).
    #[arg(long, global = true)]
    pub k_max: Option<usize>,
    /// Input dimension, at least k; defaults to k.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Comma-separated noise levels (perturb only).
    #[arg(long, global = true, value_delimiter = ',', default_value = "0.001")]
    pub sigma: Vec<f64>,
    #[arg(long, global = true, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol_grad: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_spec: f64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Largest k any command accepts; bounds dense eigensolver cost.
    #[arg(long, global = true, default_value_t = DEFAULT_K_CAP)]
    pub k_cap: usize,
}

/// Validated command configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub family: FamilyId,
    pub k: usize,
    /// Equal to `k` except in sweeps.
    pub k_max: usize,
    pub d: usize,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub tol_grad: f64,
    pub tol_spec: f64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl TryFrom<Cli> for RunConfig {
    type Error = Error;

    fn try_from(c: Cli) -> Result<Self, Error> {
        let cfg = |msg: String| Err(Error::Config(msg));
        let min_k = if c.family.is_spurious() { 6 } else { 4 };
        if c.k < min_k {
            return Err(Error::UnsupportedK { family: c.family.to_string(), k: c.k });
        }
        if c.k > c.k_cap {
            return cfg(format!("k = {} exceeds the cap {}", c.k, c.k_cap));
        }
        let k_max = match (c.command, c.k_max) {
            (CommandKind::Sweep, Some(m)) if m < c.k => return cfg(format!("--k-max {m} is below --k {}", c.k)),
            (CommandKind::Sweep, Some(m)) if m > c.k_cap => return cfg(format!("--k-max {m} exceeds the cap {}", c.k_cap)),
            (CommandKind::Sweep, Some(m)) => m,
            (CommandKind::Sweep, None) => return cfg("sweep needs --k-max".into()),
            (_, Some(_)) => return cfg("--k-max applies to sweep only".into()),
            (_, None) => c.k,
        };
        let d = match (c.command, c.d) {
            (CommandKind::Sweep, Some(d)) if d != c.k => return cfg("sweep runs at d = k; drop --d".into()),
            (_, Some(d)) if d < c.k => return cfg(format!("d = {d} is below k = {}", c.k)),
            (_, Some(d)) => d,
            (_, None) => c.k,
        };
        if c.sigma.is_empty() || c.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return cfg("--sigma values must be finite and nonnegative".into());
        }
        if c.trials == 0 {
            return cfg("--trials must be positive".into());
        }
        if !(c.tol_grad > 0.0 && c.tol_spec > 0.0) {
            return cfg("tolerances must be positive".into());
        }
        Ok(RunConfig {
            command: c.command,
            family: c.family,
            k: c.k,
            k_max,
            d,
            sigmas: c.sigma,
            trials: c.trials,
            seed: c.seed,
            tol_grad: c.tol_grad,
            tol_spec: c.tol_spec,
            format: c.format,
            out: c.out,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    CheckFailed = 1,
    Precondition = 2,
    Internal = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Configuration and input problems map to 2, broken internal invariants to 3.
    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::EquivarianceViolation { .. }
            | Error::NotSymmetric(_)
            | Error::LengthMismatch(..)
            | Error::RankDeficientRepresentatives(_)
            | Error::ZeroProbeEntry(_) => ExitStatus::Internal,
            _ => ExitStatus::Precondition,
        }
    }
}

/// Report text and exit status of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub report: String,
}

/// Worker count from [`THREADS_ENV`]; `None` means one per core.
pub fn thread_count() -> Result<Option<usize>, Error> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

/// Runs `cfg` on a pool sized by [`THREADS_ENV`].
pub fn run_with_pool(cfg: &RunConfig) -> Outcome {
    let pool = thread_count().and_then(|n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.unwrap_or(0))
            .build()
            .map_err(|e| Error::Config(e.to_string()))
    });
    match pool {
        Ok(pool) => pool.install(|| run(cfg)),
        Err(e) => Outcome { status: ExitStatus::Precondition, report: format!("error: {e}\n") },
    }
}

/// Parses `args`, runs the command and writes the report to `--out` or stdout.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Precondition.code() } else { 0 };
        }
    };
    let cfg = match RunConfig::try_from(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitStatus::Precondition.code();
        }
    };
    let outcome = run_with_pool(&cfg);
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.report),
        None => std::io::stdout().write_all(outcome.report.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitStatus::Precondition.code();
    }
    if outcome.status != ExitStatus::Success {
        eprintln!("hesssym: exit {}", outcome.status.code());
    }
    outcome.status.code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, Error> {
        let cli = Cli::try_parse_from(std::iter::once("hesssym").chain(args.iter().copied())).unwrap();
        RunConfig::try_from(cli)
    }

    #[test]
    fn defaults() {
        let c = parse(&["spectrum"]).unwrap();
        assert_eq!((c.family, c.k, c.d, c.k_max), (FamilyId::GlobalMin, 6, 6, 6));
        assert_eq!(c.tol_grad, 1e-12);
        assert_eq!(c.tol_spec, 1e-8);
        assert_eq!(c.format, OutputFormat::Csv);
    }

    #[test]
    fn flags_after_or_before_subcommand() {
        let c = parse(&["--family", "typeII", "perturb", "--k", "8", "--sigma", "0,1e-3", "--format", "json"]).unwrap();
        assert_eq!(c.family, FamilyId::TypeII);
        assert_eq!(c.sigmas, vec![0.0, 1e-3]);
        assert_eq!(c.format, OutputFormat::Json);
    }

    #[test]
    fn rejections() {
        assert!(matches!(parse(&["verify", "--family", "typeII", "--k", "5"]), Err(Error::UnsupportedK { .. })));
        assert!(parse(&["spectrum", "--k", "8", "--d", "7"]).is_err());
        assert!(parse(&["sweep", "--k", "8"]).is_err());
        assert!(parse(&["sweep", "--k", "8", "--k-max", "128"]).is_err());
        assert!(parse(&["spectrum", "--k-max", "8"]).is_err());
        assert!(parse(&["perturb", "--sigma=-1"]).is_err());
        assert!(parse(&["spectrum", "--k", "80"]).is_err());
        assert!(parse(&["spectrum", "--k", "80", "--k-cap", "100"]).is_ok());
    }

    #[test]
    fn exit_status_mapping() {
        assert_eq!(ExitStatus::for_error(&Error::UnsupportedK { family: "typeII".into(), k: 5 }), ExitStatus::Precondition);
        assert_eq!(
            ExitStatus::for_error(&Error::EquivarianceViolation { component: "t".into(), residual: 1.0 }),
            ExitStatus::Internal
        );
    }
}
