//! Command-line front end: `solve`, `check`, `qphi` and `degree` on
//! problem files.

mod commands;
mod problem;

pub use commands::{cmd_check, cmd_degree, cmd_qphi, cmd_solve};
pub use problem::{require, ProblemFile, ProblemFileError, KEYS};

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::certificates::CertificateError;
use crate::operators::OperatorError;
use crate::solver::SolveError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_DOMAIN: i32 = 5;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "phibvp",
    version,
    about = "Solve and certify phi-Laplacian boundary value problems"
)]
pub struct Cli {
    /// Directory for output files (default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the problem by fixed-point iteration; writes `<stem>.solution.csv` and `<stem>.report.txt`.
    Solve { file: PathBuf },
    /// Check the existence hypotheses; writes `<stem>.certificate.txt`.
    Check { file: PathBuf },
    /// Compute the shift Q_phi(h) for `h` given as an expression of t.
    Qphi { file: PathBuf },
    /// Winding number of the reduced planar map on the circle of radius `rho`.
    Degree { file: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Problem(#[from] ProblemFileError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("hypothesis fails: {0}")]
    Hypothesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Problem(_) | CliError::Usage(_) => EXIT_PARSE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Hypothesis(_) => EXIT_HYPOTHESIS,
            CliError::Solve(e) => match e {
                SolveError::NonConvergence { .. } => EXIT_NONCONVERGENCE,
                SolveError::InvalidSpec(_) | SolveError::Grid(_) => EXIT_PARSE,
                SolveError::Domain { .. }
                | SolveError::Operator { .. }
                | SolveError::OracleFailure(_) => EXIT_DOMAIN,
            },
            CliError::Certificate(e) => match e {
                CertificateError::BoundaryZero { .. } | CertificateError::NonInteger { .. } => {
                    EXIT_HYPOTHESIS
                }
                CertificateError::Eval { .. } | CertificateError::Domain(_) => EXIT_DOMAIN,
                _ => EXIT_PARSE,
            },
            CliError::Operator(_) => EXIT_DOMAIN,
        }
    }
}

/// Reads and parses a problem file.
pub fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(ProblemFile::parse(&text)?)
}

/// Runs one command, printing results to `out` and errors to `err`;
/// returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let (file, result) = match &cli.command {
        Command::Solve { file } => (file, cmd_solve(file, &out_dir, out)),
        Command::Check { file } => (file, cmd_check(file, &out_dir, out)),
        Command::Qphi { file } => (file, cmd_qphi(file, out)),
        Command::Degree { file } => (file, cmd_degree(file, out)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", file.display());
            e.exit_code()
        }
    }
}

/// Entry point for the binary: parses `std::env::args` and runs.
pub fn main_exit_code() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(&cli, &mut stdout.lock(), &mut stderr.lock())
}
