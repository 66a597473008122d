use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use potts_ghs::GhsError;

mod commands;
mod report;

use report::{Report, Timing};

#[derive(Debug, Parser)]
#[command(name = "potts-ghs", version, about = "Exact checks of field-derivative signs in the ferromagnetic Potts model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Number of physical sites N.
    #[arg(long, global = true, default_value_t = 3)]
    pub n_sites: usize,
    /// Number of states r.
    #[arg(long = "r", global = true)]
    pub r: Option<u32>,
    /// Range of r, either "lo..hi" (inclusive) or a comma list.
    #[arg(long, global = true)]
    pub r_range: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 10)]
    pub trials: u64,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Model file; replaces the random instances where a command uses one.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationMode {
    Exhaustive,
    RandomEval,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Sign of I (or of the second derivative in float mode) on random instances.
    VerifyGhs,
    /// Second derivative of m_i in B_j, B_k by two independent routes.
    Derivative {
        /// Site triple i,j,k.
        #[arg(long, default_value = "1,2,3")]
        sites: String,
        /// Finite-difference step (float mode).
        #[arg(long, default_value_t = potts_ghs::derivatives::DEFAULT_STEP)]
        h: f64,
    },
    /// Expansion of I in the pair variables X_p.
    Expand {
        /// Expand only in the last s pair variables.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Compares the factored form of I with a direct computation.
    SeparationCheck {
        #[arg(long, value_enum)]
        check_mode: Option<SeparationMode>,
    },
    /// The table of coefficients alpha(x,y,z) and its sign pattern.
    AlphaTable {
        /// Compare each class with the published closed forms.
        #[arg(long)]
        compare_paper: bool,
    },
    /// Sign of I and the ghost-bridge identity over a range of N and r.
    Sweep,
}

/// Errors that end a run early, with their exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Capacity(String),
}

impl From<GhsError> for Failure {
    fn from(e: GhsError) -> Self {
        match e {
            GhsError::Capacity(_) => Failure::Capacity(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = commands::run(&cli.command, &cli.common);
    let (checks, findings) = match outcome {
        Ok(v) => v,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Capacity(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let report = Report {
        tool: "potts-ghs",
        version: env!("CARGO_PKG_VERSION"),
        config: serde_json::json!({ "command": &cli.command, "options": &cli.common }),
        checks,
        findings,
        timing: Timing {
            elapsed_ms: start.elapsed().as_millis(),
        },
    };
    print!("{}", report.summary());
    if let Some(path) = &cli.common.output {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
