//! Command-line front end: argument parsing, file loading and report
//! rendering. [`run_cli`] is the whole program; `main` only wires it to the
//! process.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bnsentinel::{BayesNet, Error, EvidenceItem};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod render;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IMPOSSIBLE: i32 = 2;
pub const EXIT_ALERT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "bnsentinel",
    version,
    about = "Bayesian-network inference with conflict, surprise and rebuttal monitoring"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: OutputFormat,
    /// Seed for commands that sample.
    #[arg(long, env = "BNSENTINEL_SEED", default_value_t = 0, global = true)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Thresholds {
    /// Alert when conflict exceeds this many bits.
    #[arg(long, default_value_t = 3.0)]
    conflict_bits: f64,
    /// Alert when a rebuttal's posterior odds exceed this value.
    #[arg(long, default_value_t = 1.0)]
    rebuttal_odds: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a network file.
    Validate { network: PathBuf },
    /// Absorb an evidence stream and print posteriors.
    Infer {
        network: PathBuf,
        /// Evidence stream (JSON Lines); omit for prior marginals.
        #[arg(long)]
        evidence: Option<PathBuf>,
        /// Comma-separated variables to report (default: all).
        #[arg(long, value_delimiter = ',')]
        query: Vec<String>,
    },
    /// Absorb evidence item by item, tracing conflict and rebuttal odds.
    Monitor {
        network: PathBuf,
        #[arg(long)]
        evidence: PathBuf,
        #[command(flatten)]
        thresholds: Thresholds,
        /// Exit with code 3 when any alert fires.
        #[arg(long)]
        fail_on_alert: bool,
    },
    /// Rank rare-hypothesis explanations and discriminating observables.
    Diagnose {
        network: PathBuf,
        #[arg(long)]
        evidence: PathBuf,
        /// Comma-separated candidate variables to explain the evidence.
        #[arg(long, value_delimiter = ',', required = true)]
        candidates: Vec<String>,
        /// Observables to score (default: every unobserved variable).
        #[arg(long, value_delimiter = ',')]
        observables: Vec<String>,
    },
    /// Exact surprise tail probabilities against the 2^-K bound.
    #[command(name = "verify-theorem1")]
    VerifyTailBound {
        network: PathBuf,
        /// Explicit straw table (default: independence of priors).
        #[arg(long)]
        straw: Option<PathBuf>,
        /// Comma-separated thresholds in bits.
        #[arg(long = "K", value_delimiter = ',', required = true)]
        k: Vec<f64>,
        /// Evidence scope (default: the straw's scope, or every variable).
        #[arg(long, value_delimiter = ',')]
        scope: Vec<String>,
    },
    /// Rebuild the two-variable example tables.
    #[command(name = "reproduce-figure1")]
    ReproduceWorkedExample,
    /// Draw ancestral samples as JSON Lines.
    Sample {
        network: PathBuf,
        #[arg(short = 'n', long, default_value_t = 10)]
        count: usize,
    },
}

/// Resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub network_path: Option<PathBuf>,
    pub evidence_path: Option<PathBuf>,
    pub straw_path: Option<PathBuf>,
    pub conflict_bits: f64,
    pub rebuttal_odds: f64,
    pub seed: u64,
    pub format: OutputFormat,
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("conflict-bits", self.conflict_bits),
            ("rebuttal-odds", self.rebuttal_odds),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!(
                    "--{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
pub(crate) enum CliError {
    Core(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::ImpossibleEvidence(_)) => EXIT_IMPOSSIBLE,
            _ => EXIT_INVALID,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(Error::ImpossibleEvidence(m)) => format!("impossible evidence: {m}"),
            CliError::Core(e) => format!("validation error: {e}"),
            CliError::Io(m) => format!("i/o error: {m}"),
            CliError::Usage(m) => format!("usage error: {m}"),
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn load_network(path: &Path) -> Result<BayesNet, CliError> {
    Ok(bnsentinel::parse_network(&read_file(path)?)?)
}

pub(crate) fn load_evidence(path: Option<&Path>) -> Result<Vec<EvidenceItem>, CliError> {
    match path {
        Some(p) => Ok(bnsentinel::parse_evidence_stream(&read_file(p)?)?),
        None => Ok(Vec::new()),
    }
}

/// Outcome of a command that ran to completion.
pub(crate) struct Finished {
    pub body: String,
    pub alert: bool,
}

/// Runs the program with `args` (including the program name), writing
/// reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_INVALID
                }
            };
        }
    };

    let (network_path, evidence_path, straw_path, thresholds) = match &cli.command {
        Command::Validate { network } | Command::Sample { network, .. } => {
            (Some(network.clone()), None, None, None)
        }
        Command::Infer {
            network, evidence, ..
        } => (Some(network.clone()), evidence.clone(), None, None),
        Command::Monitor {
            network,
            evidence,
            thresholds,
            ..
        } => (
            Some(network.clone()),
            Some(evidence.clone()),
            None,
            Some(thresholds),
        ),
        Command::Diagnose {
            network, evidence, ..
        } => (Some(network.clone()), Some(evidence.clone()), None, None),
        Command::VerifyTailBound { network, straw, .. } => {
            (Some(network.clone()), None, straw.clone(), None)
        }
        Command::ReproduceWorkedExample => (None, None, None, None),
    };
    let config = RunConfig {
        network_path,
        evidence_path,
        straw_path,
        conflict_bits: thresholds.map_or(3.0, |t| t.conflict_bits),
        rebuttal_odds: thresholds.map_or(1.0, |t| t.rebuttal_odds),
        seed: cli.seed,
        format: cli.format,
    };

    let result = config.validate().and_then(|()| match &cli.command {
        Command::Validate { .. } => commands::validate(&config),
        Command::Infer { query, .. } => commands::infer(&config, query),
        Command::Monitor { fail_on_alert, .. } => commands::monitor(&config).map(|f| Finished {
            alert: f.alert && *fail_on_alert,
            ..f
        }),
        Command::Diagnose {
            candidates,
            observables,
            ..
        } => commands::diagnose(&config, candidates, observables),
        Command::VerifyTailBound { k, scope, .. } => commands::verify_tail_bound(&config, k, scope),
        Command::ReproduceWorkedExample => commands::reproduce_worked_example(&config),
        Command::Sample { count, .. } => commands::sample(&config, *count),
    });

    match result {
        Ok(done) => {
            let _ = write!(out, "{}", done.body);
            if done.alert {
                let _ = writeln!(err, "alert: threshold crossed");
                EXIT_ALERT
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "{}", e.message());
            e.exit_code()
        }
    }
}
