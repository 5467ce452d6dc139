//! Command-line frontend.
//!
//! Exit codes: `0` success, `1` domain error (invalid or degenerate model,
//! unsatisfiable constraints, a failed prediction check), `2` usage, parse
//! and I/O errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::conditions::{classify, verify, ConditionReport, VerificationResult};
use crate::error::Error;
use crate::estimate::{ingest, plugin_estimates};
use crate::model::{read_model_file, DiscreteModel};
use crate::sampler::{run_experiment, write_csv, ExperimentConfig};
use crate::search::{report, Proposition, SearchConfig};
use crate::sem::{OrderingCheck, PathModel, SemCoefficients, SemEstimate};

#[derive(Debug, Parser)]
#[command(
    name = "proxybound",
    version,
    about = "Exact and simulated risk differences under proxy adjustment"
)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format. `csv` is only available for `simulate`, where it is
    /// the default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a model file and verify every applicable prediction.
    Check {
        #[arg(long)]
        model: PathBuf,
    },
    /// Sample models from a constraint set and record the three risk
    /// differences per trial.
    Simulate {
        #[arg(long, default_value = "t2")]
        constraints: String,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Also write the JSON summary to this file.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Search for a counterexample to a named proposition.
    Search {
        #[arg(long)]
        proposition: String,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Closed-form coefficients of the linear path model.
    #[command(allow_negative_numbers = true)]
    Sem {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        delta: f64,
        /// Also fit the regressions on this many simulated observations.
        #[arg(long)]
        simulate: Option<usize>,
    },
    /// Plug-in estimates from an `a,d,y` CSV file.
    Estimate {
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Serialize)]
struct CheckOutput {
    model: DiscreteModel,
    report: ConditionReport,
    verification: VerificationResult,
}

#[derive(Serialize)]
struct SemOutput {
    model: PathModel,
    coefficients: SemCoefficients,
    ordering: OrderingCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<SemEstimate>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::EmptyInput
            | Error::UnknownName { .. }
            | Error::InvalidConfig(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    usage(format!("{}: {e}", path.display()))
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("reports serialize");
    s.push(b'\n');
    s
}

fn write_to(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| io_failure(p, e)),
        None => stdout.write_all(bytes).map_err(|e| usage(e.to_string())),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_failure(path, e))
}

fn require_json(format: Option<Format>) -> Result<(), Failure> {
    match format {
        Some(Format::Csv) => Err(usage("--format csv is only available for `simulate`")),
        _ => Ok(()),
    }
}

/// Executes a parsed command.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Check { model } => {
            require_json(cli.format)?;
            let parsed = read_model_file(model)
                .map_err(|e| io_failure(model, e))?
                .map_err(|e| usage(format!("{}: {e}", model.display())))?;
            let validated = parsed.validate()?;
            let report = classify(&validated);
            let verification = verify(&validated, &report);
            let passed = verification.all_passed();
            write_to(
                out,
                &json(&CheckOutput {
                    model: parsed,
                    report,
                    verification,
                }),
                stdout,
            )?;
            if !passed {
                return Err(Failure {
                    code: 1,
                    message: "a predicted ordering failed verification".into(),
                });
            }
        }
        Command::Simulate {
            constraints,
            trials,
            bins,
            summary,
            threads,
        } => {
            let config = ExperimentConfig {
                trials: *trials,
                seed: cli.seed,
                constraint_set: constraints.clone(),
                histogram_bins: *bins,
                threads: *threads,
            };
            let result = run_experiment(&config)?;
            if let Some(path) = summary {
                std::fs::write(path, json(&result)).map_err(|e| io_failure(path, e))?;
            }
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => write_to(out, &json(&result), stdout)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&result.records, &mut buf).map_err(|e| usage(e.to_string()))?;
                    write_to(out, &buf, stdout)?;
                }
            }
        }
        Command::Search {
            proposition,
            budget,
            threads,
        } => {
            require_json(cli.format)?;
            let prop = Proposition::named(proposition)?;
            let mut config = SearchConfig::new(*budget, cli.seed);
            config.threads = *threads;
            write_to(out, &json(&report(&prop, &config)?), stdout)?;
        }
        Command::Sem {
            alpha,
            beta,
            gamma,
            delta,
            simulate,
        } => {
            require_json(cli.format)?;
            let model = PathModel::new(*alpha, *beta, *gamma, *delta)?;
            let estimate = simulate
                .map(|n| crate::sem::simulate_and_estimate(&model, n, cli.seed))
                .transpose()?;
            let output = SemOutput {
                model,
                coefficients: model.coefficients()?,
                ordering: model.check_ordering()?,
                estimate,
            };
            write_to(out, &json(&output), stdout)?;
        }
        Command::Estimate { data } => {
            require_json(cli.format)?;
            let dataset = ingest(open(data)?)?;
            write_to(out, &json(&plugin_estimates(&dataset)?), stdout)?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `--out` or `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                2
            } else {
                let _ = write!(stdout, "{rendered}");
                0
            };
        }
    };
    let mut buffered = BufWriter::new(stdout);
    let result = execute(&cli, &mut buffered);
    let flushed = buffered.flush();
    match (result, flushed) {
        (Ok(()), Ok(())) => 0,
        (Ok(()), Err(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
        (Err(f), _) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
