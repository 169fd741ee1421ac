//! `slds` — build, merge, and compare sublinear distribution summaries from
//! the command line, run the synthetic reference experiments, and audit
//! fairness and privacy from score and loss files.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad flags or
//! parameters), 3 for data, format, and I/O errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slds::{Generator, TailModel};

#[derive(Parser)]
#[command(
    name = "slds",
    version,
    about = "Sublinear distribution summaries: constant-space sketches of \
             sample streams with distance estimation and audits on top",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a sample file into a mergeable summary file.
    Summarize(SummarizeArgs),
    /// Merge summary files that share one bucketing into a single summary.
    Merge(MergeArgs),
    /// Compute a distance between two summary files.
    Dist(DistArgs),
    /// Print the bucket width, counter budget, and sample floor that meet
    /// an accuracy target.
    Plan(PlanArgs),
    /// Reference experiments over synthetic sample streams.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Distribution audits over grouped-score and loss files.
    #[command(subcommand)]
    Audit(AuditCommand),
}

/// Which estimate family the printed synopsis reports. The summary file is
/// the same either way: it answers both.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynopsisMode {
    /// Report the heaviest bucket and its estimated probability.
    Pdf,
    /// Report estimated quartile cut points.
    Cdf,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Sample file: UTF-8 text, one finite decimal number per line.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Synopsis flavor to print after building (pdf or cdf).
    #[arg(long, value_enum)]
    mode: SynopsisMode,
    /// Bucket width (finite, > 0).
    #[arg(long, value_name = "B")]
    bucket_width: f64,
    /// Left edge of bucket 0.
    #[arg(long, value_name = "X0")]
    origin: f64,
    /// Sketch capacity: even, at least 4.
    #[arg(long, value_name = "K")]
    counters: usize,
    /// Output path for the summary file.
    #[arg(long, value_name = "SUMMARY")]
    out: PathBuf,
    /// Write the JSON mirror of the format instead of the binary layout.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MergeArgs {
    /// Output path for the merged summary.
    #[arg(long, value_name = "SUMMARY")]
    out: PathBuf,
    /// Summary files to merge; all must share bucketing and capacity.
    #[arg(required = true, value_name = "SUMMARY")]
    inputs: Vec<PathBuf>,
    /// Write the JSON mirror of the format instead of the binary layout.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistMetric {
    /// Transport distance of order `--p` between the summarized laws.
    Wasserstein,
    /// Total variation: half the L1 gap between bucket probabilities.
    Tv,
    /// L`--p` norm of the gap between bucket probabilities.
    Lp,
    /// Excess mass of A over `--tau` times B.
    #[value(name = "hockeystick")]
    HockeyStick,
}

#[derive(Args)]
struct DistArgs {
    /// Distance to evaluate.
    #[arg(long, value_enum)]
    metric: DistMetric,
    /// Order for wasserstein and lp (>= 1).
    #[arg(long, default_value_t = 1.0, value_name = "P")]
    p: f64,
    /// Likelihood-ratio threshold for hockeystick (>= 1; at 1 it equals tv).
    #[arg(long, default_value_t = 1.0, value_name = "T")]
    tau: f64,
    /// First summary file.
    #[arg(value_name = "SUMMARY_A")]
    summary_a: PathBuf,
    /// Second summary file.
    #[arg(value_name = "SUMMARY_B")]
    summary_b: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlanMetric {
    Wasserstein,
    Tv,
}

/// Tail class in flag syntax: `subgaussian:SIGMA` or
/// `subweibull:ALPHA[,CALPHA]` (CALPHA defaults to 1).
#[derive(Clone, Copy)]
struct TailArg(TailModel);

impl FromStr for TailArg {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let (kind, params) = text
            .split_once(':')
            .ok_or_else(|| format!("expected subgaussian:SIGMA or subweibull:ALPHA[,CALPHA], got {text:?}"))?;
        let model = match kind {
            "subgaussian" => {
                let sigma: f64 = params
                    .parse()
                    .map_err(|_| format!("subgaussian scale must be a number, got {params:?}"))?;
                TailModel::sub_gaussian(sigma).map_err(|err| err.to_string())?
            }
            "subweibull" => {
                let (alpha_text, prefactor_text) =
                    params.split_once(',').unwrap_or((params, "1"));
                let alpha: f64 = alpha_text
                    .parse()
                    .map_err(|_| format!("subweibull exponent must be a number, got {alpha_text:?}"))?;
                let prefactor: f64 = prefactor_text.parse().map_err(|_| {
                    format!("subweibull prefactor must be a number, got {prefactor_text:?}")
                })?;
                TailModel::sub_weibull(alpha, prefactor).map_err(|err| err.to_string())?
            }
            other => {
                return Err(format!(
                    "unknown tail class {other:?}; use subgaussian:SIGMA or subweibull:ALPHA[,CALPHA]"
                ))
            }
        };
        Ok(TailArg(model))
    }
}

#[derive(Args)]
struct PlanArgs {
    /// Distance the plan must make accurate.
    #[arg(long, value_enum)]
    metric: PlanMetric,
    /// Accuracy target in (0, 1).
    #[arg(long, value_name = "E")]
    epsilon: f64,
    /// Failure probability in (0, 1).
    #[arg(long, value_name = "D")]
    delta: f64,
    /// Tail class of the data: subgaussian:SIGMA or subweibull:ALPHA[,CALPHA].
    #[arg(long, value_name = "TAIL")]
    tail: TailArg,
    /// Smoothness scale of the compared densities.
    #[arg(long, value_name = "L")]
    lipschitz: f64,
    /// Multiplier applied to every planned threshold.
    #[arg(long = "const", default_value_t = 1.0, value_name = "C")]
    constant: f64,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Stream two synthetic distributions, sweep the counter budget, and
    /// record per-budget estimation error against the exact distance on the
    /// full data as CSV (columns k,estimate,oracle,abs_error,rel_error,wall_ms).
    Synthetic(SyntheticArgs),
}

/// Counter-budget sweep in flag syntax: `START:END:STEP`, inclusive.
#[derive(Clone)]
struct GridArg(Vec<usize>);

impl FromStr for GridArg {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, end, step] = parts.as_slice() else {
            return Err(format!("expected START:END:STEP, got {text:?}"));
        };
        let parse = |name: &str, value: &str| -> Result<usize, String> {
            value
                .parse::<usize>()
                .map_err(|_| format!("{name} must be a nonnegative integer, got {value:?}"))
        };
        let (start, end, step) = (parse("START", start)?, parse("END", end)?, parse("STEP", step)?);
        if step == 0 {
            return Err("STEP must be positive".to_string());
        }
        if start == 0 {
            return Err("START must be positive".to_string());
        }
        if end < start {
            return Err(format!("grid END {end} is below START {start}"));
        }
        Ok(GridArg((start..=end).step_by(step).collect()))
    }
}

#[derive(Args)]
struct SyntheticArgs {
    /// Side-A sampler: gaussian:MEAN,SIGMA | weibull_tail:ALPHA |
    /// exponential | file:PATH.
    #[arg(long, value_name = "DIST")]
    dist_a: Generator,
    /// Side-B sampler, same syntax.
    #[arg(long, value_name = "DIST")]
    dist_b: Generator,
    /// Samples per side.
    #[arg(long, value_name = "N")]
    n: usize,
    /// Bucket width for summaries and the oracle histogram (origin 0).
    #[arg(long, value_name = "B")]
    bucket_width: f64,
    /// Counter budgets to sweep: START:END:STEP, inclusive.
    #[arg(long, value_name = "GRID")]
    counters_grid: GridArg,
    /// Sources each side is split into; per-source summaries are merged.
    #[arg(long, default_value_t = 10, value_name = "S")]
    sources: usize,
    /// Seed for side A; side B draws from seed+1.
    #[arg(long, default_value_t = 7, value_name = "SEED")]
    seed: u64,
    /// Output CSV path.
    #[arg(long, value_name = "CSV")]
    out: PathBuf,
    /// Distance the sweep estimates.
    #[arg(long, value_enum, default_value = "wasserstein")]
    metric: PlanMetric,
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Demographic-disparity audit: largest pairwise transport distance
    /// between per-group score distributions.
    Fairness(FairnessArgs),
    /// Membership-privacy audit: total variation and excess-mass divergences
    /// between in-training and out-of-training loss distributions.
    Privacy(PrivacyArgs),
}

#[derive(Args)]
struct FairnessArgs {
    /// Two-column CSV of group,value rows (header optional).
    #[arg(long, value_name = "CSV")]
    scores: PathBuf,
    /// Accuracy target in (0, 1).
    #[arg(long, value_name = "E")]
    epsilon: f64,
    /// Failure probability in (0, 1).
    #[arg(long, value_name = "D")]
    delta: f64,
    /// Tail class of the scores: subgaussian:SIGMA or subweibull:ALPHA[,CALPHA].
    #[arg(long, value_name = "TAIL")]
    tail: TailArg,
    /// Smoothness scale of the score densities.
    #[arg(long, value_name = "L")]
    lipschitz: f64,
    /// Multiplier applied to every planned threshold.
    #[arg(long = "const", default_value_t = 1.0, value_name = "C")]
    constant: f64,
}

/// Comma-separated nonnegative divergence levels, e.g. `0,0.5,1`.
#[derive(Clone)]
struct AlphasArg(Vec<f64>);

impl FromStr for AlphasArg {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        text.split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("divergence level must be a number, got {part:?}"))
            })
            .collect::<Result<Vec<f64>, String>>()
            .map(AlphasArg)
    }
}

#[derive(Args)]
struct PrivacyArgs {
    /// Loss file for the in-training side (one number per line).
    #[arg(long = "in", value_name = "FILE")]
    in_losses: PathBuf,
    /// Loss file for the out-of-training side.
    #[arg(long, value_name = "FILE")]
    out_losses: PathBuf,
    /// Log-ratio levels to certify, comma separated.
    #[arg(long, value_name = "ALPHAS")]
    alphas: AlphasArg,
    /// Accuracy target in (0, 1).
    #[arg(long, value_name = "E")]
    epsilon: f64,
    /// Failure probability in (0, 1).
    #[arg(long, value_name = "D")]
    delta: f64,
    /// Tail class of the losses: subgaussian:SIGMA or subweibull:ALPHA[,CALPHA].
    #[arg(long, value_name = "TAIL")]
    tail: TailArg,
    /// Smoothness scale of the loss densities.
    #[arg(long, value_name = "L")]
    lipschitz: f64,
    /// Multiplier applied to every planned threshold.
    #[arg(long = "const", default_value_t = 1.0, value_name = "C")]
    constant: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Summarize(args) => commands::summarize(args),
        Command::Merge(args) => commands::merge(args),
        Command::Dist(args) => commands::dist(args),
        Command::Plan(args) => commands::plan(args),
        Command::Experiment(ExperimentCommand::Synthetic(args)) => commands::synthetic(args),
        Command::Audit(AuditCommand::Fairness(args)) => commands::fairness(args),
        Command::Audit(AuditCommand::Privacy(args)) => commands::privacy(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(u8::try_from(err.exit_code()).unwrap_or(1))
        }
    }
}
