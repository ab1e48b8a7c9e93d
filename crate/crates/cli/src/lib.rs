//! Implementation of the `leafclass` command: synthesize corpora, split them,
//! train, evaluate and compare.
//!
//! Exit codes: 0 success, 2 I/O failure, 3 invalid configuration or input,
//! 4 numerical failure (divergence, shape mismatch).

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use crate::commands::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "leafclass",
    version,
    about = "Leaf image classification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic directory-per-class corpus and its manifest.
    Synth(SynthArgs),
    /// Split a manifest (or a directory-per-class tree) per class.
    Split(SplitArgs),
    /// Train a model described by a run configuration file.
    Train(TrainArgs),
    /// Evaluate a checkpoint, or score a list of injected predictions.
    Eval(EvalArgs),
    /// Rank models by micro-averaged accuracy from their summary files.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory; receives one subdirectory per class and manifest.csv.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = 200)]
    per_class: usize,
    #[arg(long, default_value_t = 32)]
    height: usize,
    #[arg(long, default_value_t = 32)]
    width: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Manifest CSV to split.
    #[arg(long, conflicts_with = "root", required_unless_present = "root")]
    manifest: Option<PathBuf>,
    /// Directory-per-class tree to scan and split.
    #[arg(long)]
    root: Option<PathBuf>,
    /// Fraction of each class sent to training.
    #[arg(long, default_value_t = 0.8)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Receives train.csv and test.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `train.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Run configuration; supplies the checkpoint, test manifest and output
    /// directory of a previous `train`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with = "inject_predictions")]
    pub checkpoint: Option<PathBuf>,
    /// Manifest of the images to evaluate on.
    #[arg(long, conflicts_with = "inject_predictions")]
    pub manifest: Option<PathBuf>,
    /// CSV of `truth,prediction` class indices, scored without a model.
    #[arg(long, conflicts_with = "config")]
    pub inject_predictions: Option<PathBuf>,
    /// Comma-separated class names for injected predictions.
    #[arg(long, requires = "inject_predictions")]
    pub class_names: Option<String>,
    /// Label used in the summary row.
    #[arg(long)]
    pub model_name: Option<String>,
    /// Accepted for symmetry with `train`; evaluation itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// summary.csv files written by `eval`.
    #[arg(required = true)]
    summaries: Vec<PathBuf>,
    /// Directory for comparison.csv and comparison.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synth(a) => commands::synth(
            &leafclass::SyntheticSpec {
                num_classes: a.classes,
                images_per_class: a.per_class,
                height: a.height,
                width: a.width,
                seed: a.seed,
            },
            &a.out,
        ),
        Command::Split(a) => commands::split(
            a.manifest.as_deref(),
            a.root.as_deref(),
            &leafclass::SplitSpec {
                train_fraction: a.fraction,
                seed: a.seed,
            },
            &a.out,
        ),
        Command::Train(a) => commands::train(&a.config, a.seed, a.out.as_deref()),
        Command::Eval(a) => commands::eval(&a),
        Command::Compare(a) => commands::compare(&a.summaries, a.out.as_deref()),
    }
}

/// Parses `args` (program name first) and runs the selected subcommand.
/// `--help` and `--version` print and succeed; other usage errors map to
/// exit code 3.
pub fn execute<I, T>(args: I) -> Result<(), Failure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(Failure::usage(&e.render().to_string())),
    };
    dispatch(cli)
}

/// [`execute`], reporting any failure on stderr; returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match execute(args) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
