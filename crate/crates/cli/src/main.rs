//! Command-line front end: train, predict, tune, benchmark and compare,
//! plus a synthetic-data generator for demos.
//!
//! Exit codes: 0 on success, 1 for validation problems (bad inputs, bad
//! configuration, mismatched shapes), 2 for numeric solver failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

pub use config::RunConfig;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<awlssvm_core::Error> for CliError {
    fn from(err: awlssvm_core::Error) -> Self {
        let code = match err {
            awlssvm_core::Error::SolverFailure(_) => 2,
            _ => 1,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "awlssvm",
    version,
    about = "Multi-view kernel classification with adaptively weighted LS-SVMs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an adaptively weighted multi-view model and save it as JSON
    Train {
        /// Dataset directory (manifest.json plus view/label files)
        #[arg(long)]
        data: PathBuf,
        /// Optional TOML run configuration
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output model file
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a dataset with a trained model and write predictions as CSV
    Predict {
        /// Model file written by `train`
        #[arg(long)]
        model: PathBuf,
        /// Dataset directory to score
        #[arg(long)]
        data: PathBuf,
        /// Output CSV file
        #[arg(long)]
        out: PathBuf,
    },
    /// Random-search hyperparameters with stratified cross-validation
    Tune {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Method to tune: aw, bsv, early or late
        #[arg(long, default_value = "aw")]
        method: String,
        /// Optional JSON file for the winning configuration and trial log
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split, tune, refit and score one or more datasets for several methods
    Benchmark {
        /// Dataset directories (repeat the flag or list several paths)
        #[arg(long, num_args = 1.., required = true)]
        data: Vec<PathBuf>,
        /// Comma-separated method list out of: aw, bsv, early, late
        #[arg(long, default_value = "aw,bsv,early,late")]
        methods: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output JSON report file
        #[arg(long)]
        out: PathBuf,
    },
    /// Wilcoxon signed-rank comparison of two benchmark reports
    Compare {
        /// Exactly two report files written by `benchmark`
        #[arg(long, num_args = 2)]
        reports: Vec<PathBuf>,
    },
    /// Generate a synthetic multi-view dataset directory
    GenData {
        /// Output dataset directory
        #[arg(long)]
        out: PathBuf,
        /// complementary | noise | shaped
        #[arg(long, default_value = "complementary")]
        flavor: String,
        /// Samples per class (complementary, noise)
        #[arg(long, default_value_t = 30)]
        per_class: usize,
        /// Gaussian noise level (complementary, noise)
        #[arg(long, default_value_t = 0.3)]
        noise: f64,
        /// Total samples (shaped)
        #[arg(long, default_value_t = 210)]
        samples: usize,
        /// Number of classes (shaped)
        #[arg(long, default_value_t = 7)]
        classes: usize,
        /// Comma-separated view dimensions (shaped)
        #[arg(long, default_value = "24,576,512,256,254")]
        dims: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dataset name recorded in the manifest
        #[arg(long, default_value = "synthetic")]
        name: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { data, config, out } => commands::train(&data, config.as_deref(), &out),
        Command::Predict { model, data, out } => commands::predict(&model, &data, &out),
        Command::Tune {
            data,
            config,
            method,
            out,
        } => commands::tune(&data, config.as_deref(), &method, out.as_deref()),
        Command::Benchmark {
            data,
            methods,
            config,
            out,
        } => commands::benchmark(&data, &methods, config.as_deref(), &out),
        Command::Compare { reports } => commands::compare(&reports[0], &reports[1]),
        Command::GenData {
            out,
            flavor,
            per_class,
            noise,
            samples,
            classes,
            dims,
            seed,
            name,
        } => commands::gen_data(
            &out, &flavor, per_class, noise, samples, classes, &dims, seed, &name,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
