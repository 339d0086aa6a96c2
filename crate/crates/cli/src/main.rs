//! `propscore` command-line interface.
//!
//! Every subcommand prints one JSON object on standard output. Diagnostics go to
//! standard error. Exit status: 0 on success, 1 for invalid input or usage, 2 when a
//! numerical procedure fails.

mod commands;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

const RULE_HELP: &str = "\
Rule specs are `name[:arg,...]`, each arg `key=value` or `fair`/`empirical`:
  crps[:fair|:empirical]   log   quadratic   brier   spherical
  pseudospherical:alpha=A  linear (improper)   energy:beta=B[,alpha=A]
  gaussian:lambda=L   laplacian:lambda=L   tw:base=<kernel>,t=T
  variogram:p=P   ds   hyvarinen   logcosh   mean   quantile:tau=T";

#[derive(Debug, Parser)]
#[command(name = "propscore", version, about = "Proper scoring rules for probabilistic forecasts", after_help = RULE_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score forecasts against observations (one JSON record per line, aligned by line).
    Score {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        forecasts: String,
        #[arg(long)]
        obs: String,
    },
    /// Compare two forecasters on the same observations.
    Compare {
        #[arg(long)]
        rule: String,
        #[arg(long = "forecasts-a")]
        forecasts_a: String,
        #[arg(long = "forecasts-b")]
        forecasts_b: String,
        #[arg(long)]
        obs: String,
    },
    /// Split the mean score of categorical forecasts into MCB − DSC + UNC.
    Decompose {
        /// brier (binary) or quadratic.
        #[arg(long)]
        rule: String,
        #[arg(long)]
        forecasts: String,
        #[arg(long)]
        obs: String,
        /// Group forecasts into k equal-width probability bins instead of exact values.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Fit a normal model by minimising the mean score.
    Fit {
        /// normal (one column) or normal-linear (columns x,y; mean a + b·x).
        #[arg(long)]
        family: String,
        /// log or crps.
        #[arg(long)]
        rule: String,
        /// CSV file; an optional header row is skipped.
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a numerical property check.
    Verify {
        #[arg(long)]
        rule: String,
        /// propriety, concavity, invariance, symmetry, crps-rep or spectral.
        #[arg(long)]
        check: String,
        #[arg(long = "grid-step")]
        grid_step: Option<f64>,
        /// Number of classes for categorical checks.
        #[arg(long)]
        classes: Option<usize>,
        /// Random trials, triples, instances or pairs, depending on the check.
        #[arg(long)]
        trials: Option<usize>,
        /// translate:h=H, scale:c=C[,degree=D] or rotate[:d=D].
        #[arg(long)]
        transform: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw samples from each forecast in a file.
    Sample {
        #[arg(long)]
        forecasts: String,
        #[arg(short = 'n', long = "n", default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(value) => {
            println!("{value}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
