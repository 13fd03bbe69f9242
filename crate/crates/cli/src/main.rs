//! Assert-generation pipeline driver: mine Java test corpora into
//! Test-Assert Pairs, abstract them, train a seq2seq model, decode with
//! beam search, and score the results.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4 integrity
//! failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{eval::EvalArgs, infer::InferArgs, timing::TimingArgs};
use config::Overrides;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "assertgen",
    version,
    about = "Learns JUnit assert statements from test methods"
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a corpus of Java projects into filtered, split TAP files
    Mine,

    /// Abstract the mined TAPs with typed placeholder identifiers
    Abstract,

    /// Train the seq2seq model on the current mode's dataset
    Train {
        /// Continue from the existing checkpoint instead of starting fresh
        #[arg(long)]
        resume: bool,
    },

    /// Decode TAPs into ranked assert candidates
    Infer {
        /// TAP file to decode (default: the mode's test split)
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,

        /// Checkpoint to load (default: the mode's model.ckpt)
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,

        /// Predictions file to write (default: the mode's predictions.jsonl)
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },

    /// Score predictions against gold asserts
    Eval {
        /// Predictions to score (default: the mode's predictions.jsonl)
        #[arg(long, value_name = "FILE")]
        predictions: Option<PathBuf>,

        /// Gold TAP file (default: the raw test split)
        #[arg(long, value_name = "FILE")]
        gold: Option<PathBuf>,

        /// The other mode's predictions; adds the overlap report
        #[arg(long, value_name = "FILE")]
        compare: Option<PathBuf>,
    },

    /// Measure decode seconds per input across the beam-size sweep
    Timing {
        /// Checkpoint to load (default: the mode's model.ckpt)
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,

        /// Inputs to measure from the test split (0 = all)
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    configure_thread_pool();

    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.overrides.resolve()?;
    match cli.command {
        Command::Mine => commands::mine::run(&config),
        Command::Abstract => commands::abstraction::run(&config),
        Command::Train { resume } => commands::train::run(&config, resume),
        Command::Infer {
            input,
            checkpoint,
            output,
        } => commands::infer::run(
            &config,
            &InferArgs {
                input,
                checkpoint,
                output,
            },
        ),
        Command::Eval {
            predictions,
            gold,
            compare,
        } => commands::eval::run(
            &config,
            &EvalArgs {
                predictions,
                gold,
                compare,
            },
        ),
        Command::Timing { checkpoint, limit } => {
            commands::timing::run(&config, &TimingArgs { checkpoint, limit })
        }
    }
}

/// Caps internal parallelism when ASSERTGEN_THREADS is set. An unparsable
/// value is ignored with a warning rather than failing the run.
fn configure_thread_pool() {
    let Ok(raw) = std::env::var("ASSERTGEN_THREADS") else {
        return;
    };
    match raw.parse::<usize>() {
        Ok(n) if n >= 1 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not set the thread pool size: {e}");
            }
        }
        _ => log::warn!("ASSERTGEN_THREADS={raw} is not a positive integer; ignored"),
    }
}
