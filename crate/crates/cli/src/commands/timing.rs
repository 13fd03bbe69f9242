//! `timing`: decode-time sweep over the configured beam sizes.

use std::fs;
use std::path::PathBuf;

use assertgen_core::evalkit::{monotonicity_warnings, timing_harness};

use crate::config::PipelineConfig;
use crate::error::CliError;

use super::{checkpoint_path, load_model, train::load_split};

/// Beam-to-beam slack tolerated before a non-monotone timing step is
/// worth a warning; decode time should grow with beam width, but small
/// inversions are scheduler noise.
const MONOTONE_SLACK: f64 = 0.10;

pub struct TimingArgs {
    /// Checkpoint to load; defaults to the mode's `model.ckpt`.
    pub checkpoint: Option<PathBuf>,
    /// Inputs measured from the test split (0 = all).
    pub limit: usize,
}

pub fn run(config: &PipelineConfig, args: &TimingArgs) -> Result<(), CliError> {
    let mode = config.mode;
    let dir = config.mode_dir(mode);
    let ckpt = args
        .checkpoint
        .clone()
        .unwrap_or_else(|| checkpoint_path(&dir));

    let (model, vocab, _) = load_model(&ckpt)?;
    let mut inputs = load_split(config, mode, &vocab, "test")?;
    if args.limit > 0 {
        inputs.truncate(args.limit);
    }
    if inputs.is_empty() {
        return Err(CliError::Input("no inputs to time".into()));
    }

    let timing = timing_harness(&model, &inputs, &config.beam_sizes, config.max_decode_tokens)?;
    for warning in monotonicity_warnings(&timing, MONOTONE_SLACK) {
        log::warn!("{warning}");
    }

    let mut json = serde_json::to_string_pretty(&timing)?;
    json.push('\n');
    fs::write(dir.join("timing.json"), json)?;

    for (k, seconds) in &timing {
        println!("beam {k:>2}: {seconds:.4} s/input");
    }
    Ok(())
}
