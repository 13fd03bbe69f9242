//! `infer`: checkpoint plus TAP file in, ranked candidate file out. In
//! abstract mode every candidate is mapped back to raw tokens through the
//! TAP's stored abstraction map, so downstream scoring always compares
//! raw source.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use assertgen_core::abstractor::{read_abstract_taps, unabstract};
use assertgen_core::evalkit::{write_predictions, PredictionRecord};
use assertgen_core::miner::read_taps;
use assertgen_core::neural::{predict, EncodedTap};
use rayon::prelude::*;

use crate::config::{Mode, PipelineConfig};
use crate::error::{with_path, CliError};

use super::{checkpoint_path, load_model, predictions_path, taps_path};

pub struct InferArgs {
    /// TAP file to decode; defaults to the mode's test split.
    pub input: Option<PathBuf>,
    /// Checkpoint to load; defaults to the mode's `model.ckpt`.
    pub checkpoint: Option<PathBuf>,
    /// Where to write predictions; defaults to the mode's
    /// `predictions.jsonl`.
    pub output: Option<PathBuf>,
}

pub fn run(config: &PipelineConfig, args: &InferArgs) -> Result<(), CliError> {
    let mode = config.mode;
    let dir = config.mode_dir(mode);
    let ckpt = args.checkpoint.clone().unwrap_or_else(|| checkpoint_path(&dir));
    let input = args.input.clone().unwrap_or_else(|| taps_path(&dir, "test"));
    let output = args.output.clone().unwrap_or_else(|| predictions_path(&dir));

    let (model, vocab, _) = load_model(&ckpt)?;
    let k = config.max_beam();
    let max_len = config.max_decode_tokens;
    let unresolved_total = AtomicUsize::new(0);

    let records: Vec<PredictionRecord> = match mode {
        Mode::RawCopy => {
            let taps = with_path(read_taps(&input), &input)?;
            taps.par_iter()
                .map(|tap| {
                    let encoded = EncodedTap::from_tap(tap, &vocab);
                    let preds = predict(&model, &encoded, &vocab, k, max_len)?;
                    Ok(PredictionRecord {
                        id: tap.id.clone(),
                        log_probs: preds.iter().map(|p| p.log_prob).collect(),
                        candidates: preds.into_iter().map(|p| p.tokens).collect(),
                    })
                })
                .collect::<Result<_, CliError>>()?
        }
        Mode::Abstract => {
            let taps = with_path(read_abstract_taps(&input), &input)?;
            taps.par_iter()
                .map(|tap| {
                    let encoded = EncodedTap::from_abstract(tap, &vocab);
                    let preds = predict(&model, &encoded, &vocab, k, max_len)?;
                    let mut candidates = Vec::with_capacity(preds.len());
                    let mut log_probs = Vec::with_capacity(preds.len());
                    for p in preds {
                        let (raw, unresolved) = unabstract(&p.tokens, &tap.map);
                        // A candidate may use a placeholder this TAP never
                        // assigned; it stays as-is and simply cannot match
                        // the gold. Counted for the log, not fatal.
                        unresolved_total.fetch_add(unresolved.len(), Ordering::Relaxed);
                        candidates.push(raw);
                        log_probs.push(p.log_prob);
                    }
                    Ok(PredictionRecord {
                        id: tap.raw_id.clone(),
                        candidates,
                        log_probs,
                    })
                })
                .collect::<Result<_, CliError>>()?
        }
    };

    let unresolved = unresolved_total.into_inner();
    if unresolved > 0 {
        log::warn!("{unresolved} predicted placeholders had no mapping back to raw tokens");
    }
    write_predictions(&output, &records)?;
    println!(
        "decoded {} inputs at beam {} into {}",
        records.len(),
        k,
        output.display()
    );
    Ok(())
}
