//! `eval`: predictions plus gold in; score report, edit-distance
//! histogram, frequency-baseline table, BLEU-bucket sample files, and —
//! when the other mode's predictions are supplied — the overlap report.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use assertgen_core::abstractor::read_abstract_taps;
use assertgen_core::evalkit::{
    bleu_bucket_sample, copy_attribution, evaluate, frequency_baseline, overlap_metrics,
    read_predictions, write_eval_report, write_histogram_csv, write_overlap_report,
    write_samples, ImperfectPrediction, PredictionRecord, BUCKET_LABELS, DEFAULT_BUCKET_SAMPLE,
};
use assertgen_core::miner::read_taps;
use serde::Serialize;

use crate::config::{Mode, PipelineConfig};
use crate::error::{with_path, CliError};

use super::{predictions_path, taps_path};

pub struct EvalArgs {
    /// Predictions to score; defaults to the mode's `predictions.jsonl`.
    pub predictions: Option<PathBuf>,
    /// Gold TAP file; defaults to the raw test split.
    pub gold: Option<PathBuf>,
    /// The other mode's predictions; triggers the overlap report.
    pub compare: Option<PathBuf>,
}

/// One row of the frequency-baseline table.
#[derive(Debug, Serialize)]
struct BaselineRow {
    k: usize,
    matched: usize,
    rate: f64,
}

pub fn run(config: &PipelineConfig, args: &EvalArgs) -> Result<(), CliError> {
    let mode = config.mode;
    let dir = config.mode_dir(mode);
    let raw_dir = config.output_dir.join("raw");
    let pred_path = args
        .predictions
        .clone()
        .unwrap_or_else(|| predictions_path(&dir));
    let gold_path = args
        .gold
        .clone()
        .unwrap_or_else(|| taps_path(&raw_dir, "test"));

    let predictions = with_path(read_predictions(&pred_path), &pred_path)?;
    let gold_taps = with_path(read_taps(&gold_path), &gold_path)?;
    let gold: BTreeMap<String, Vec<String>> = gold_taps
        .iter()
        .map(|t| (t.id.clone(), t.target_tokens.clone()))
        .collect();

    let mut report = evaluate(&predictions, &gold, &config.beam_sizes)?;

    // Perfect top-1 ids drive both copy attribution and the overlap set.
    let perfect_ids = perfect_top1_ids(&predictions, &gold);
    if mode == Mode::RawCopy {
        let vocab = super::train::model_vocab(config, mode)?;
        report.copy_attributed = copy_attribution(&perfect_ids, &gold_taps, &vocab);
    }

    fs::create_dir_all(&dir)?;
    write_eval_report(&dir.join("eval_report.json"), &report)?;
    write_histogram_csv(&dir.join("histogram.csv"), &report)?;

    // Frequency baseline over mode-consistent targets: what top-k lookup
    // of the training set's most common asserts would score on this test
    // set.
    let (train_targets, test_targets) = baseline_targets(config, mode)?;
    let rows: Vec<BaselineRow> = [1usize, 5, 10]
        .iter()
        .map(|&k| {
            let matched = frequency_baseline(&train_targets, &test_targets, k);
            BaselineRow {
                k,
                matched,
                rate: matched as f64 / test_targets.len().max(1) as f64,
            }
        })
        .collect();
    let mut json = serde_json::to_string_pretty(&rows)?;
    json.push('\n');
    fs::write(dir.join("frequency_baseline.json"), json)?;

    // Imperfect top-1 predictions, sampled per BLEU bucket for inspection.
    let imperfect: Vec<ImperfectPrediction> = predictions
        .iter()
        .filter(|p| !perfect_ids.contains(&p.id))
        .map(|p| ImperfectPrediction {
            id: p.id.clone(),
            prediction: p.candidates.first().cloned().unwrap_or_default(),
            gold: gold[&p.id].clone(),
        })
        .collect();
    let buckets = bleu_bucket_sample(&imperfect, DEFAULT_BUCKET_SAMPLE, config.seed);
    for (label, bucket) in BUCKET_LABELS.iter().zip(&buckets) {
        write_samples(&dir.join(format!("samples_{label}.jsonl")), bucket)?;
    }

    if let Some(other_path) = &args.compare {
        let other = with_path(read_predictions(other_path), other_path)?;
        let other_perfect = perfect_top1_ids(&other, &gold);
        let (raw_set, abstract_set) = match mode {
            Mode::RawCopy => (perfect_ids, other_perfect),
            Mode::Abstract => (other_perfect, perfect_ids),
        };
        let overlap = overlap_metrics(&raw_set, &abstract_set);
        write_overlap_report(&config.output_dir.join("overlap.json"), &overlap)?;
        println!(
            "overlap: {} shared, {} raw-only, {} abstract-only",
            overlap.shared, overlap.raw_only, overlap.abstract_only
        );
    }

    for stats in &report.per_beam {
        println!(
            "beam {:>2}: {}/{} perfect ({:.2}%), mean BLEU-4 {:.2}",
            stats.beam,
            stats.perfect_count,
            report.evaluated,
            100.0 * stats.perfect_rate,
            stats.mean_bleu4
        );
    }
    println!("report written to {}", dir.join("eval_report.json").display());
    Ok(())
}

/// Ids whose top candidate equals the gold target. Prediction files always
/// hold raw tokens (abstract-mode inference maps back before writing), so
/// one comparison works for both modes.
fn perfect_top1_ids(
    predictions: &[PredictionRecord],
    gold: &BTreeMap<String, Vec<String>>,
) -> BTreeSet<String> {
    predictions
        .iter()
        .filter(|p| {
            gold.get(&p.id)
                .is_some_and(|g| p.candidates.first().is_some_and(|c| c == g))
        })
        .map(|p| p.id.clone())
        .collect()
}

/// Train/test target sequences in the mode's own token space: raw asserts
/// for raw mode, abstracted asserts for abstract mode (the baseline should
/// compete on the same footing as the model that trained on them).
#[allow(clippy::type_complexity)]
fn baseline_targets(
    config: &PipelineConfig,
    mode: Mode,
) -> Result<(Vec<Vec<String>>, Vec<Vec<String>>), CliError> {
    let dir = config.mode_dir(mode);
    let read = |path: &Path| -> Result<Vec<Vec<String>>, CliError> {
        Ok(match mode {
            Mode::RawCopy => with_path(read_taps(path), path)?
                .into_iter()
                .map(|t| t.target_tokens)
                .collect(),
            Mode::Abstract => with_path(read_abstract_taps(path), path)?
                .into_iter()
                .map(|t| t.target_tokens)
                .collect(),
        })
    };
    Ok((
        read(&taps_path(&dir, "train"))?,
        read(&taps_path(&dir, "test"))?,
    ))
}
