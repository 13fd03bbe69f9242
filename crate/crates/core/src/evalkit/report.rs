//! Aggregate evaluation over a predictions file: per-beam accuracy and
//! BLEU, the imperfect-prediction edit-distance histogram, and the
//! per-assert-type taxonomy.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bleu::bleu4;
use super::metrics::{classify_assert, edit_distance, perfect_prediction};
use super::EvalError;

/// One model output: the beam's candidates for a single TAP, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub candidates: Vec<Vec<String>>,
    pub log_probs: Vec<f64>,
}

/// Accuracy measured with the first `beam` candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamStats {
    pub beam: usize,
    pub perfect_count: usize,
    pub perfect_rate: f64,
    /// Mean over inputs of the best candidate BLEU-4 within the beam.
    pub mean_bleu4: f64,
}

/// Taxonomy row: how often this assert type appears in the gold set and
/// how many of those the model got exactly right at the top candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyEntry {
    pub perfect: usize,
    pub dataset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub evaluated: usize,
    pub per_beam: Vec<BeamStats>,
    /// Top-candidate token edit distance → count, imperfect inputs only.
    pub edit_distance_histogram: BTreeMap<usize, usize>,
    /// Gold assert name → counts; golds that are not a recognized assert
    /// call are tallied in `unknown_assert_count` instead.
    pub taxonomy: BTreeMap<String, TaxonomyEntry>,
    pub unknown_assert_count: usize,
    /// Perfect top-candidate predictions whose gold needs a token outside
    /// the model vocabulary; filled by the caller for copy-mode runs.
    pub copy_attributed: usize,
    /// Beam size → mean seconds per input; filled by the timing harness.
    pub timing: BTreeMap<usize, f64>,
}

struct RecordSummary {
    per_beam: Vec<(bool, f64)>,
    top1_perfect: bool,
    top1_distance: usize,
    taxonomy_name: Option<&'static str>,
}

/// Scores every prediction against its gold target. `beam_sizes` chooses
/// the candidate-prefix sizes reported; the histogram and taxonomy always
/// use the single top candidate.
pub fn evaluate(
    predictions: &[PredictionRecord],
    gold: &BTreeMap<String, Vec<String>>,
    beam_sizes: &[usize],
) -> Result<EvalReport, EvalError> {
    let summaries: Vec<RecordSummary> = predictions
        .par_iter()
        .map(|record| {
            let target = gold
                .get(&record.id)
                .ok_or_else(|| EvalError::MissingGold {
                    id: record.id.clone(),
                })?;
            let scores: Vec<f64> = record
                .candidates
                .iter()
                .map(|c| bleu4(c, target))
                .collect();
            let per_beam = beam_sizes
                .iter()
                .map(|&b| {
                    let prefix = &record.candidates[..b.min(record.candidates.len())];
                    let perfect = perfect_prediction(prefix, target);
                    let best = scores[..b.min(scores.len())]
                        .iter()
                        .copied()
                        .fold(0.0f64, f64::max);
                    (perfect, best)
                })
                .collect();
            let top1 = record.candidates.first();
            let top1_perfect = top1.map(|c| c == target).unwrap_or(false);
            let top1_distance = top1
                .map(|c| edit_distance(c, target))
                .unwrap_or(target.len());
            Ok(RecordSummary {
                per_beam,
                top1_perfect,
                top1_distance,
                taxonomy_name: classify_assert(target).ok(),
            })
        })
        .collect::<Result<_, EvalError>>()?;

    let evaluated = summaries.len();
    let per_beam = beam_sizes
        .iter()
        .enumerate()
        .map(|(i, &beam)| {
            let perfect_count = summaries.iter().filter(|s| s.per_beam[i].0).count();
            let bleu_sum: f64 = summaries.iter().map(|s| s.per_beam[i].1).sum();
            BeamStats {
                beam,
                perfect_count,
                perfect_rate: if evaluated == 0 {
                    0.0
                } else {
                    perfect_count as f64 / evaluated as f64
                },
                mean_bleu4: if evaluated == 0 {
                    0.0
                } else {
                    bleu_sum / evaluated as f64
                },
            }
        })
        .collect();

    let mut edit_distance_histogram = BTreeMap::new();
    let mut taxonomy: BTreeMap<String, TaxonomyEntry> = BTreeMap::new();
    let mut unknown_assert_count = 0usize;
    for summary in &summaries {
        if !summary.top1_perfect {
            *edit_distance_histogram
                .entry(summary.top1_distance)
                .or_insert(0) += 1;
        }
        match summary.taxonomy_name {
            Some(name) => {
                let entry = taxonomy.entry(name.to_string()).or_insert(TaxonomyEntry {
                    perfect: 0,
                    dataset: 0,
                });
                entry.dataset += 1;
                if summary.top1_perfect {
                    entry.perfect += 1;
                }
            }
            None => unknown_assert_count += 1,
        }
    }

    Ok(EvalReport {
        evaluated,
        per_beam,
        edit_distance_histogram,
        taxonomy,
        unknown_assert_count,
        copy_attributed: 0,
        timing: BTreeMap::new(),
    })
}
