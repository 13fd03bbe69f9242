//! Token-level metrics: exact-match, edit distance, assert taxonomy,
//! frequency baseline, copy attribution and raw/abstract overlap.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::miner::TapRecord;
use crate::neural::ModelVocab;

use super::EvalError;

/// True iff any candidate equals the gold sequence token for token.
pub fn perfect_prediction(candidates: &[Vec<String>], gold: &[String]) -> bool {
    candidates.iter().any(|c| c == gold)
}

/// Token-level Levenshtein distance with unit-cost substitution,
/// insertion and deletion.
pub fn edit_distance(a: &[String], b: &[String]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, ta) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, tb) in b.iter().enumerate() {
            let sub_cost = if ta == tb { 0 } else { 1 };
            curr[j + 1] = (prev[j] + sub_cost)
                .min(prev[j + 1] + 1)
                .min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// The assert-call names the taxonomy tracks.
pub const TAXONOMY_NAMES: [&str; 8] = [
    "assertEquals",
    "assertTrue",
    "assertNotNull",
    "assertThat",
    "assertNull",
    "assertFalse",
    "assertArrayEquals",
    "assertSame",
];

/// Classifies a gold assert statement by its call name, stripping any
/// `Owner.` qualification. The name is the token directly before the
/// first `(`.
pub fn classify_assert(gold: &[String]) -> Result<&'static str, EvalError> {
    let unknown = || EvalError::UnknownAssertType {
        statement: gold.join(" "),
    };
    let paren = gold
        .iter()
        .position(|t| t == "(")
        .ok_or_else(unknown)?;
    if paren == 0 {
        return Err(unknown());
    }
    let name = gold[paren - 1].as_str();
    TAXONOMY_NAMES
        .iter()
        .find(|&&n| n == name)
        .copied()
        .ok_or_else(unknown)
}

/// Counts test targets that match one of the `k` most frequent training
/// targets (ties broken lexicographically on the joined sequence).
pub fn frequency_baseline(
    train_targets: &[Vec<String>],
    test_targets: &[Vec<String>],
    k: usize,
) -> usize {
    assert!(k >= 1, "a top-0 baseline predicts nothing");
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    for t in train_targets {
        *counts.entry(t.as_slice()).or_insert(0) += 1;
    }
    let mut ranked: Vec<(&[String], usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(k);
    let top: HashSet<&[String]> = ranked.into_iter().map(|(t, _)| t).collect();
    test_targets
        .iter()
        .filter(|t| top.contains(t.as_slice()))
        .count()
}

/// Counts perfect predictions that only the copy mechanism could have
/// produced: their gold target uses at least one token outside the model
/// vocabulary (reachable only through the input).
pub fn copy_attribution(
    perfect_ids: &BTreeSet<String>,
    taps: &[TapRecord],
    vocab: &ModelVocab,
) -> usize {
    taps.iter()
        .filter(|tap| perfect_ids.contains(&tap.id))
        .filter(|tap| {
            tap.target_tokens
                .iter()
                .any(|tok| vocab.id(tok).is_none())
        })
        .count()
}

/// Overlap between the raw-mode and abstract-mode perfect-prediction id
/// sets, as fractions of their union.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub shared: usize,
    pub raw_only: usize,
    pub abstract_only: usize,
    pub intersection_frac: f64,
    pub raw_only_frac: f64,
    pub abstract_only_frac: f64,
    /// Set when both id sets were empty; the fractions are all zero then.
    pub empty_union: bool,
}

pub fn overlap_metrics(pp_raw: &BTreeSet<String>, pp_abstract: &BTreeSet<String>) -> OverlapReport {
    let shared = pp_raw.intersection(pp_abstract).count();
    let raw_only = pp_raw.len() - shared;
    let abstract_only = pp_abstract.len() - shared;
    let union = shared + raw_only + abstract_only;
    if union == 0 {
        return OverlapReport {
            shared: 0,
            raw_only: 0,
            abstract_only: 0,
            intersection_frac: 0.0,
            raw_only_frac: 0.0,
            abstract_only_frac: 0.0,
            empty_union: true,
        };
    }
    let frac = |n: usize| n as f64 / union as f64;
    // The last fraction is the complement of the first two rather than its
    // own division, so the three always sum to exactly 1.0: with
    // s = intersection + raw_only (both in [0, 1]), s + fl(1 - s) rounds
    // to 1.0 for every representable s.
    let intersection_frac = frac(shared);
    let raw_only_frac = frac(raw_only);
    OverlapReport {
        shared,
        raw_only,
        abstract_only,
        intersection_frac,
        raw_only_frac,
        abstract_only_frac: 1.0 - (intersection_frac + raw_only_frac),
        empty_union: false,
    }
}
