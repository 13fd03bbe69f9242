//! The three TAP filters: length, unknown target tokens, duplicates.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::abstractor::Vocabulary;

use super::TapRecord;

/// Accounting of one filter pass. Always satisfies
/// `input_count = removed_long + removed_unknown + removed_duplicate + kept`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input_count: usize,
    pub removed_long: usize,
    pub removed_unknown: usize,
    pub removed_duplicate: usize,
    pub kept: usize,
}

/// Applies the three corpus filters in order, preserving survivor order:
///
/// 1. context longer than `max_context_tokens` tokens;
/// 2. some target token found neither in the global vocabulary nor in the
///    TAP's own context (the model could never produce it);
/// 3. exact duplicates by content id (first occurrence wins).
///
/// Each dropped TAP is counted against the first filter it fails.
pub fn filter_taps(
    taps: Vec<TapRecord>,
    vocab: &Vocabulary,
    max_context_tokens: usize,
) -> (Vec<TapRecord>, FilterReport) {
    let mut report = FilterReport {
        input_count: taps.len(),
        ..FilterReport::default()
    };
    let mut seen: HashSet<String> = HashSet::new();
    let mut kept = Vec::with_capacity(taps.len());

    for tap in taps {
        if tap.context_tokens.len() > max_context_tokens {
            report.removed_long += 1;
            continue;
        }
        let context_set: HashSet<&str> =
            tap.context_tokens.iter().map(String::as_str).collect();
        let unknown = tap
            .target_tokens
            .iter()
            .any(|t| !vocab.contains(t) && !context_set.contains(t.as_str()));
        if unknown {
            report.removed_unknown += 1;
            continue;
        }
        if !seen.insert(tap.id.clone()) {
            report.removed_duplicate += 1;
            continue;
        }
        kept.push(tap);
    }

    report.kept = kept.len();
    debug_assert_eq!(
        report.input_count,
        report.removed_long + report.removed_unknown + report.removed_duplicate + report.kept
    );
    (kept, report)
}
