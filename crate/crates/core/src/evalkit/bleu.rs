//! Sentence-level BLEU-4 on token sequences, scaled to [0, 100].

use std::collections::HashMap;

/// BLEU with modified n-gram precisions for n = 1..4, geometric mean and
/// brevity penalty. Two accommodations for very short assert statements:
/// orders longer than the candidate are skipped (the geometric mean runs
/// over the orders that exist), and an order `n ≥ 2` whose match count is
/// zero gets add-one smoothing. The unigram precision is never smoothed,
/// so sequences sharing no token at all score exactly 0; identical
/// sequences score exactly 100 at any length; an empty candidate scores 0.
pub fn bleu4(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let c = candidate.len() as f64;
    let r = reference.len() as f64;

    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=4usize {
        if candidate.len() < n {
            break;
        }
        let total = candidate.len() - n + 1;
        let mut ref_counts: HashMap<&[String], usize> = HashMap::new();
        if reference.len() >= n {
            for gram in reference.windows(n) {
                *ref_counts.entry(gram).or_insert(0) += 1;
            }
        }
        let mut matched = 0usize;
        for gram in candidate.windows(n) {
            if let Some(count) = ref_counts.get_mut(gram) {
                if *count > 0 {
                    *count -= 1;
                    matched += 1;
                }
            }
        }
        let precision = match (matched, n) {
            (0, 1) => return 0.0,
            (0, _) => 1.0 / (total as f64 + 1.0),
            _ => matched as f64 / total as f64,
        };
        log_sum += precision.ln();
        orders += 1;
    }

    let geo_mean = (log_sum / orders as f64).exp();
    let brevity = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    100.0 * brevity * geo_mean
}
