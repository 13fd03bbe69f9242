//! Wall-clock decoding cost per input across beam sizes.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::neural::{beam_search, EncodedTap, NeuralError, Seq2SeqModel};
use crate::scalar::Scalar;

/// The beam sizes the reports sweep by default: 1, then 5 through 50 in
/// steps of 5.
pub fn default_beam_sizes() -> Vec<usize> {
    std::iter::once(1).chain((5..=50).step_by(5)).collect()
}

/// Mean seconds per input for each beam size, decoding only — inputs are
/// already encoded TAPs, so no abstraction or mapping time is included.
pub fn timing_harness<F: Scalar>(
    model: &Seq2SeqModel<F>,
    inputs: &[EncodedTap],
    beam_sizes: &[usize],
    max_len: usize,
) -> Result<BTreeMap<usize, f64>, NeuralError> {
    let mut timing = BTreeMap::new();
    for &k in beam_sizes {
        let started = Instant::now();
        for tap in inputs {
            beam_search(model, tap, k, max_len)?;
        }
        let per_input = if inputs.is_empty() {
            0.0
        } else {
            started.elapsed().as_secs_f64() / inputs.len() as f64
        };
        timing.insert(k, per_input);
    }
    Ok(timing)
}

/// Soft monotonicity check: wall-clock time should not shrink as the beam
/// widens. Returns a warning line per violation beyond `slack` (a
/// fraction of the previous measurement); an empty result means the sweep
/// looks monotone.
pub fn monotonicity_warnings(timing: &BTreeMap<usize, f64>, slack: f64) -> Vec<String> {
    let mut warnings = Vec::new();
    let mut prev: Option<(usize, f64)> = None;
    for (&k, &secs) in timing {
        if let Some((pk, ps)) = prev {
            if secs < ps * (1.0 - slack) {
                warnings.push(format!(
                    "beam {k} measured {secs:.6}s/input, faster than beam {pk} at {ps:.6}s/input"
                ));
            }
        }
        prev = Some((k, secs));
    }
    warnings
}
