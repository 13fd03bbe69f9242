//! Evaluation toolkit: exact-match accuracy, BLEU-4, token edit distance,
//! assert-type taxonomy, raw/abstract overlap, the frequency baseline,
//! copy attribution, BLEU-bucket sampling and the decoding-time harness.
//!
//! All metric functions are pure; [`report::evaluate`] fans out over the
//! prediction set in parallel and reduces in a fixed order, so reports are
//! deterministic.

pub mod bleu;
pub mod io;
pub mod metrics;
pub mod report;
pub mod sample;
pub mod timing;

pub use bleu::bleu4;
pub use io::{
    read_eval_report, read_predictions, read_samples, write_eval_report, write_histogram_csv,
    write_overlap_report, write_predictions, write_samples,
};
pub use metrics::{
    classify_assert, copy_attribution, edit_distance, frequency_baseline, overlap_metrics,
    perfect_prediction, OverlapReport, TAXONOMY_NAMES,
};
pub use report::{evaluate, BeamStats, EvalReport, PredictionRecord, TaxonomyEntry};
pub use sample::{
    bleu_bucket_sample, ImperfectPrediction, BUCKET_LABELS, DEFAULT_BUCKET_SAMPLE,
};
pub use timing::{default_beam_sizes, monotonicity_warnings, timing_harness};

/// Failures while scoring predictions or reading evaluation files.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("not a recognized assert statement: {statement}")]
    UnknownAssertType { statement: String },

    #[error("no gold target for prediction id {id}")]
    MissingGold { id: String },

    #[error("bad line {line}: {reason}")]
    BadLine { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
