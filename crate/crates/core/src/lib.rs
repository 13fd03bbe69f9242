//! End-to-end pipeline for learning JUnit assert statements from test code.
//!
//! The crate is organized along the pipeline stages:
//!
//! - [`jlex`] — lexes Java source into categorized token streams.
//! - [`miner`] — turns a local project corpus into filtered Test-Assert Pairs.
//! - [`abstractor`] — frequency vocabulary, typed-ID abstraction and the
//!   map back to raw source.
//! - [`neural`] — a small reverse-mode autodiff core plus a bidirectional
//!   LSTM encoder / attention / two-layer LSTM decoder with an optional
//!   copy mechanism, Adam training and beam-search inference.
//! - [`evalkit`] — perfect-prediction, BLEU-4, edit distance, assert
//!   taxonomy, overlap metrics, frequency baseline, bucket sampling and
//!   timing harness.
//!
//! The numeric core is generic over the scalar type (see [`scalar::Scalar`]);
//! `f64` is the default used for training and gradient checks, `f32` is
//! available for speed.

pub mod abstractor;
pub mod evalkit;
pub mod jlex;
pub mod miner;
pub mod neural;
pub mod scalar;

/// Double-precision seq2seq model, the default for training and checks.
pub type Model64 = neural::Seq2SeqModel<f64>;
/// Single-precision seq2seq model, optional for speed.
pub type Model32 = neural::Seq2SeqModel<f32>;
/// Double-precision parameter set.
pub type Params64 = neural::Seq2SeqParams<f64>;
/// Single-precision parameter set.
pub type Params32 = neural::Seq2SeqParams<f32>;
