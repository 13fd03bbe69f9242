//! Sequence-to-sequence assertion generator.
//!
//! A bidirectional LSTM encoder reads the abstracted test context, an
//! attention-equipped two-layer LSTM decoder emits the assertion one
//! token at a time, and an optional copy gate mixes the output softmax
//! with the attention distribution so input tokens outside the
//! vocabulary stay reachable. Everything runs on the crate's own
//! reverse-mode graph ([`graph::Graph`]); no external numerics.
//!
//! The pieces, bottom up:
//!
//! - [`tensor`] / [`graph`]: dense values and the autodiff node set.
//! - [`encoding`]: lexeme ↔ id maps and extended-vocabulary encoding.
//! - [`params`]: the named-tensor manifest every walk shares.
//! - [`model`]: the forward pass (encode, attend, decode, loss).
//! - [`beam`]: beam-search decoding and lexeme-level prediction.
//! - [`train`]: Adam/SGD mini-batch training with early stopping.
//! - [`checkpoint`]: hashed on-disk snapshots.
//! - [`gradcheck`]: finite-difference verification of the whole model.

pub mod beam;
pub mod checkpoint;
pub mod encoding;
pub mod gradcheck;
pub mod graph;
pub mod model;
pub mod params;
pub mod tensor;
pub mod train;

pub use beam::{beam_search, predict, BeamHypothesis, Prediction};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use encoding::{
    EncodedTap, ModelVocab, PAD_ID, SPECIAL_TOKENS, START_ID, STOP_ID, UNK_ID,
};
pub use gradcheck::{gradient_check, max_gradient_error, TensorCheck};
pub use graph::{Graph, NodeId};
pub use model::{DecState, DecStateValues, Encoding, Seq2SeqModel, Session, StepOut};
pub use params::{AttentionKind, HyperParams, Seq2SeqParams};
pub use tensor::Tensor;
pub use train::{
    mean_loss, train, train_with_state, write_history_csv, EpochStats, OptimizerKind,
    OptimizerState, TrainConfig, TrainOutcome,
};

/// Failures in model construction, training, or persistence.
#[derive(Debug, thiserror::Error)]
pub enum NeuralError {
    #[error("cannot encode an empty input sequence")]
    EmptyInput,

    #[error("cannot train on an empty dataset")]
    EmptyDataset,

    #[error("loss became non-finite on example {example}")]
    NonFiniteLoss { example: String },

    #[error("checkpoint is unusable: {reason}")]
    CorruptCheckpoint { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
