//! One module per subcommand, plus the artifact-path conventions they
//! share.

pub mod abstraction;
pub mod eval;
pub mod infer;
pub mod mine;
pub mod timing;
pub mod train;

use std::path::{Path, PathBuf};

use assertgen_core::neural::{
    load_checkpoint, ModelVocab, NeuralError, OptimizerState, Seq2SeqModel,
};

use crate::error::CliError;

/// Dataset split names used in artifact filenames.
pub const SPLITS: [&str; 3] = ["train", "val", "test"];

/// `<dir>/taps_<split>.jsonl`
pub fn taps_path(dir: &Path, split: &str) -> PathBuf {
    dir.join(format!("taps_{split}.jsonl"))
}

/// `<dir>/model.ckpt`
pub fn checkpoint_path(dir: &Path) -> PathBuf {
    dir.join("model.ckpt")
}

/// `<dir>/predictions.jsonl`
pub fn predictions_path(dir: &Path) -> PathBuf {
    dir.join("predictions.jsonl")
}

/// Loads a checkpoint, keeping integrity failures distinguishable from a
/// plain missing file.
#[allow(clippy::type_complexity)]
pub fn load_model(
    path: &Path,
) -> Result<(Seq2SeqModel<f64>, ModelVocab, Option<OptimizerState<f64>>), CliError> {
    load_checkpoint::<f64>(path).map_err(|e| match e {
        NeuralError::Io(io) => CliError::Input(format!("{}: {io}", path.display())),
        other => CliError::from(other),
    })
}
