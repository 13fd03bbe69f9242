//! `train`: dataset files in, checkpoint and history out. `--resume`
//! continues from the existing checkpoint, optimizer state included.

use std::fs;
use std::path::Path;

use assertgen_core::abstractor::{read_abstract_taps, read_vocabulary, DEFAULT_CATEGORY_CAP};
use assertgen_core::miner::read_taps;
use assertgen_core::neural::{
    save_checkpoint, train_with_state, write_history_csv, EncodedTap, HyperParams, ModelVocab,
    OptimizerState, Seq2SeqModel, Seq2SeqParams, TrainConfig,
};

use crate::config::{Mode, PipelineConfig};
use crate::error::{with_path, CliError};

use super::{checkpoint_path, load_model, taps_path};

/// The model vocabulary for a mode: raw mode wraps the mined frequency
/// vocabulary, abstract mode closes over idioms plus every placeholder up
/// to the index cap.
pub fn model_vocab(config: &PipelineConfig, mode: Mode) -> Result<ModelVocab, CliError> {
    let vocab_path = config.output_dir.join("raw").join("vocab.json");
    let idioms = with_path(read_vocabulary(&vocab_path), &vocab_path)?;
    Ok(match mode {
        Mode::RawCopy => ModelVocab::for_raw(&idioms),
        Mode::Abstract => ModelVocab::for_abstract(&idioms, DEFAULT_CATEGORY_CAP),
    })
}

/// Reads one split of the mode's dataset as encoded examples.
pub fn load_split(
    config: &PipelineConfig,
    mode: Mode,
    vocab: &ModelVocab,
    split: &str,
) -> Result<Vec<EncodedTap>, CliError> {
    let dir = config.mode_dir(mode);
    let path = taps_path(&dir, split);
    Ok(match mode {
        Mode::RawCopy => with_path(read_taps(&path), &path)?
            .iter()
            .map(|t| EncodedTap::from_tap(t, vocab))
            .collect(),
        Mode::Abstract => with_path(read_abstract_taps(&path), &path)?
            .iter()
            .map(|t| EncodedTap::from_abstract(t, vocab))
            .collect(),
    })
}

pub fn run(config: &PipelineConfig, resume: bool) -> Result<(), CliError> {
    let mode = config.mode;
    let vocab = model_vocab(config, mode)?;
    let train_set = load_split(config, mode, &vocab, "train")?;
    let val_set = load_split(config, mode, &vocab, "val")?;
    if train_set.is_empty() {
        return Err(CliError::Input("the training split is empty".into()));
    }

    let dir = config.mode_dir(mode);
    fs::create_dir_all(&dir)?;
    let ckpt = checkpoint_path(&dir);

    let (mut model, optimizer) = if resume {
        resume_model(&ckpt, &vocab)?
    } else {
        let hyper = HyperParams {
            d: config.model.d,
            h: config.model.h,
            vocab_size: vocab.len(),
            copy_enabled: mode.copy_enabled(),
            dropout_rate: config.model.dropout_rate,
            attention: config.model.attention,
        };
        let model = Seq2SeqModel::new(Seq2SeqParams::init(hyper, config.seed));
        (model, None)
    };
    log::info!(
        "{} examples, vocabulary {}, {} parameters",
        train_set.len(),
        vocab.len(),
        model.params.parameter_count()
    );

    let train_config = TrainConfig {
        epochs: config.train.epochs,
        batch_size: config.train.batch_size,
        lr: config.train.lr,
        optimizer: config.train.optimizer,
        patience: config.train.patience,
        seed: config.seed,
        stop_at_train_loss: config.train.stop_at_train_loss,
    };
    let (outcome, optimizer) =
        train_with_state(&mut model, &train_set, &val_set, &train_config, optimizer)?;

    save_checkpoint(&ckpt, &model, &vocab, Some(&optimizer))?;
    write_history_csv(&dir.join("history.csv"), &outcome.history)?;

    println!(
        "trained {} epochs; best validation loss {:.6} at epoch {}; optimizer step {}",
        outcome.history.len(),
        outcome.best_val_loss,
        outcome.best_epoch,
        optimizer.step
    );
    println!("checkpoint written to {}", ckpt.display());
    Ok(())
}

fn resume_model(
    ckpt: &Path,
    vocab: &ModelVocab,
) -> Result<(Seq2SeqModel<f64>, Option<OptimizerState<f64>>), CliError> {
    let (model, stored_vocab, optimizer) = load_model(ckpt)?;
    if stored_vocab.lexemes() != vocab.lexemes() {
        return Err(CliError::Input(format!(
            "checkpoint {} was trained with a different vocabulary ({} vs {} entries)",
            ckpt.display(),
            stored_vocab.len(),
            vocab.len()
        )));
    }
    log::info!("resuming from {}", ckpt.display());
    Ok((model, optimizer))
}
