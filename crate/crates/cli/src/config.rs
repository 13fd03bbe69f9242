//! Pipeline configuration: one JSON document, fully overridable from the
//! command line (flags win).

use std::fs;
use std::path::{Path, PathBuf};

use assertgen_core::neural::{AttentionKind, OptimizerKind};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{with_path, CliError};

/// Which dataset the model trains on, and with it whether the copy
/// mechanism is active: raw source benefits from copying out-of-vocabulary
/// tokens straight from the input, abstracted source has a closed
/// vocabulary and does not need it.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Raw token sequences, copy mechanism enabled.
    #[default]
    #[value(name = "raw_copy")]
    RawCopy,
    /// Abstracted token sequences, copy mechanism disabled.
    #[value(name = "abstract")]
    Abstract,
}

impl Mode {
    pub fn copy_enabled(self) -> bool {
        matches!(self, Mode::RawCopy)
    }

    /// Artifact subdirectory for this mode.
    pub fn dir_name(self) -> &'static str {
        match self {
            Mode::RawCopy => "raw",
            Mode::Abstract => "abstract",
        }
    }
}

/// Model size and regularization settings (the vocabulary size and the
/// copy switch are derived at train time from the dataset and the mode).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSettings {
    /// Embedding width.
    pub d: usize,
    /// Encoder hidden width per direction (the decoder runs at twice this).
    pub h: usize,
    pub dropout_rate: f64,
    pub attention: AttentionKind,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings {
            d: 64,
            h: 64,
            dropout_rate: 0.2,
            attention: AttentionKind::Additive,
        }
    }
}

/// Training-loop settings (the seed lives at the top level so one value
/// drives the split, the init, and the shuffle).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub optimizer: OptimizerKind,
    pub patience: usize,
    pub stop_at_train_loss: Option<f64>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            epochs: 10,
            batch_size: 32,
            lr: 1e-3,
            optimizer: OptimizerKind::Adam,
            patience: 5,
            stop_at_train_loss: None,
        }
    }
}

fn default_vocab_capacity() -> usize {
    1000
}

fn default_max_context_tokens() -> usize {
    1000
}

fn default_split_ratios() -> (f64, f64, f64) {
    (0.8, 0.1, 0.1)
}

fn default_beam_sizes() -> Vec<usize> {
    assertgen_core::evalkit::default_beam_sizes()
}

fn default_max_decode_tokens() -> usize {
    64
}

/// Everything one pipeline run needs. Only `corpus_dir` and `output_dir`
/// are required in the JSON; the rest default to the standard protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Directory of Java projects to mine (one subdirectory per project).
    pub corpus_dir: PathBuf,
    /// Directory all artifacts are written under.
    pub output_dir: PathBuf,
    /// Lexemes kept in the frequency vocabulary.
    #[serde(default = "default_vocab_capacity")]
    pub vocab_capacity: usize,
    /// Context length above which a TAP is dropped.
    #[serde(default = "default_max_context_tokens")]
    pub max_context_tokens: usize,
    /// Train/validation/test fractions; must sum to 1.
    #[serde(default = "default_split_ratios")]
    pub split_ratios: (f64, f64, f64),
    /// Drives the dataset split, parameter init and epoch shuffles.
    #[serde(default)]
    pub seed: u64,
    /// Only mine projects whose pom.xml declares JUnit 4.
    #[serde(default)]
    pub require_junit4: bool,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub model: ModelSettings,
    #[serde(default)]
    pub train: TrainSettings,
    /// Beam sizes reported by eval and swept by the timing harness;
    /// inference decodes with the largest.
    #[serde(default = "default_beam_sizes")]
    pub beam_sizes: Vec<usize>,
    /// Longest assert (in tokens, stop symbol included) decoding may emit.
    #[serde(default = "default_max_decode_tokens")]
    pub max_decode_tokens: usize,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = with_path(fs::read_to_string(path), path)?;
        let config: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.beam_sizes.is_empty() {
            return Err(CliError::Input("beam_sizes must not be empty".into()));
        }
        if self.beam_sizes.iter().any(|&k| k == 0) {
            return Err(CliError::Input("beam sizes must be at least 1".into()));
        }
        if self.vocab_capacity == 0 {
            return Err(CliError::Input("vocab_capacity must be at least 1".into()));
        }
        if self.max_decode_tokens < 2 {
            return Err(CliError::Input(
                "max_decode_tokens must leave room for a token and the stop symbol".into(),
            ));
        }
        Ok(())
    }

    /// Artifact directory for the given mode, created on demand.
    pub fn mode_dir(&self, mode: Mode) -> PathBuf {
        self.output_dir.join(mode.dir_name())
    }

    /// Widest beam: what inference decodes with so every reported beam
    /// size has enough candidates.
    pub fn max_beam(&self) -> usize {
        self.beam_sizes.iter().copied().max().unwrap_or(1)
    }
}

/// Command-line overrides; every field wins over the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Pipeline configuration file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Dataset/model mode.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,

    /// Single beam size (replaces the configured sweep).
    #[arg(long, global = true, value_name = "K")]
    pub beam: Option<usize>,

    /// Random seed for split, init and shuffling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Only mine projects whose pom.xml declares JUnit 4.
    #[arg(long, global = true)]
    pub require_junit4: bool,

    /// Frequency-vocabulary capacity.
    #[arg(long, global = true, value_name = "N")]
    pub vocab_capacity: Option<usize>,

    /// Maximum context length in tokens.
    #[arg(long = "max-tokens", global = true, value_name = "N")]
    pub max_tokens: Option<usize>,
}

impl Overrides {
    /// Loads the config file and applies the flags on top.
    pub fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let path = self.config.as_deref().ok_or_else(|| {
            CliError::Input("no configuration given; pass --config <file>".into())
        })?;
        let mut config = PipelineConfig::load(path)?;
        if let Some(mode) = self.mode {
            config.mode = mode;
        }
        if let Some(k) = self.beam {
            config.beam_sizes = vec![k];
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if self.require_junit4 {
            config.require_junit4 = true;
        }
        if let Some(n) = self.vocab_capacity {
            config.vocab_capacity = n;
        }
        if let Some(n) = self.max_tokens {
            config.max_context_tokens = n;
        }
        config.validate()?;
        Ok(config)
    }
}
