//! Checkpoint files: a one-line JSON header followed by the raw parameter
//! payload as little-endian `f64`, content-hashed so corruption is caught
//! at load time.
//!
//! Payload layout: every parameter tensor in manifest order; then, when
//! Adam optimizer state is included, its first-moment tensors and then
//! its second-moment tensors in the same order. Values are stored as
//! `f64` regardless of the in-memory scalar type.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scalar::Scalar;

use super::encoding::ModelVocab;
use super::model::Seq2SeqModel;
use super::params::{HyperParams, Seq2SeqParams};
use super::train::{OptimizerKind, OptimizerState};
use super::NeuralError;

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct OptimizerHeader {
    kind: OptimizerKind,
    lr: f64,
    step: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    hyper: HyperParams,
    vocab: Vec<String>,
    tensors: Vec<(String, Vec<usize>)>,
    optimizer: Option<OptimizerHeader>,
    payload_sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn push_tensors<F: Scalar>(payload: &mut Vec<u8>, rows: impl Iterator<Item = F>) {
    for v in rows {
        payload.extend_from_slice(&v.to_f64().to_le_bytes());
    }
}

/// Writes a model (and optionally its optimizer state) to `path`.
pub fn save_checkpoint<F: Scalar>(
    path: &Path,
    model: &Seq2SeqModel<F>,
    vocab: &ModelVocab,
    optimizer: Option<&OptimizerState<F>>,
) -> Result<(), NeuralError> {
    assert_eq!(
        vocab.len(),
        model.hyper().vocab_size,
        "vocabulary must match the model"
    );
    let mut payload = Vec::new();
    for (_, tensor) in model.params.ordered() {
        push_tensors(&mut payload, tensor.values.iter().copied());
    }
    if let Some(opt) = optimizer {
        if opt.kind == OptimizerKind::Adam {
            for row in &opt.m {
                push_tensors(&mut payload, row.iter().copied());
            }
            for row in &opt.v {
                push_tensors(&mut payload, row.iter().copied());
            }
        }
    }

    let header = Header {
        version: FORMAT_VERSION,
        hyper: model.hyper().clone(),
        vocab: vocab.lexemes().to_vec(),
        tensors: model.hyper().manifest(),
        optimizer: optimizer.map(|o| OptimizerHeader {
            kind: o.kind,
            lr: o.lr,
            step: o.step,
        }),
        payload_sha256: sha256_hex(&payload),
    };
    let mut bytes = serde_json::to_string(&header)?.into_bytes();
    bytes.push(b'\n');
    bytes.extend_from_slice(&payload);
    fs::write(path, bytes)?;
    Ok(())
}

fn corrupt(reason: impl Into<String>) -> NeuralError {
    NeuralError::CorruptCheckpoint {
        reason: reason.into(),
    }
}

/// Loads a checkpoint, verifying the content hash and the tensor layout
/// before accepting any value.
#[allow(clippy::type_complexity)]
pub fn load_checkpoint<F: Scalar>(
    path: &Path,
) -> Result<(Seq2SeqModel<F>, ModelVocab, Option<OptimizerState<F>>), NeuralError> {
    let bytes = fs::read(path)?;
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| corrupt("missing header line"))?;
    let header: Header = serde_json::from_slice(&bytes[..split])
        .map_err(|e| corrupt(format!("unreadable header: {e}")))?;
    let payload = &bytes[split + 1..];

    if header.version != FORMAT_VERSION {
        return Err(corrupt(format!(
            "unsupported format version {}",
            header.version
        )));
    }
    if sha256_hex(payload) != header.payload_sha256 {
        return Err(corrupt("content hash mismatch"));
    }
    if header.tensors != header.hyper.manifest() {
        return Err(corrupt("tensor manifest does not match hyperparameters"));
    }
    if header.vocab.len() != header.hyper.vocab_size {
        return Err(corrupt("vocabulary size does not match hyperparameters"));
    }

    let param_count: usize = header
        .tensors
        .iter()
        .map(|(_, shape)| shape.iter().product::<usize>())
        .sum();
    let with_moments = matches!(
        header.optimizer,
        Some(OptimizerHeader {
            kind: OptimizerKind::Adam,
            ..
        })
    );
    let expected = param_count * 8 * if with_moments { 3 } else { 1 };
    if payload.len() != expected {
        return Err(corrupt(format!(
            "payload holds {} bytes, expected {expected}",
            payload.len()
        )));
    }

    let mut cursor = 0usize;
    let mut read_block = |len: usize| -> Vec<F> {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let mut raw = [0u8; 8];
            raw.copy_from_slice(&payload[cursor..cursor + 8]);
            cursor += 8;
            out.push(F::from_f64(f64::from_le_bytes(raw)));
        }
        out
    };

    let mut params = Seq2SeqParams::<F>::zeros(header.hyper.clone());
    for (name, shape) in &header.tensors {
        let values = read_block(shape.iter().product());
        params.get_mut(name).values = values;
    }

    let optimizer = match header.optimizer {
        None => None,
        Some(opt) => {
            let (m, v) = if opt.kind == OptimizerKind::Adam {
                let m: Vec<Vec<F>> = header
                    .tensors
                    .iter()
                    .map(|(_, shape)| read_block(shape.iter().product()))
                    .collect();
                let v: Vec<Vec<F>> = header
                    .tensors
                    .iter()
                    .map(|(_, shape)| read_block(shape.iter().product()))
                    .collect();
                (m, v)
            } else {
                (Vec::new(), Vec::new())
            };
            Some(OptimizerState {
                kind: opt.kind,
                lr: opt.lr,
                step: opt.step,
                m,
                v,
            })
        }
    };

    let vocab = ModelVocab::from_lexemes(header.vocab);
    Ok((Seq2SeqModel::new(params), vocab, optimizer))
}
