//! Model parameters: named tensors in a fixed manifest order.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::tensor::Tensor;

/// Attention scoring function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AttentionKind {
    /// Learned additive scoring: v · tanh(W_enc·state + W_dec·query + b).
    #[default]
    Additive,
    /// Plain dot product between state and query.
    Dot,
}

/// Architecture hyperparameters. `d` is the embedding size, `h` the
/// encoder hidden size per direction; the decoder runs at `2h` so the
/// concatenated bidirectional states feed it without reshaping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub d: usize,
    pub h: usize,
    pub vocab_size: usize,
    pub copy_enabled: bool,
    pub dropout_rate: f64,
    pub attention: AttentionKind,
}

impl HyperParams {
    pub fn new(d: usize, h: usize, vocab_size: usize, copy_enabled: bool) -> Self {
        HyperParams {
            d,
            h,
            vocab_size,
            copy_enabled,
            dropout_rate: 0.2,
            attention: AttentionKind::Additive,
        }
    }

    /// Decoder (and attention-context) width.
    pub fn dec_h(&self) -> usize {
        2 * self.h
    }

    /// The canonical tensor list: `(name, shape)` in declared order. The
    /// checkpoint payload and every gradient walk use exactly this order.
    pub fn manifest(&self) -> Vec<(String, Vec<usize>)> {
        let (d, h, v) = (self.d, self.h, self.vocab_size);
        let dh = self.dec_h();
        let mut m: Vec<(String, Vec<usize>)> = vec![
            ("embedding".into(), vec![v, d]),
            ("enc_fwd.w_ih".into(), vec![4 * h, d]),
            ("enc_fwd.w_hh".into(), vec![4 * h, h]),
            ("enc_fwd.bias".into(), vec![4 * h]),
            ("enc_bwd.w_ih".into(), vec![4 * h, d]),
            ("enc_bwd.w_hh".into(), vec![4 * h, h]),
            ("enc_bwd.bias".into(), vec![4 * h]),
            ("bridge.h0.w".into(), vec![dh, dh]),
            ("bridge.h0.b".into(), vec![dh]),
            ("bridge.c0.w".into(), vec![dh, dh]),
            ("bridge.c0.b".into(), vec![dh]),
            ("bridge.h1.w".into(), vec![dh, dh]),
            ("bridge.h1.b".into(), vec![dh]),
            ("bridge.c1.w".into(), vec![dh, dh]),
            ("bridge.c1.b".into(), vec![dh]),
            ("dec0.w_ih".into(), vec![4 * dh, d + dh]),
            ("dec0.w_hh".into(), vec![4 * dh, dh]),
            ("dec0.bias".into(), vec![4 * dh]),
            ("dec1.w_ih".into(), vec![4 * dh, dh]),
            ("dec1.w_hh".into(), vec![4 * dh, dh]),
            ("dec1.bias".into(), vec![4 * dh]),
            ("out.w".into(), vec![v, dh]),
            ("out.b".into(), vec![v]),
        ];
        if self.attention == AttentionKind::Additive {
            m.push(("attn.w_enc".into(), vec![h, dh]));
            m.push(("attn.w_dec".into(), vec![h, dh]));
            m.push(("attn.bias".into(), vec![h]));
            m.push(("attn.v".into(), vec![h]));
        }
        if self.copy_enabled {
            m.push(("copy.w_ctx".into(), vec![dh]));
            m.push(("copy.w_state".into(), vec![dh]));
            m.push(("copy.w_input".into(), vec![d + dh]));
            m.push(("copy.b".into(), vec![1]));
        }
        m
    }
}

/// The full parameter set of one seq2seq model.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqParams<F: Scalar> {
    pub hyper: HyperParams,
    tensors: BTreeMap<String, Tensor<F>>,
}

impl<F: Scalar> Seq2SeqParams<F> {
    /// Uniform(−0.08, 0.08) initialization, seeded.
    pub fn init(hyper: HyperParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = hyper
            .manifest()
            .into_iter()
            .map(|(name, shape)| {
                let t = Tensor::uniform(shape, 0.08, &mut rng);
                (name, t)
            })
            .collect();
        Seq2SeqParams { hyper, tensors }
    }

    /// All-zero parameters (shape smoke tests).
    pub fn zeros(hyper: HyperParams) -> Self {
        let tensors = hyper
            .manifest()
            .into_iter()
            .map(|(name, shape)| (name.clone(), Tensor::zeros(shape)))
            .collect();
        Seq2SeqParams { hyper, tensors }
    }

    pub fn get(&self, name: &str) -> &Tensor<F> {
        self.tensors
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter tensor {name}"))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor<F> {
        self.tensors
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter tensor {name}"))
    }

    /// Tensors in manifest order.
    pub fn ordered(&self) -> Vec<(&str, &Tensor<F>)> {
        self.hyper
            .manifest()
            .into_iter()
            .map(|(name, _)| {
                let (key, tensor) = self
                    .tensors
                    .get_key_value(&name)
                    .expect("manifest tensor present");
                (key.as_str(), tensor)
            })
            .collect()
    }

    /// Replaces every tensor's values from `flat`, one entry per manifest
    /// tensor. Shapes must match.
    pub fn load_values(&mut self, flat: Vec<Vec<F>>) {
        let manifest = self.hyper.manifest();
        assert_eq!(manifest.len(), flat.len(), "tensor count mismatch");
        for ((name, shape), values) in manifest.into_iter().zip(flat) {
            assert_eq!(
                shape.iter().product::<usize>(),
                values.len(),
                "shape mismatch for {name}"
            );
            let t = self.tensors.get_mut(&name).expect("manifest tensor");
            t.values = values;
        }
    }

    /// Total scalar count across all tensors.
    pub fn parameter_count(&self) -> usize {
        self.tensors.values().map(|t| t.len()).sum()
    }

    /// Converts the numeric type (used by the f64-only checkpoint format).
    pub fn convert<G: Scalar>(&self) -> Seq2SeqParams<G> {
        let tensors = self
            .tensors
            .iter()
            .map(|(name, t)| {
                let values = t.values.iter().map(|&v| G::from_f64(v.to_f64())).collect();
                (
                    name.clone(),
                    Tensor::from_values(t.shape.clone(), values),
                )
            })
            .collect();
        Seq2SeqParams {
            hyper: self.hyper.clone(),
            tensors,
        }
    }
}
