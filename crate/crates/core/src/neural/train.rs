//! Mini-batch training with Adam or plain SGD, early stopping on
//! validation loss, and a best-checkpoint rollback.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::encoding::EncodedTap;
use super::model::Seq2SeqModel;
use super::params::Seq2SeqParams;
use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Optimizer state across updates. Adam keeps first/second moment
/// estimates per parameter tensor (manifest order); SGD keeps none.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<F: Scalar> {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub step: u64,
    pub m: Vec<Vec<F>>,
    pub v: Vec<Vec<F>>,
}

impl<F: Scalar> OptimizerState<F> {
    pub fn new(params: &Seq2SeqParams<F>, kind: OptimizerKind, lr: f64) -> Self {
        let (m, v) = match kind {
            OptimizerKind::Adam => {
                let zeros: Vec<Vec<F>> = params
                    .ordered()
                    .iter()
                    .map(|(_, t)| vec![F::zero(); t.len()])
                    .collect();
                (zeros.clone(), zeros)
            }
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
        };
        OptimizerState {
            kind,
            lr,
            step: 0,
            m,
            v,
        }
    }

    /// One update from gradients in manifest order.
    pub fn apply(&mut self, params: &mut Seq2SeqParams<F>, grads: &[Vec<F>]) {
        let names: Vec<String> = params
            .ordered()
            .iter()
            .map(|(n, _)| n.to_string())
            .collect();
        assert_eq!(names.len(), grads.len(), "one gradient per tensor");
        self.step += 1;
        let lr = F::from_f64(self.lr);
        match self.kind {
            OptimizerKind::Sgd => {
                for (name, grad) in names.iter().zip(grads) {
                    let tensor = params.get_mut(name);
                    for (p, g) in tensor.values.iter_mut().zip(grad) {
                        *p = *p - lr * *g;
                    }
                }
            }
            OptimizerKind::Adam => {
                let b1 = F::from_f64(ADAM_BETA1);
                let b2 = F::from_f64(ADAM_BETA2);
                let eps = F::from_f64(ADAM_EPS);
                let one = F::one();
                let bias1 = F::from_f64(1.0 - ADAM_BETA1.powi(self.step as i32));
                let bias2 = F::from_f64(1.0 - ADAM_BETA2.powi(self.step as i32));
                for (i, (name, grad)) in names.iter().zip(grads).enumerate() {
                    let tensor = params.get_mut(name);
                    for (j, (p, g)) in tensor.values.iter_mut().zip(grad).enumerate() {
                        let m = b1 * self.m[i][j] + (one - b1) * *g;
                        let v = b2 * self.v[i][j] + (one - b2) * *g * *g;
                        self.m[i][j] = m;
                        self.v[i][j] = v;
                        let m_hat = m / bias1;
                        let v_hat = v / bias2;
                        *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
    }
}

/// Training-run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub optimizer: OptimizerKind,
    /// Consecutive non-improving validation evaluations tolerated before
    /// stopping. Zero stops after the very first evaluation.
    pub patience: usize,
    pub seed: u64,
    /// Optional hard stop once the epoch's training loss drops to or
    /// below this value.
    pub stop_at_train_loss: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            lr: 1e-4,
            optimizer: OptimizerKind::Adam,
            patience: 5,
            seed: 0,
            stop_at_train_loss: None,
        }
    }
}

/// Per-epoch progress row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub seconds: f64,
}

/// What a training run produced. The model itself is left at the best
/// validation parameters.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: Vec<EpochStats>,
    pub best_val_loss: f64,
    pub best_epoch: usize,
}

/// Trains in place. Examples are shuffled per epoch; each mini-batch
/// accumulates per-example gradients, averages them, and applies one
/// optimizer update. Validation runs with dropout off; when the
/// validation set is empty the training loss doubles as the signal.
pub fn train<F: Scalar>(
    model: &mut Seq2SeqModel<F>,
    train_set: &[EncodedTap],
    val_set: &[EncodedTap],
    config: &TrainConfig,
) -> Result<TrainOutcome, NeuralError> {
    train_with_state(model, train_set, val_set, config, None).map(|(outcome, _)| outcome)
}

/// [`train`], but optionally seeded with a previous optimizer state (for
/// resuming from a checkpoint: moment estimates and the step counter carry
/// over) and returning the final state alongside the outcome. The returned
/// optimizer reflects the last update applied, while the model is left at
/// the best validation parameters.
pub fn train_with_state<F: Scalar>(
    model: &mut Seq2SeqModel<F>,
    train_set: &[EncodedTap],
    val_set: &[EncodedTap],
    config: &TrainConfig,
    resume_from: Option<OptimizerState<F>>,
) -> Result<(TrainOutcome, OptimizerState<F>), NeuralError> {
    if train_set.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = resume_from
        .unwrap_or_else(|| OptimizerState::new(&model.params, config.optimizer, config.lr));

    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut best_params = model.params.clone();
    let mut no_improve = 0usize;

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size.max(1)) {
            let mut accum: Vec<Vec<F>> = model
                .params
                .ordered()
                .iter()
                .map(|(_, t)| vec![F::zero(); t.len()])
                .collect();
            for &idx in batch {
                let mut session = model.training_session(rng.gen());
                let loss = session.loss(&train_set[idx])?;
                loss_sum += session.graph.values(loss)[0].to_f64();
                session.backward(loss);
                for (acc, grad) in accum.iter_mut().zip(session.param_grads()) {
                    for (a, g) in acc.iter_mut().zip(grad) {
                        *a = *a + g;
                    }
                }
            }
            let scale = F::from_f64(1.0 / batch.len() as f64);
            for acc in &mut accum {
                for a in acc.iter_mut() {
                    *a = *a * scale;
                }
            }
            optimizer.apply(&mut model.params, &accum);
        }
        let train_loss = loss_sum / train_set.len() as f64;

        let val_loss = if val_set.is_empty() {
            train_loss
        } else {
            mean_loss(model, val_set)?
        };
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            seconds: started.elapsed().as_secs_f64(),
        });

        if let Some(threshold) = config.stop_at_train_loss {
            if train_loss <= threshold {
                if val_loss < best_val {
                    best_val = val_loss;
                    best_epoch = epoch;
                    best_params = model.params.clone();
                }
                break;
            }
        }

        if val_loss < best_val {
            best_val = val_loss;
            best_epoch = epoch;
            best_params = model.params.clone();
            no_improve = 0;
        } else {
            no_improve += 1;
        }
        if no_improve >= config.patience {
            break;
        }
    }

    model.params = best_params;
    Ok((
        TrainOutcome {
            history,
            best_val_loss: best_val,
            best_epoch,
        },
        optimizer,
    ))
}

/// Mean inference-mode loss over a set.
pub fn mean_loss<F: Scalar>(
    model: &Seq2SeqModel<F>,
    set: &[EncodedTap],
) -> Result<f64, NeuralError> {
    if set.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let mut sum = 0.0;
    for tap in set {
        sum += model.loss(tap)?;
    }
    Ok(sum / set.len() as f64)
}

/// Writes the per-epoch history as CSV.
pub fn write_history_csv(path: &std::path::Path, history: &[EpochStats]) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "epoch,train_loss,val_loss,seconds")?;
    for row in history {
        writeln!(
            out,
            "{},{},{},{}",
            row.epoch, row.train_loss, row.val_loss, row.seconds
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::encoding::STOP_ID;
    use crate::neural::params::HyperParams;

    fn tiny_hyper(copy: bool) -> HyperParams {
        let mut h = HyperParams::new(4, 4, 12, copy);
        h.dropout_rate = 0.0;
        h
    }

    fn tiny_model(copy: bool, seed: u64) -> Seq2SeqModel<f64> {
        Seq2SeqModel::new(Seq2SeqParams::init(tiny_hyper(copy), seed))
    }

    fn tap(id: &str, input: &[usize], target: &[usize]) -> EncodedTap {
        let mut t = target.to_vec();
        t.push(STOP_ID);
        EncodedTap {
            id: id.into(),
            input_embed_ids: input.to_vec(),
            input_ext_ids: input.to_vec(),
            target_ext_ids: t,
            oov_lexemes: vec![],
        }
    }

    #[test]
    fn sgd_update_is_p_minus_lr_g() {
        let mut params = Seq2SeqParams::<f64>::init(tiny_hyper(false), 1);
        let before = params.get("out.b").values.clone();
        let mut opt = OptimizerState::new(&params, OptimizerKind::Sgd, 0.5);
        let grads: Vec<Vec<f64>> = params
            .ordered()
            .iter()
            .map(|(name, t)| {
                if *name == "out.b" {
                    vec![2.0; t.len()]
                } else {
                    vec![0.0; t.len()]
                }
            })
            .collect();
        opt.apply(&mut params, &grads);
        for (after, b) in params.get("out.b").values.iter().zip(&before) {
            assert!((after - (b - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn adam_first_step_matches_formula() {
        let mut params = Seq2SeqParams::<f64>::init(tiny_hyper(false), 2);
        let before = params.get("out.b").values[0];
        let g = 3.0;
        let mut opt = OptimizerState::new(&params, OptimizerKind::Adam, 0.01);
        let grads: Vec<Vec<f64>> = params
            .ordered()
            .iter()
            .map(|(name, t)| {
                let mut z = vec![0.0; t.len()];
                if *name == "out.b" {
                    z[0] = g;
                }
                z
            })
            .collect();
        opt.apply(&mut params, &grads);
        // Step 1: m_hat = g, v_hat = g^2, delta = lr * g / (|g| + eps).
        let expected = before - 0.01 * g / (g.abs() + 1e-8);
        let after = params.get("out.b").values[0];
        assert!((after - expected).abs() < 1e-12, "{after} vs {expected}");
        assert_eq!(opt.step, 1);
    }

    #[test]
    fn adam_zero_grad_coordinates_stay_put() {
        let mut params = Seq2SeqParams::<f64>::init(tiny_hyper(false), 3);
        let before = params.get("embedding").values.clone();
        let mut opt = OptimizerState::new(&params, OptimizerKind::Adam, 0.01);
        let grads: Vec<Vec<f64>> = params
            .ordered()
            .iter()
            .map(|(name, t)| {
                if *name == "out.b" {
                    vec![1.0; t.len()]
                } else {
                    vec![0.0; t.len()]
                }
            })
            .collect();
        opt.apply(&mut params, &grads);
        assert_eq!(&params.get("embedding").values, &before);
    }

    #[test]
    fn training_reduces_loss() {
        let mut model = tiny_model(false, 7);
        let data = vec![tap("a", &[4, 5], &[6]), tap("b", &[6, 7], &[4])];
        let config = TrainConfig {
            epochs: 40,
            batch_size: 2,
            lr: 0.01,
            optimizer: OptimizerKind::Adam,
            patience: 40,
            seed: 1,
            stop_at_train_loss: None,
        };
        let outcome = train(&mut model, &data, &data, &config).unwrap();
        let first = outcome.history.first().unwrap().train_loss;
        let last = outcome.history.last().unwrap().train_loss;
        assert!(
            last < first * 0.5,
            "loss should fall substantially: {first} -> {last}"
        );
    }

    #[test]
    fn patience_zero_stops_after_one_evaluation() {
        let mut model = tiny_model(false, 8);
        let data = vec![tap("a", &[4], &[5])];
        let config = TrainConfig {
            epochs: 50,
            patience: 0,
            lr: 0.001,
            ..TrainConfig::default()
        };
        let outcome = train(&mut model, &data, &data, &config).unwrap();
        assert_eq!(outcome.history.len(), 1);
    }

    #[test]
    fn loss_threshold_stops_immediately_when_met() {
        let mut model = tiny_model(false, 9);
        let data = vec![tap("a", &[4], &[5])];
        let config = TrainConfig {
            epochs: 50,
            stop_at_train_loss: Some(1e9),
            ..TrainConfig::default()
        };
        let outcome = train(&mut model, &data, &data, &config).unwrap();
        assert_eq!(outcome.history.len(), 1);
    }

    #[test]
    fn same_seed_same_run() {
        let data = vec![tap("a", &[4, 5], &[6]), tap("b", &[6], &[7, 4])];
        let config = TrainConfig {
            epochs: 3,
            batch_size: 1,
            lr: 0.01,
            patience: 10,
            seed: 42,
            ..TrainConfig::default()
        };
        let mut m1 = tiny_model(true, 11);
        let o1 = train(&mut m1, &data, &data, &config).unwrap();
        let mut m2 = tiny_model(true, 11);
        let o2 = train(&mut m2, &data, &data, &config).unwrap();
        assert_eq!(m1.params, m2.params);
        for (a, b) in o1.history.iter().zip(&o2.history) {
            assert_eq!(a.train_loss, b.train_loss);
            assert_eq!(a.val_loss, b.val_loss);
        }
    }

    #[test]
    fn model_is_left_at_best_validation_params() {
        let mut model = tiny_model(false, 13);
        let data = vec![tap("a", &[4, 5], &[6]), tap("b", &[7], &[5])];
        let config = TrainConfig {
            epochs: 8,
            batch_size: 2,
            lr: 0.02,
            patience: 8,
            seed: 3,
            ..TrainConfig::default()
        };
        let outcome = train(&mut model, &data, &data, &config).unwrap();
        let min_val = outcome
            .history
            .iter()
            .map(|r| r.val_loss)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(outcome.best_val_loss, min_val);
        let recomputed = mean_loss(&model, &data).unwrap();
        assert!((recomputed - outcome.best_val_loss).abs() < 1e-12);
    }

    #[test]
    fn empty_training_set_is_an_error() {
        let mut model = tiny_model(false, 1);
        let err = train(&mut model, &[], &[], &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, NeuralError::EmptyDataset));
    }

    #[test]
    fn resumed_optimizer_continues_the_step_count() {
        let data = vec![tap("a", &[4, 5], &[6]), tap("b", &[6], &[7, 4])];
        let config = TrainConfig {
            epochs: 2,
            batch_size: 1,
            lr: 0.01,
            patience: 10,
            seed: 42,
            ..TrainConfig::default()
        };
        let mut model = tiny_model(false, 11);
        let (_, state) = train_with_state(&mut model, &data, &data, &config, None).unwrap();
        // 2 epochs x 2 examples at batch size 1 = 4 optimizer steps.
        assert_eq!(state.step, 4);
        let (_, resumed) =
            train_with_state(&mut model, &data, &data, &config, Some(state)).unwrap();
        assert_eq!(resumed.step, 8);
    }

    #[test]
    fn fresh_state_matches_plain_train() {
        let data = vec![tap("a", &[4, 5], &[6])];
        let config = TrainConfig {
            epochs: 3,
            batch_size: 1,
            lr: 0.02,
            patience: 10,
            seed: 5,
            ..TrainConfig::default()
        };
        let mut m1 = tiny_model(true, 7);
        let mut m2 = tiny_model(true, 7);
        train(&mut m1, &data, &[], &config).unwrap();
        train_with_state(&mut m2, &data, &[], &config, None).unwrap();
        assert_eq!(m1.params, m2.params);
    }

    #[test]
    fn history_csv_round_trip_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.csv");
        let history = vec![
            EpochStats {
                epoch: 1,
                train_loss: 2.5,
                val_loss: 2.25,
                seconds: 0.5,
            },
            EpochStats {
                epoch: 2,
                train_loss: 1.5,
                val_loss: 1.75,
                seconds: 0.4,
            },
        ];
        write_history_csv(&path, &history).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "epoch,train_loss,val_loss,seconds");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,2.5,2.25,"));
    }
}
