//! Whole-model gradient verification against central finite differences.
//!
//! Runs in double precision with dropout disabled: dropout masks are
//! resampled per session, which would make the two perturbed losses
//! incomparable.

use super::encoding::EncodedTap;
use super::model::Seq2SeqModel;

/// Worst relative disagreement for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub max_rel_err: f64,
}

/// Compares every parameter coordinate's analytic gradient with a central
/// finite difference of the loss (`(f(θ+ε) − f(θ−ε)) / 2ε`) and reports
/// the worst relative error per tensor. The relative error denominator is
/// floored at `1e-5` so coordinates whose true gradient vanishes compare
/// on the absolute scale instead of dividing by zero.
pub fn gradient_check(
    model: &Seq2SeqModel<f64>,
    tap: &EncodedTap,
    eps: f64,
) -> Vec<TensorCheck> {
    let analytic: Vec<Vec<f64>> = {
        let mut session = model.session();
        let loss = session.loss(tap).expect("loss must be computable");
        session.backward(loss);
        session.param_grads()
    };

    let names: Vec<String> = model
        .params
        .ordered()
        .iter()
        .map(|(n, _)| n.to_string())
        .collect();

    let mut probe = model.clone();
    let mut report = Vec::with_capacity(names.len());
    for (t_idx, name) in names.iter().enumerate() {
        let len = probe.params.get(name).len();
        let mut worst = 0.0f64;
        for j in 0..len {
            let original = probe.params.get(name).values[j];
            probe.params.get_mut(name).values[j] = original + eps;
            let plus = probe.loss(tap).expect("perturbed loss");
            probe.params.get_mut(name).values[j] = original - eps;
            let minus = probe.loss(tap).expect("perturbed loss");
            probe.params.get_mut(name).values[j] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic[t_idx][j];
            let denom = a.abs().max(numeric.abs()).max(1e-5);
            worst = worst.max((a - numeric).abs() / denom);
        }
        report.push(TensorCheck {
            name: name.clone(),
            max_rel_err: worst,
        });
    }
    report
}

/// Convenience: the single worst relative error across all tensors.
pub fn max_gradient_error(model: &Seq2SeqModel<f64>, tap: &EncodedTap, eps: f64) -> f64 {
    gradient_check(model, tap, eps)
        .into_iter()
        .map(|c| c.max_rel_err)
        .fold(0.0, f64::max)
}
