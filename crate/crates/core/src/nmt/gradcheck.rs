use rand::Rng;
use serde::Serialize;

use super::model::{nll_loss, Example, Params, Seq2SeqModel};
use crate::error::{Error, Result};
use crate::util::rng;

/// Gradients smaller than this are compared on an absolute scale.
const REL_FLOOR: f64 = 1e-7;

/// Step for the difference stencil.
pub const DEFAULT_EPS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorCheck {
    pub name: String,
    pub samples: usize,
    pub max_rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub samples: usize,
    pub tensors: Vec<TensorCheck>,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Analytic gradient of the mean per-sentence loss.
pub fn analytic_gradient(model: &Seq2SeqModel, batch: &[Example]) -> Result<Params> {
    if batch.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut g = model.params.zeros_like();
    for ex in batch {
        model.forward_backward(ex, true, Some(&mut g))?;
    }
    g.scale(1.0 / batch.len() as f64);
    Ok(g)
}

pub fn grad_check(model: &Seq2SeqModel, batch: &[Example], eps: f64, samples: usize, seed: u64) -> Result<GradCheckReport> {
    grad_check_with(model, batch, eps, samples, seed, |_| {})
}

/// Compares analytic gradients with fourth-order central differences,
/// `(-f(x+2e) + 8f(x+e) - 8f(x-e) + f(x-2e)) / 12e`, on `samples`
/// coordinates spread round-robin over every tensor. Within a tensor,
/// coordinates with a non-zero analytic gradient are preferred so sparse
/// tensors such as embeddings are exercised. `corrupt` may tamper with the
/// analytic gradient before comparison.
pub fn grad_check_with(
    model: &Seq2SeqModel,
    batch: &[Example],
    eps: f64,
    samples: usize,
    seed: u64,
    corrupt: impl FnOnce(&mut Params),
) -> Result<GradCheckReport> {
    let mut grad = analytic_gradient(model, batch)?;
    corrupt(&mut grad);
    let names: Vec<&'static str> = grad.tensors().iter().map(|(n, _)| *n).collect();
    let candidates: Vec<Vec<usize>> = grad
        .tensors()
        .iter()
        .map(|(_, m)| {
            let nz: Vec<usize> = (0..m.len()).filter(|&i| m.data()[i] != 0.0).collect();
            if nz.is_empty() {
                (0..m.len()).collect()
            } else {
                nz
            }
        })
        .collect();
    let mut r = rng(seed);
    let mut probe = model.clone();
    let mut tensors: Vec<TensorCheck> =
        names.iter().map(|n| TensorCheck { name: n.to_string(), samples: 0, max_rel_error: 0.0 }).collect();
    for s in 0..samples {
        let t = s % names.len();
        let idx = candidates[t][r.gen_range(0..candidates[t].len())];
        let original = probe.params.tensors()[t].1.data()[idx];
        let eval = |probe: &mut Seq2SeqModel, v: f64| -> Result<f64> {
            probe.params.tensors_mut()[t].1.data_mut()[idx] = v;
            nll_loss(probe, batch)
        };
        let p2 = eval(&mut probe, original + 2.0 * eps)?;
        let p1 = eval(&mut probe, original + eps)?;
        let m1 = eval(&mut probe, original - eps)?;
        let m2 = eval(&mut probe, original - 2.0 * eps)?;
        probe.params.tensors_mut()[t].1.data_mut()[idx] = original;
        let numeric = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * eps);
        let err = relative_error(grad.tensors()[t].1.data()[idx], numeric);
        tensors[t].samples += 1;
        tensors[t].max_rel_error = tensors[t].max_rel_error.max(err);
    }
    let max_rel_error = tensors.iter().map(|t| t.max_rel_error).fold(0.0, f64::max);
    Ok(GradCheckReport { max_rel_error, samples, tensors })
}
