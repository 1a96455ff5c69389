//! Two-hidden-layer tanh network over positional chunk-tag one-hots.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;
use crate::nmt::tensor::Matrix;
use crate::util::rng;

use super::chunk::{ChunkSequence, ChunkTag};
use super::{Label, LabeledDataset};

pub const HIDDEN: usize = 50;
pub const DEFAULT_MAX_LEN: usize = 40;
const SLOTS: usize = ChunkTag::ALL.len() + 1;
const PAD_SLOT: usize = ChunkTag::ALL.len();

/// One one-hot block of 8 slots (7 tags + padding) per position. Positions
/// past `max_len` are dropped, shorter sequences are padded.
pub fn encode_features(chunks: &ChunkSequence, max_len: usize) -> Vec<f64> {
    let mut v = vec![0.0; max_len * SLOTS];
    for pos in 0..max_len {
        let slot = chunks.tags.get(pos).map_or(PAD_SLOT, |t| t.index());
        v[pos * SLOTS + slot] = 1.0;
    }
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct FfnnConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub max_len: usize,
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for FfnnConfig {
    fn default() -> Self {
        FfnnConfig { lr: 0.001, epochs: 100, batch_size: 128, max_len: DEFAULT_MAX_LEN, seed: 0, init_scale: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FfnnModel {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub w3: Matrix,
    pub b3: Vec<f64>,
    pub in_dim: usize,
    pub max_len: usize,
}

struct Activations {
    h1: Vec<f64>,
    h2: Vec<f64>,
    out: Vec<f64>,
}

/// Gradient buffers laid out like the model.
#[derive(Clone, Debug)]
pub struct FfnnGrads {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub w3: Matrix,
    pub b3: Vec<f64>,
}

fn affine_tanh(w: &Matrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    w.matvec_block_add(x, 0, &mut z);
    z.iter_mut().for_each(|v| *v = v.tanh());
    z
}

/// Targets live in the tanh range: +1 for the true class, -1 otherwise.
pub fn target(label: Label) -> [f64; 2] {
    match label {
        Label::Simple => [1.0, -1.0],
        Label::Other => [-1.0, 1.0],
    }
}

impl FfnnModel {
    pub fn new(max_len: usize, seed: u64, init_scale: f64) -> Self {
        let in_dim = max_len * SLOTS;
        let mut r = rng(seed);
        let mut vec = |n: usize| Matrix::uniform(n, 1, init_scale, &mut r).data().to_vec();
        let (b1, b2, b3) = (vec(HIDDEN), vec(HIDDEN), vec(2));
        let mut r = rng(seed.wrapping_add(1));
        FfnnModel {
            w1: Matrix::uniform(HIDDEN, in_dim, init_scale, &mut r),
            b1,
            w2: Matrix::uniform(HIDDEN, HIDDEN, init_scale, &mut r),
            b2,
            w3: Matrix::uniform(2, HIDDEN, init_scale, &mut r),
            b3,
            in_dim,
            max_len,
        }
    }

    fn forward(&self, x: &[f64]) -> Activations {
        let h1 = affine_tanh(&self.w1, &self.b1, x);
        let h2 = affine_tanh(&self.w2, &self.b2, &h1);
        let out = affine_tanh(&self.w3, &self.b3, &h2);
        Activations { h1, h2, out }
    }

    /// Raw two-unit output, index 0 = Simple, index 1 = Other.
    pub fn output(&self, features: &[f64]) -> Result<[f64; 2]> {
        if features.len() != self.in_dim {
            return Err(Error::DimMismatch { expected: self.in_dim, got: features.len() });
        }
        let out = self.forward(features).out;
        Ok([out[0], out[1]])
    }

    fn zero_grads(&self) -> FfnnGrads {
        FfnnGrads {
            w1: Matrix::zeros(HIDDEN, self.in_dim),
            b1: vec![0.0; HIDDEN],
            w2: Matrix::zeros(HIDDEN, HIDDEN),
            b2: vec![0.0; HIDDEN],
            w3: Matrix::zeros(2, HIDDEN),
            b3: vec![0.0; 2],
        }
    }

    /// Mean squared error over a batch (averaged over items and both output
    /// units) together with its gradient.
    pub fn loss_and_grads(&self, batch: &[(Vec<f64>, Label)]) -> (f64, FfnnGrads) {
        let mut g = self.zero_grads();
        let mut loss = 0.0;
        let n = batch.len() as f64;
        for (x, label) in batch {
            let a = self.forward(x);
            let t = target(*label);
            let mut d3 = [0.0; 2];
            for k in 0..2 {
                let err = a.out[k] - t[k];
                loss += err * err / (2.0 * n);
                // d/d out of err^2 / (2n) summed over k is err / n
                d3[k] = err / n * (1.0 - a.out[k] * a.out[k]);
            }
            g.w3.add_outer(&d3, &a.h2);
            g.b3.iter_mut().zip(&d3).for_each(|(b, d)| *b += d);
            let mut d2 = vec![0.0; HIDDEN];
            self.w3.matvec_t_add(&d3, &mut d2);
            d2.iter_mut().zip(&a.h2).for_each(|(d, h)| *d *= 1.0 - h * h);
            g.w2.add_outer(&d2, &a.h1);
            g.b2.iter_mut().zip(&d2).for_each(|(b, d)| *b += d);
            let mut d1 = vec![0.0; HIDDEN];
            self.w2.matvec_t_add(&d2, &mut d1);
            d1.iter_mut().zip(&a.h1).for_each(|(d, h)| *d *= 1.0 - h * h);
            g.w1.add_outer(&d1, x);
            g.b1.iter_mut().zip(&d1).for_each(|(b, d)| *b += d);
        }
        (loss, g)
    }

    fn sgd_step(&mut self, g: &FfnnGrads, lr: f64) {
        self.w1.add_scaled(&g.w1, -lr);
        self.w2.add_scaled(&g.w2, -lr);
        self.w3.add_scaled(&g.w3, -lr);
        for (p, d) in [(&mut self.b1, &g.b1), (&mut self.b2, &g.b2), (&mut self.b3, &g.b3)] {
            p.iter_mut().zip(d).for_each(|(p, d)| *p -= lr * d);
        }
    }

    /// Mutable views of every parameter in a fixed order, for tests that
    /// perturb coordinates.
    pub fn params_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.data_mut(),
            &mut self.b1,
            self.w2.data_mut(),
            &mut self.b2,
            self.w3.data_mut(),
            &mut self.b3,
        ]
    }
}

impl FfnnGrads {
    pub fn params(&self) -> [&[f64]; 6] {
        [self.w1.data(), &self.b1, self.w2.data(), &self.b2, self.w3.data(), &self.b3]
    }
}

#[derive(Clone, Debug)]
pub struct FfnnFit {
    pub model: FfnnModel,
    /// Full-dataset loss after each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Mini-batch SGD on the mean squared error, deterministic for a given seed.
pub fn train_ffnn(data: &LabeledDataset, cfg: &FfnnConfig) -> Result<FfnnFit> {
    if cfg.lr <= 0.0 || cfg.epochs == 0 || cfg.batch_size == 0 || cfg.max_len == 0 {
        return Err(Error::Config("ffnn lr, epochs, batch_size and max_len must be positive".into()));
    }
    if data.items.len() < 2 {
        return Err(Error::Config("need at least two training items".into()));
    }
    match (data.count(Label::Simple), data.count(Label::Other)) {
        (0, _) => return Err(Error::SingleClass("Other")),
        (_, 0) => return Err(Error::SingleClass("Simple")),
        _ => {}
    }
    let encoded: Vec<(Vec<f64>, Label)> =
        data.items.iter().map(|(c, l)| (encode_features(c, cfg.max_len), *l)).collect();
    let mut model = FfnnModel::new(cfg.max_len, cfg.seed, cfg.init_scale);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut shuffle_rng = rng(cfg.seed ^ 0x5eed);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for idx in order.chunks(cfg.batch_size) {
            let batch: Vec<(Vec<f64>, Label)> = idx.iter().map(|&i| encoded[i].clone()).collect();
            let (_, g) = model.loss_and_grads(&batch);
            model.sgd_step(&g, cfg.lr);
        }
        epoch_losses.push(model.loss_and_grads(&encoded).0);
    }
    Ok(FfnnFit { model, epoch_losses })
}

/// Argmax over the two output units. Index 0 is Simple, index 1 Other; a
/// tie resolves to Other. The score is the winning unit's activation.
pub fn classify_ffnn(model: &FfnnModel, chunks: &ChunkSequence) -> Result<(Label, f64)> {
    classify_features(model, &encode_features(chunks, model.max_len))
}

pub fn classify_features(model: &FfnnModel, features: &[f64]) -> Result<(Label, f64)> {
    let out = model.output(features)?;
    Ok(decide(out))
}

pub(crate) fn decide(out: [f64; 2]) -> (Label, f64) {
    if out[0] > out[1] {
        (Label::Simple, out[0])
    } else {
        (Label::Other, out[1])
    }
}

/// k-fold cross-validation with a seeded fold assignment. Folds train in
/// parallel; their confusion matrices are summed.
pub fn cross_validate(data: &LabeledDataset, k: usize, cfg: &FfnnConfig, seed: u64) -> Result<ConfusionMatrix> {
    if k < 2 {
        return Err(Error::Config(format!("k = {k}; cross-validation needs k >= 2")));
    }
    if data.items.len() < k {
        return Err(Error::Config(format!("{} items cannot fill {k} folds", data.items.len())));
    }
    let mut order: Vec<usize> = (0..data.items.len()).collect();
    order.shuffle(&mut rng(seed));
    let mut fold_of = vec![0usize; order.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    let matrices: Vec<ConfusionMatrix> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let split = |in_fold: bool| LabeledDataset {
                items: data
                    .items
                    .iter()
                    .zip(&fold_of)
                    .filter(|(_, &f)| (f == fold) == in_fold)
                    .map(|(it, _)| it.clone())
                    .collect(),
            };
            let (train, test) = (split(false), split(true));
            let fit = train_ffnn(&train, cfg)?;
            let mut m = ConfusionMatrix::default();
            for (chunks, actual) in &test.items {
                let (pred, _) = classify_ffnn(&fit.model, chunks)?;
                m.record(*actual, pred);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    Ok(matrices.into_iter().fold(ConfusionMatrix::default(), |acc, m| acc + m))
}
