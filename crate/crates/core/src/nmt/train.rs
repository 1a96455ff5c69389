use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{symbols, Example, ExampleStats, ModelDims, ModelKind, Params, Seq2SeqModel};
use crate::corpus::{vocab_from_symbols, ParallelCorpus, Vocab};
use crate::error::{Error, Result};
use crate::util::rng;

/// Examples per parallel work unit; fixed so gradient sums are always
/// reduced in the same order.
const CHUNK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    RmsProp,
    Sgd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Sequences are truncated to this many symbols.
    pub max_len: usize,
    pub teacher_forcing: bool,
    pub hidden: usize,
    pub embed: usize,
    pub attention: bool,
    /// Global gradient-norm ceiling; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub init_scale: f64,
    pub min_count: usize,
}

impl TrainConfig {
    pub fn word() -> Self {
        TrainConfig {
            lr: 0.001,
            epochs: 100,
            batch_size: 256,
            optimizer: Optimizer::RmsProp,
            seed: 0,
            max_len: 80,
            teacher_forcing: true,
            hidden: 256,
            embed: 128,
            attention: true,
            clip_norm: Some(5.0),
            init_scale: 0.1,
            min_count: 1,
        }
    }

    pub fn char() -> Self {
        TrainConfig { batch_size: 64, max_len: 250, attention: false, ..Self::word() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if self.epochs == 0 || self.batch_size == 0 || self.hidden == 0 || self.max_len == 0 {
            return bad("epochs, batch_size, hidden and max_len must be at least 1");
        }
        if self.embed == 0 {
            return bad("embed must be at least 1");
        }
        Ok(())
    }
}

/// Running mean of squared gradients per parameter.
#[derive(Clone, Debug)]
pub struct RmsProp {
    pub rho: f64,
    pub eps: f64,
    pub acc: Params,
}

impl RmsProp {
    pub fn new(params: &Params) -> Self {
        RmsProp { rho: 0.9, eps: 1e-8, acc: params.zeros_like() }
    }

    /// `acc = ρ acc + (1-ρ) g²`, `θ -= lr g / sqrt(acc + ε)`.
    pub fn update(&mut self, params: &mut Params, grad: &Params, lr: f64) -> Result<()> {
        check_finite(grad)?;
        let (rho, eps) = (self.rho, self.eps);
        for (((_, p), (_, a)), (_, g)) in params.tensors_mut().into_iter().zip(self.acc.tensors_mut()).zip(grad.tensors()) {
            for ((p, a), g) in p.data_mut().iter_mut().zip(a.data_mut()).zip(g.data()) {
                *a = rho * *a + (1.0 - rho) * g * g;
                *p -= lr * g / (*a + eps).sqrt();
            }
        }
        Ok(())
    }
}

fn check_finite(grad: &Params) -> Result<()> {
    match grad.tensors().into_iter().find(|(_, m)| !m.is_finite()) {
        Some((name, _)) => Err(Error::NonFiniteGradient(name.to_string())),
        None => Ok(()),
    }
}

pub fn sgd_update(params: &mut Params, grad: &Params, lr: f64) -> Result<()> {
    check_finite(grad)?;
    params.add_scaled(grad, -lr);
    Ok(())
}

/// Rescales `grad` so its global norm is at most `max_norm`.
pub fn clip_global_norm(grad: &mut Params, max_norm: f64) -> f64 {
    let norm = grad.norm();
    if norm > max_norm {
        grad.scale(max_norm / norm);
    }
    norm
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// Mean summed NLL per sentence, measured while training.
    pub loss: f64,
    /// Fraction of next-symbol predictions that were correct.
    pub accuracy: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: Seq2SeqModel,
    pub history: Vec<EpochStats>,
}

/// Summed gradient and statistics over `batch`, reduced in a fixed order.
pub fn batch_gradient(model: &Seq2SeqModel, batch: &[&Example], teacher_forcing: bool) -> Result<(Params, ExampleStats)> {
    let parts: Vec<Result<(Params, ExampleStats)>> = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut g = model.params.zeros_like();
            let mut stats = ExampleStats::default();
            for ex in chunk {
                stats += model.forward_backward(ex, teacher_forcing, Some(&mut g))?;
            }
            Ok((g, stats))
        })
        .collect();
    let mut iter = parts.into_iter();
    let (mut grad, mut stats) = iter.next().expect("non-empty batch")?;
    for part in iter {
        let (g, s) = part?;
        grad.add_scaled(&g, 1.0);
        stats += s;
    }
    Ok((grad, stats))
}

/// Trains `model` in place on `examples`; a pure function of its inputs.
pub fn train_model(model: &mut Seq2SeqModel, examples: &[Example], cfg: &TrainConfig) -> Result<Vec<EpochStats>> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut shuffle_rng = rng(cfg.seed.wrapping_add(1));
    let mut opt = RmsProp::new(&model.params);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = ExampleStats::default();
        for idx in order.chunks(cfg.batch_size) {
            let batch: Vec<&Example> = idx.iter().map(|&i| &examples[i]).collect();
            let (mut grad, stats) = batch_gradient(model, &batch, cfg.teacher_forcing)?;
            total += stats;
            grad.scale(1.0 / batch.len() as f64);
            if let Some(max) = cfg.clip_norm {
                clip_global_norm(&mut grad, max);
            }
            match cfg.optimizer {
                Optimizer::RmsProp => opt.update(&mut model.params, &grad, cfg.lr)?,
                Optimizer::Sgd => sgd_update(&mut model.params, &grad, cfg.lr)?,
            }
        }
        let stats = EpochStats {
            loss: total.loss / examples.len() as f64,
            accuracy: total.correct as f64 / total.tokens.max(1) as f64,
        };
        log::debug!("epoch {} loss {:.4} acc {:.4}", epoch + 1, stats.loss, stats.accuracy);
        history.push(stats);
    }
    Ok(history)
}

fn truncated(ids: Vec<u32>, max_len: usize) -> Vec<u32> {
    ids.into_iter().take(max_len).collect()
}

/// Id-encoded pairs for `model`, truncated to `max_len`; empty sources
/// are dropped.
pub fn examples_for(model: &Seq2SeqModel, corpus: &ParallelCorpus, max_len: usize) -> Vec<Example> {
    corpus
        .pairs()
        .iter()
        .map(|(s, t)| Example {
            src: truncated(model.encode_source(&s.text()), max_len),
            tgt: truncated(model.encode_target(&t.text()), max_len),
        })
        .filter(|e| !e.src.is_empty())
        .collect()
}

fn side_vocab(kind: ModelKind, texts: impl Iterator<Item = String>, min_count: usize) -> Result<Vocab> {
    let syms: Vec<String> = texts.flat_map(|t| symbols(kind, &t)).collect();
    vocab_from_symbols(syms.iter().map(String::as_str), match kind {
        ModelKind::Word => min_count,
        ModelKind::Char => 1,
    })
}

pub fn train_nmt(corpus: &ParallelCorpus, kind: ModelKind, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let src_vocab = side_vocab(kind, corpus.sources().map(|s| s.text()), cfg.min_count)?;
    let tgt_vocab = side_vocab(kind, corpus.targets().map(|s| s.text()), cfg.min_count)?;
    let dims = ModelDims { kind, embed: cfg.embed, hidden: cfg.hidden, attention: cfg.attention };
    let mut model = Seq2SeqModel::init(dims, src_vocab, tgt_vocab, cfg.init_scale, &mut rng(cfg.seed));
    let examples = examples_for(&model, corpus, cfg.max_len);
    let history = train_model(&mut model, &examples, cfg)?;
    Ok(TrainOutcome { model, history })
}

/// Word-level model; attention as configured.
pub fn train_word_nmt(corpus: &ParallelCorpus, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_nmt(corpus, ModelKind::Word, cfg)
}

/// Character-level model over one-hot inputs; never uses attention.
pub fn train_char_nmt(corpus: &ParallelCorpus, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_nmt(corpus, ModelKind::Char, &TrainConfig { attention: false, ..cfg.clone() })
}

/// Teacher-forced next-symbol accuracy.
pub fn next_token_accuracy(model: &Seq2SeqModel, examples: &[Example]) -> Result<f64> {
    let mut stats = ExampleStats::default();
    for ex in examples {
        stats += model.forward_backward(ex, true, None)?;
    }
    Ok(stats.correct as f64 / stats.tokens.max(1) as f64)
}

/// Fraction of examples whose greedy output equals the target exactly.
pub fn exact_match_rate(model: &Seq2SeqModel, examples: &[Example], max_len: usize) -> Result<f64> {
    let mut hits = 0;
    for ex in examples {
        hits += usize::from(model.translate_ids(&ex.src, max_len)? == ex.tgt);
    }
    Ok(hits as f64 / examples.len().max(1) as f64)
}
