use rand::Rng;
use serde::{Deserialize, Serialize};

use super::attention::{AttentionCache, AttentionParams};
use super::lstm::{LstmCache, LstmParams, LstmState};
use super::tensor::{argmax, softmax, Matrix};
use crate::corpus::{Vocab, BOS, EOS, PAD};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Word,
    Char,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub kind: ModelKind,
    /// Embedding width; ignored by char models, whose inputs are one-hot.
    pub embed: usize,
    pub hidden: usize,
    pub attention: bool,
}

/// All trainable tensors. Gradients use the same layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub emb_src: Option<Matrix>,
    pub emb_tgt: Option<Matrix>,
    pub enc: LstmParams,
    pub dec: LstmParams,
    pub att: Option<AttentionParams>,
    pub w_out: Matrix,
    pub b_out: Matrix,
}

impl Params {
    /// Named tensors in a fixed order.
    pub fn tensors(&self) -> Vec<(&'static str, &Matrix)> {
        let mut out = Vec::with_capacity(13);
        if let Some(e) = &self.emb_src {
            out.push(("emb_src", e));
        }
        if let Some(e) = &self.emb_tgt {
            out.push(("emb_tgt", e));
        }
        out.extend([("enc.w", &self.enc.w), ("enc.u", &self.enc.u), ("enc.b", &self.enc.b)]);
        out.extend([("dec.w", &self.dec.w), ("dec.u", &self.dec.u), ("dec.b", &self.dec.b)]);
        if let Some(a) = &self.att {
            out.extend([("att.w", &a.w), ("att.b", &a.b), ("att.v", &a.v)]);
        }
        out.extend([("out.w", &self.w_out), ("out.b", &self.b_out)]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Matrix)> {
        let mut out = Vec::with_capacity(13);
        if let Some(e) = &mut self.emb_src {
            out.push(("emb_src", e));
        }
        if let Some(e) = &mut self.emb_tgt {
            out.push(("emb_tgt", e));
        }
        out.extend([("enc.w", &mut self.enc.w), ("enc.u", &mut self.enc.u), ("enc.b", &mut self.enc.b)]);
        out.extend([("dec.w", &mut self.dec.w), ("dec.u", &mut self.dec.u), ("dec.b", &mut self.dec.b)]);
        if let Some(a) = &mut self.att {
            out.extend([("att.w", &mut a.w), ("att.b", &mut a.b), ("att.v", &mut a.v)]);
        }
        out.extend([("out.w", &mut self.w_out), ("out.b", &mut self.b_out)]);
        out
    }

    pub fn zeros_like(&self) -> Params {
        let mut z = self.clone();
        z.tensors_mut().into_iter().for_each(|(_, m)| m.fill(0.0));
        z
    }

    pub fn add_scaled(&mut self, other: &Params, k: f64) {
        for ((_, a), (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.add_scaled(b, k);
        }
    }

    pub fn scale(&mut self, k: f64) {
        self.tensors_mut().into_iter().for_each(|(_, m)| m.scale(k));
    }

    pub fn norm(&self) -> f64 {
        self.tensors().iter().map(|(_, m)| m.norm_sq()).sum::<f64>().sqrt()
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, m)| m.len()).sum()
    }
}

/// Encoder-decoder LSTM translator, optionally with attention.
#[derive(Clone, Debug, PartialEq)]
pub struct Seq2SeqModel {
    pub dims: ModelDims,
    pub src_vocab: Vocab,
    pub tgt_vocab: Vocab,
    pub params: Params,
}

/// One training pair as ids; the decoder reads `[BOS] + tgt` and predicts
/// `tgt + [EOS]`. Gold `PAD` positions are skipped by the loss.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub src: Vec<u32>,
    pub tgt: Vec<u32>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExampleStats {
    /// Summed negative log-likelihood (natural log).
    pub loss: f64,
    pub tokens: usize,
    pub correct: usize,
}

impl std::ops::AddAssign for ExampleStats {
    fn add_assign(&mut self, o: Self) {
        self.loss += o.loss;
        self.tokens += o.tokens;
        self.correct += o.correct;
    }
}

/// Encoder output: every top-layer state plus the final `(h, c)`.
#[derive(Clone, Debug)]
pub struct Encoded {
    pub states: Vec<Vec<f64>>,
    pub last: LstmState,
    pre: Vec<Vec<f64>>,
    caches: Vec<LstmCache>,
}

#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: LstmState,
    pub probs: Vec<f64>,
    pub alpha: Option<Vec<f64>>,
}

struct StepCache {
    y_prev: u32,
    gold: u32,
    att: Option<AttentionCache>,
    lstm: LstmCache,
    out_in: Vec<f64>,
    probs: Vec<f64>,
}

impl Seq2SeqModel {
    /// Fresh model with uniform weights in `[-scale, scale]`. The attention
    /// hidden size equals the decoder hidden size.
    pub fn init<R: Rng>(dims: ModelDims, src_vocab: Vocab, tgt_vocab: Vocab, scale: f64, rng: &mut R) -> Self {
        let (vs, vt, h) = (src_vocab.len(), tgt_vocab.len(), dims.hidden);
        let word = dims.kind == ModelKind::Word;
        let emb_src = word.then(|| Matrix::uniform(vs, dims.embed, scale, rng));
        let emb_tgt = word.then(|| Matrix::uniform(vt, dims.embed, scale, rng));
        let dx = if word { dims.embed } else { vs };
        let dy = if word { dims.embed } else { vt };
        let ctx = if dims.attention { h } else { 0 };
        let enc = LstmParams::init(dx, h, scale, rng);
        let dec = LstmParams::init(dy + ctx, h, scale, rng);
        let att = dims.attention.then(|| AttentionParams::init(dy, h, h, scale, rng));
        let out_dim = h + ctx + if word { dy } else { 0 };
        let w_out = Matrix::uniform(vt, out_dim, scale, rng);
        let b_out = Matrix::zeros(vt, 1);
        Seq2SeqModel { dims, src_vocab, tgt_vocab, params: Params { emb_src, emb_tgt, enc, dec, att, w_out, b_out } }
    }

    fn word(&self) -> bool {
        self.dims.kind == ModelKind::Word
    }

    fn src_input(&self, id: u32) -> Vec<f64> {
        match &self.params.emb_src {
            Some(e) => e.row(id as usize).to_vec(),
            None => one_hot(id, self.src_vocab.len()),
        }
    }

    fn tgt_input(&self, id: u32) -> Vec<f64> {
        match &self.params.emb_tgt {
            Some(e) => e.row(id as usize).to_vec(),
            None => one_hot(id, self.tgt_vocab.len()),
        }
    }

    fn tgt_dim(&self) -> usize {
        self.params.emb_tgt.as_ref().map_or(self.tgt_vocab.len(), Matrix::cols)
    }

    /// Runs the encoder left to right over `src`.
    pub fn encode(&self, src: &[u32]) -> Result<Encoded> {
        if src.is_empty() {
            return Err(Error::EmptySentence);
        }
        if let Some(&bad) = src.iter().find(|&&id| id as usize >= self.src_vocab.len()) {
            return Err(Error::DimMismatch { expected: self.src_vocab.len(), got: bad as usize });
        }
        let mut state = LstmState::zeros(self.dims.hidden);
        let mut states = Vec::with_capacity(src.len());
        let mut caches = Vec::with_capacity(src.len());
        for &x in src {
            let (next, cache) = self.params.enc.forward(&self.src_input(x), &state);
            states.push(next.h.clone());
            caches.push(cache);
            state = next;
        }
        let pre = self.params.att.as_ref().map_or_else(Vec::new, |a| a.precompute(&states));
        Ok(Encoded { states, last: state, pre, caches })
    }

    fn step_inner(&self, y_prev: u32, state: &LstmState, enc: &Encoded) -> (LstmState, Option<AttentionCache>, LstmCache, Vec<f64>, Vec<f64>) {
        let e = self.tgt_input(y_prev);
        let att = self.params.att.as_ref().map(|a| a.forward(&e, &state.h, &enc.states, &enc.pre));
        let mut x = e.clone();
        if let Some(c) = &att {
            x.extend_from_slice(&c.context);
        }
        let (next, lstm) = self.params.dec.forward(&x, state);
        let mut out_in = next.h.clone();
        if let Some(c) = &att {
            out_in.extend_from_slice(&c.context);
        }
        if self.word() {
            out_in.extend_from_slice(&e);
        }
        let mut logits = self.params.b_out.data().to_vec();
        self.params.w_out.matvec_block_add(&out_in, 0, &mut logits);
        (next, att, lstm, out_in, logits)
    }

    /// One decoder step: attention from the previous state, LSTM update,
    /// then the output distribution.
    pub fn decode_step(&self, y_prev: u32, state: &LstmState, enc: &Encoded) -> StepOutput {
        let (state, att, _, _, logits) = self.step_inner(y_prev, state, enc);
        StepOutput { state, probs: softmax(&logits), alpha: att.map(|a| a.alpha) }
    }

    /// Loss statistics for one example and, when `grad` is given, the
    /// accumulated gradient of the summed loss.
    pub fn forward_backward(&self, ex: &Example, teacher_forcing: bool, grad: Option<&mut Params>) -> Result<ExampleStats> {
        let enc = self.encode(&ex.src)?;
        let mut stats = ExampleStats::default();
        let mut state = enc.last.clone();
        let mut steps = Vec::with_capacity(ex.tgt.len() + 1);
        let mut prev_pred = BOS;
        for t in 0..=ex.tgt.len() {
            let y_prev = match t {
                0 => BOS,
                _ if teacher_forcing => ex.tgt[t - 1],
                _ => prev_pred,
            };
            let gold = ex.tgt.get(t).copied().unwrap_or(EOS);
            let (next, att, lstm, out_in, logits) = self.step_inner(y_prev, &state, &enc);
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
            let probs = softmax(&logits);
            prev_pred = predict(&probs);
            if gold != PAD {
                stats.loss += lse - logits[gold as usize];
                stats.tokens += 1;
                stats.correct += usize::from(prev_pred == gold);
            }
            if grad.is_some() {
                steps.push(StepCache { y_prev, gold, att, lstm, out_in, probs });
            }
            state = next;
        }
        if let Some(g) = grad {
            self.backward(&enc, &ex.src, &steps, g);
        }
        Ok(stats)
    }

    fn backward(&self, enc: &Encoded, src: &[u32], steps: &[StepCache], g: &mut Params) {
        let p = &self.params;
        let h = self.dims.hidden;
        let dy = self.tgt_dim();
        let has_att = p.att.is_some();
        let tx = enc.states.len();
        let mut d_enc = vec![vec![0.0; h]; tx];
        let mut d_pre = vec![vec![0.0; p.att.as_ref().map_or(0, AttentionParams::size)]; tx];
        let mut carry = LstmState::zeros(h);
        for st in steps.iter().rev() {
            let mut d_out = vec![0.0; st.out_in.len()];
            if st.gold != PAD {
                let mut dlogits = st.probs.clone();
                dlogits[st.gold as usize] -= 1.0;
                g.w_out.add_outer(&dlogits, &st.out_in);
                g.b_out.add_vec(&dlogits);
                p.w_out.matvec_t_add(&dlogits, &mut d_out);
            }
            let mut ds = carry.h.clone();
            for k in 0..h {
                ds[k] += d_out[k];
            }
            let mut d_ctx = if has_att { d_out[h..2 * h].to_vec() } else { Vec::new() };
            let mut de = if self.word() { d_out[d_out.len() - dy..].to_vec() } else { vec![0.0; dy] };
            let (dx, dprev) = p.dec.backward(&st.lstm, &ds, &carry.c, &mut g.dec);
            for k in 0..dy {
                de[k] += dx[k];
            }
            let mut ds_prev = dprev.h;
            if let (Some(att), Some(cache), Some(ga)) = (&p.att, &st.att, g.att.as_mut()) {
                for k in 0..h {
                    d_ctx[k] += dx[dy + k];
                }
                att.backward(cache, &d_ctx, &enc.states, ga, &mut de, &mut ds_prev, &mut d_pre, &mut d_enc);
            }
            if let Some(ge) = g.emb_tgt.as_mut() {
                for (a, b) in ge.row_mut(st.y_prev as usize).iter_mut().zip(&de) {
                    *a += b;
                }
            }
            carry = LstmState { h: ds_prev, c: dprev.c };
        }
        if let (Some(att), Some(ga)) = (&p.att, g.att.as_mut()) {
            att.backward_pre(&enc.states, &d_pre, ga, &mut d_enc);
        }
        for k in (0..tx).rev() {
            let mut dh = carry.h.clone();
            for (a, b) in dh.iter_mut().zip(&d_enc[k]) {
                *a += b;
            }
            let (dx, dprev) = p.enc.backward(&enc.caches[k], &dh, &carry.c, &mut g.enc);
            if let Some(ge) = g.emb_src.as_mut() {
                for (a, b) in ge.row_mut(src[k] as usize).iter_mut().zip(&dx) {
                    *a += b;
                }
            }
            carry = dprev;
        }
    }

    /// Greedy decoding: feed `<s>`, take the most probable symbol until
    /// `</s>` or `max_len` symbols.
    pub fn translate_ids(&self, src: &[u32], max_len: usize) -> Result<Vec<u32>> {
        let enc = self.encode(src)?;
        let mut state = enc.last.clone();
        let mut y = BOS;
        let mut out = Vec::new();
        while out.len() < max_len {
            let step = self.decode_step(y, &state, &enc);
            y = predict(&step.probs);
            if y == EOS {
                break;
            }
            out.push(y);
            state = step.state;
        }
        Ok(out)
    }

    /// Splits a sentence into model symbols: words, or characters
    /// (spaces included) for char models.
    pub fn symbols(&self, text: &str) -> Vec<String> {
        symbols(self.dims.kind, text)
    }

    pub fn encode_source(&self, text: &str) -> Vec<u32> {
        let syms = self.symbols(text);
        self.src_vocab.encode(syms.iter().map(String::as_str))
    }

    pub fn encode_target(&self, text: &str) -> Vec<u32> {
        let syms = self.symbols(text);
        self.tgt_vocab.encode(syms.iter().map(String::as_str))
    }

    /// Translates whitespace-tokenized text; unknown words come out as `<unk>`.
    pub fn translate(&self, text: &str, max_len: usize) -> Result<String> {
        let ids = self.translate_ids(&self.encode_source(text), max_len)?;
        let syms = self.tgt_vocab.decode(&ids);
        Ok(match self.dims.kind {
            ModelKind::Word => syms.join(" "),
            ModelKind::Char => syms.concat(),
        })
    }
}

pub fn symbols(kind: ModelKind, text: &str) -> Vec<String> {
    match kind {
        ModelKind::Word => text.split_whitespace().map(str::to_string).collect(),
        ModelKind::Char => text.split_whitespace().collect::<Vec<_>>().join(" ").chars().map(String::from).collect(),
    }
}

/// Most probable symbol, never `<pad>` or `<s>`.
fn predict(probs: &[f64]) -> u32 {
    (argmax(&probs[BOS as usize + 1..]) + BOS as usize + 1) as u32
}

fn one_hot(id: u32, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[id as usize] = 1.0;
    v
}

/// Mean negative log-likelihood per sentence.
pub fn nll_loss(model: &Seq2SeqModel, batch: &[Example]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut total = 0.0;
    for ex in batch {
        total += model.forward_backward(ex, true, None)?.loss;
    }
    Ok(total / batch.len() as f64)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::nmt::gradcheck::{grad_check, DEFAULT_EPS};
    use crate::util::rng;

    pub(crate) fn toy_model(kind: ModelKind, attention: bool, vocab: usize, hidden: usize, seed: u64) -> Seq2SeqModel {
        let syms: Vec<(String, u64)> = (0..vocab - 4).map(|i| (format!("w{i}"), 1)).collect();
        let v = Vocab::from_symbols(syms);
        let dims = ModelDims { kind, embed: 6, hidden, attention };
        Seq2SeqModel::init(dims, v.clone(), v, 0.3, &mut rng(seed))
    }

    pub(crate) fn toy_batch(vocab: u32, seed: u64) -> Vec<Example> {
        let mut r = rng(seed);
        (0..3)
            .map(|_| {
                let sl = r.gen_range(1..5);
                let tl = r.gen_range(1..5);
                Example {
                    src: (0..sl).map(|_| r.gen_range(3..vocab)).collect(),
                    tgt: (0..tl).map(|_| r.gen_range(3..vocab)).collect(),
                }
            })
            .collect()
    }

    #[test]
    fn gradients_match_for_every_variant() {
        for (kind, att) in [(ModelKind::Word, true), (ModelKind::Word, false), (ModelKind::Char, false), (ModelKind::Char, true)] {
            let m = toy_model(kind, att, 12, 5, 3);
            let report = grad_check(&m, &toy_batch(12, 4), DEFAULT_EPS, 120, 5).unwrap();
            assert!(report.max_rel_error < 1e-4, "{kind:?}/{att}: {report:?}");
        }
    }

    #[test]
    fn encoder_shapes_and_order() {
        let m = toy_model(ModelKind::Word, true, 10, 4, 1);
        assert_eq!(m.encode(&[5]).unwrap().states.len(), 1);
        let a = m.encode(&[5, 6]).unwrap().states;
        let b = m.encode(&[6, 5]).unwrap().states;
        assert_ne!(a, b);
        assert!(matches!(m.encode(&[]), Err(Error::EmptySentence)));
        let mut zero = m.clone();
        zero.params = m.params.zeros_like();
        assert!(zero.encode(&[4, 5, 6]).unwrap().states.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn uniform_output_gives_log_vocab_loss() {
        let mut m = toy_model(ModelKind::Word, true, 30, 4, 2);
        m.params.w_out.fill(0.0);
        m.params.b_out.fill(0.0);
        let batch = toy_batch(30, 9);
        let loss = nll_loss(&m, &batch).unwrap();
        let steps: usize = batch.iter().map(|e| e.tgt.len() + 1).sum();
        let expected = steps as f64 * (30f64).ln() / batch.len() as f64;
        assert!((loss - expected).abs() < 1e-9);
    }

    #[test]
    fn pad_targets_are_ignored() {
        let m = toy_model(ModelKind::Word, true, 10, 4, 2);
        let ex = Example { src: vec![4, 5], tgt: vec![6, PAD, 7] };
        let mut g = m.params.zeros_like();
        let s = m.forward_backward(&ex, true, Some(&mut g)).unwrap();
        assert_eq!(s.tokens, 3);
        let report = grad_check(&m, &[ex], DEFAULT_EPS, 60, 1).unwrap();
        assert!(report.max_rel_error < 1e-4);
    }

    #[test]
    fn untouched_embedding_rows_have_zero_gradient() {
        let m = toy_model(ModelKind::Word, true, 12, 4, 2);
        let ex = Example { src: vec![4, 5], tgt: vec![6] };
        let mut g = m.params.zeros_like();
        m.forward_backward(&ex, true, Some(&mut g)).unwrap();
        let es = g.emb_src.as_ref().unwrap();
        assert!(es.row(9).iter().all(|&x| x == 0.0));
        assert!(es.row(4).iter().any(|&x| x != 0.0));
    }

    #[test]
    fn distributions_normalize_and_greedy_is_bounded() {
        let m = toy_model(ModelKind::Word, true, 15, 4, 8);
        let enc = m.encode(&[4, 5, 6]).unwrap();
        let step = m.decode_step(BOS, &enc.last, &enc);
        assert!((step.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((step.alpha.unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let out = m.translate_ids(&[4, 5], 3).unwrap();
        assert!(out.len() <= 3);
        assert_eq!(out, m.translate_ids(&[4, 5], 3).unwrap());
    }
}
