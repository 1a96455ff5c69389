//! Interpolated Kneser-Ney n-gram language models with ARPA-style backoff
//! storage. All probabilities are log10.

mod arpa;

use std::collections::HashMap;

use crate::corpus::{Vocab, BOS, EOS, PAD, UNK};
use crate::error::{Error, Result};

pub use arpa::{read_arpa, write_arpa};

/// Stand-in for log10(0), following the ARPA convention.
pub const LOG_ZERO: f64 = -99.0;

pub const DEFAULT_ORDER: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Entry {
    pub logprob: f64,
    pub backoff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NGramLM {
    order: usize,
    vocab: Vocab,
    /// `entries[n - 1]` holds the n-grams of length n.
    entries: Vec<HashMap<Vec<u32>, Entry>>,
    discounts: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnConfig {
    pub order: usize,
    /// Forces one discount for every order instead of estimating it.
    pub discount: Option<f64>,
}

impl Default for KnConfig {
    fn default() -> Self {
        KnConfig { order: DEFAULT_ORDER, discount: None }
    }
}

fn log10_or_zero(p: f64) -> f64 {
    if p > 0.0 {
        p.log10()
    } else {
        LOG_ZERO
    }
}

/// `n1 / (n1 + 2 n2)` from the count-of-counts, clamped to [0.1, 0.9].
fn estimate_discount(counts: &HashMap<Vec<u32>, u64>, n: usize) -> f64 {
    let n1 = counts.values().filter(|&&c| c == 1).count() as f64;
    let n2 = counts.values().filter(|&&c| c == 2).count() as f64;
    if n1 == 0.0 && n2 == 0.0 {
        log::warn!("order {n}: no count-of-counts to estimate a discount, using 0.5");
        return 0.5;
    }
    (n1 / (n1 + 2.0 * n2)).clamp(0.1, 0.9)
}

pub fn train_lm<S: AsRef<str>>(sentences: &[Vec<S>], order: usize) -> Result<NGramLM> {
    train_lm_with(sentences, &KnConfig { order, discount: None })
}

/// Trains an interpolated Kneser-Ney model with `<s>`/`</s>` boundaries.
///
/// The highest order and n-grams starting with `<s>` use raw counts; other
/// lower orders use continuation counts (number of distinct left contexts).
/// The unigram level interpolates with a uniform distribution over the
/// predictable vocabulary, which includes `<unk>` and `</s>`.
pub fn train_lm_with<S: AsRef<str>>(sentences: &[Vec<S>], cfg: &KnConfig) -> Result<NGramLM> {
    let order = cfg.order;
    if order == 0 {
        return Err(Error::Config("language model order must be at least 1".into()));
    }
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Some(d) = cfg.discount {
        if !(0.0..1.0).contains(&d) {
            return Err(Error::Config(format!("discount {d} outside [0, 1)")));
        }
    }

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for w in s {
            *freq.entry(w.as_ref()).or_insert(0) += 1;
        }
    }
    let mut words: Vec<(&str, u64)> = freq.into_iter().collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let vocab = Vocab::from_symbols(words.into_iter().map(|(w, _)| (w, 0)));

    let mut adjusted: Vec<HashMap<Vec<u32>, u64>> = vec![HashMap::new(); order];
    for s in sentences {
        let mut padded = Vec::with_capacity(s.len() + 2);
        padded.push(BOS);
        padded.extend(s.iter().map(|w| vocab.index(w.as_ref())));
        padded.push(EOS);
        for p in 1..padded.len() {
            let start = (p + 1).saturating_sub(order);
            let gram = &padded[start..=p];
            *adjusted[gram.len() - 1].entry(gram.to_vec()).or_insert(0) += 1;
        }
    }
    for n in (1..order).rev() {
        let (lower, higher) = adjusted.split_at_mut(n);
        for gram in higher[0].keys() {
            if gram[1] != BOS {
                *lower[n - 1].entry(gram[1..].to_vec()).or_insert(0) += 1;
            }
        }
    }

    let discounts: Vec<f64> = (0..order)
        .map(|i| cfg.discount.unwrap_or_else(|| estimate_discount(&adjusted[i], i + 1)))
        .collect();

    let mut lm = NGramLM { order, vocab, entries: vec![HashMap::new(); order], discounts };

    // Unigrams
    let d = lm.discounts[0];
    let total: u64 = adjusted[0].values().sum();
    let types = adjusted[0].len() as f64;
    let predictable = (lm.vocab.len() - 2) as f64;
    let uniform_mass = d * types / total as f64 / predictable;
    for id in 0..lm.vocab.len() as u32 {
        if id == PAD {
            continue;
        }
        let logprob = if id == BOS {
            LOG_ZERO
        } else {
            let c = adjusted[0].get(&vec![id]).copied().unwrap_or(0) as f64;
            log10_or_zero((c - d).max(0.0) / total as f64 + uniform_mass)
        };
        lm.entries[0].insert(vec![id], Entry { logprob, backoff: None });
    }

    // Higher orders, interpolating with the already finished lower orders.
    for n in 2..=order {
        let d = lm.discounts[n - 1];
        let mut contexts: HashMap<&[u32], (u64, usize)> = HashMap::new();
        for (gram, &c) in &adjusted[n - 1] {
            let e = contexts.entry(&gram[..n - 1]).or_default();
            e.0 += c;
            e.1 += 1;
        }
        let mut grams: Vec<(&Vec<u32>, &u64)> = adjusted[n - 1].iter().collect();
        grams.sort();
        let mut new_entries = HashMap::with_capacity(grams.len());
        for (gram, &c) in grams {
            let ctx = &gram[..n - 1];
            let (ctx_total, ctx_types) = contexts[ctx];
            let gamma = d * ctx_types as f64 / ctx_total as f64;
            let lower = 10f64.powf(lm.logprob_ids(&gram[1..n - 1], gram[n - 1]));
            let p = (c as f64 - d).max(0.0) / ctx_total as f64 + gamma * lower;
            new_entries.insert(gram.clone(), Entry { logprob: log10_or_zero(p), backoff: None });
        }
        for (ctx, (ctx_total, ctx_types)) in contexts {
            let gamma = d * ctx_types as f64 / ctx_total as f64;
            match lm.entries[n - 2].get_mut(ctx) {
                Some(e) => e.backoff = Some(log10_or_zero(gamma)),
                None => debug_assert!(false, "context {ctx:?} missing from order {}", n - 1),
            }
        }
        lm.entries[n - 1] = new_entries;
    }
    Ok(lm)
}

impl NGramLM {
    /// Order-1 model assigning every word (plus `<unk>` and `</s>`) the
    /// same probability.
    pub fn uniform<S: AsRef<str>>(words: &[S]) -> Self {
        let vocab = Vocab::from_symbols(words.iter().map(|w| (w.as_ref(), 0)));
        let p = -((vocab.len() - 2) as f64).log10();
        let mut unigrams = HashMap::new();
        for id in 0..vocab.len() as u32 {
            if id == PAD {
                continue;
            }
            let logprob = if id == BOS { LOG_ZERO } else { p };
            unigrams.insert(vec![id], Entry { logprob, backoff: None });
        }
        NGramLM { order: 1, vocab, entries: vec![unigrams], discounts: vec![0.0] }
    }

    pub(crate) fn from_parts(order: usize, vocab: Vocab, entries: Vec<HashMap<Vec<u32>, Entry>>) -> Self {
        NGramLM { order, vocab, entries, discounts: Vec::new() }
    }

    pub(crate) fn entries(&self) -> &[HashMap<Vec<u32>, Entry>] {
        &self.entries
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Discounts used per order (empty for models loaded from ARPA).
    pub fn discounts(&self) -> &[f64] {
        &self.discounts
    }

    /// Words that can be predicted: the vocabulary minus `<pad>` and `<s>`.
    pub fn predictable(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.vocab.len() as u32).filter(|&i| i != PAD && i != BOS)
    }

    pub fn id(&self, word: &str) -> u32 {
        match self.vocab.index(word) {
            PAD => UNK,
            i => i,
        }
    }

    /// Stored value of an n-gram, if present.
    pub fn ngram_logprob(&self, gram: &[&str]) -> Option<f64> {
        let ids: Vec<u32> = gram.iter().map(|w| self.id(w)).collect();
        self.entries.get(ids.len().checked_sub(1)?)?.get(&ids).map(|e| e.logprob)
    }

    pub fn backoff_weight(&self, context: &[&str]) -> Option<f64> {
        let ids: Vec<u32> = context.iter().map(|w| self.id(w)).collect();
        self.entries.get(ids.len().checked_sub(1)?)?.get(&ids).and_then(|e| e.backoff)
    }

    /// Backoff lookup on ids: the longest stored n-gram ending in `word`,
    /// plus the backoff weights of every longer context that was skipped.
    pub fn logprob_ids(&self, context: &[u32], word: u32) -> f64 {
        let word = if word == PAD || word as usize >= self.vocab.len() { UNK } else { word };
        let keep = context.len().min(self.order - 1);
        let mut ctx = &context[context.len() - keep..];
        let mut acc = 0.0;
        let mut key = Vec::with_capacity(ctx.len() + 1);
        loop {
            key.clear();
            key.extend_from_slice(ctx);
            key.push(word);
            if let Some(e) = self.entries[ctx.len()].get(&key) {
                return acc + e.logprob;
            }
            if ctx.is_empty() {
                return acc + self.entries[0].get(&vec![UNK]).map_or(LOG_ZERO, |e| e.logprob);
            }
            if let Some(b) = self.entries[ctx.len() - 1].get(ctx).and_then(|e| e.backoff) {
                acc += b;
            }
            ctx = &ctx[1..];
        }
    }

    /// log10 P(word | context); unknown words score as `<unk>`.
    pub fn logprob<S: AsRef<str>>(&self, context: &[S], word: &str) -> f64 {
        let ids: Vec<u32> = context.iter().map(|w| self.id(w.as_ref())).collect();
        self.logprob_ids(&ids, self.id(word))
    }

    /// Sum of word log-probabilities after `<s>`, including the final `</s>`.
    pub fn sentence_logprob<S: AsRef<str>>(&self, sentence: &[S]) -> f64 {
        let mut ctx = vec![BOS];
        let mut total = 0.0;
        for w in sentence {
            let id = self.id(w.as_ref());
            total += self.logprob_ids(&ctx, id);
            ctx.push(id);
        }
        total + self.logprob_ids(&ctx, EOS)
    }

    /// `10^(-total_logprob / events)`, counting one `</s>` event per sentence.
    pub fn perplexity<S: AsRef<str>>(&self, sentences: &[Vec<S>]) -> f64 {
        let mut total = 0.0;
        let mut events = 0usize;
        for s in sentences {
            total += self.sentence_logprob(s);
            events += s.len() + 1;
        }
        10f64.powf(-total / events as f64)
    }
}
