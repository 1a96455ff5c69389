//! Corpus data model and preprocessing: tokenization, truecasing,
//! length cleaning, vocabularies and seeded dataset splits.

mod io;
mod tokenize;
mod truecase;
mod vocab;

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use io::{lang_tag, read_lines, read_parallel, write_lines, write_parallel};
pub use tokenize::tokenize;
pub use truecase::{train_truecaser, truecase, TruecaseModel};
pub use vocab::{build_vocab, vocab_from_symbols, Vocab, BOS, EOS, PAD, UNK};

pub(crate) use tokenize::is_punct;

/// A single word, number or punctuation mark.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Token {
    surface: String,
    lowered: String,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        debug_assert!(!surface.is_empty() && !surface.chars().any(char::is_whitespace));
        let lowered = surface.to_lowercase();
        Token { surface, lowered }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn lowered(&self) -> &str {
        &self.lowered
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.surface)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub id: usize,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(id: usize, tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptySentence);
        }
        Ok(Sentence { id, tokens })
    }

    /// Tokenizes `text` and wraps the result.
    pub fn parse(id: usize, text: &str) -> Result<Self> {
        Sentence::new(id, tokenize(text)?)
    }

    /// Builds a sentence from already tokenized, space-separated text.
    pub fn from_tokens(id: usize, text: &str) -> Result<Self> {
        Sentence::new(id, text.split_whitespace().map(Token::new).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(Token::surface)
    }

    pub fn words(&self) -> Vec<String> {
        self.surfaces().map(str::to_string).collect()
    }

    pub fn text(&self) -> String {
        self.surfaces().collect::<Vec<_>>().join(" ")
    }
}

/// Sentence pairs aligned by position, with matching ids on both sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<(Sentence, Sentence)>,
    pub src_lang: String,
    pub tgt_lang: String,
}

impl ParallelCorpus {
    pub fn new(
        pairs: Vec<(Sentence, Sentence)>,
        src_lang: impl Into<String>,
        tgt_lang: impl Into<String>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for (src, tgt) in &pairs {
            if src.id != tgt.id {
                return Err(Error::Config(format!(
                    "pair ids differ: source {} vs target {}",
                    src.id, tgt.id
                )));
            }
            if !seen.insert(src.id) {
                return Err(Error::Config(format!("duplicate sentence id {}", src.id)));
            }
        }
        Ok(ParallelCorpus { pairs, src_lang: src_lang.into(), tgt_lang: tgt_lang.into() })
    }

    /// Tokenizes aligned raw lines; ids are 1-based line numbers.
    pub fn from_lines<S: AsRef<str>, T: AsRef<str>>(
        src: &[S],
        tgt: &[T],
        src_lang: &str,
        tgt_lang: &str,
    ) -> Result<Self> {
        if src.len() != tgt.len() {
            return Err(Error::Misaligned { left: src.len(), right: tgt.len() });
        }
        let pairs = src
            .iter()
            .zip(tgt)
            .enumerate()
            .map(|(i, (s, t))| Ok((Sentence::parse(i + 1, s.as_ref())?, Sentence::parse(i + 1, t.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        ParallelCorpus::new(pairs, src_lang, tgt_lang)
    }

    pub fn pairs(&self) -> &[(Sentence, Sentence)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|(s, _)| s)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|(_, t)| t)
    }

    /// Keeps pairs for which `keep` holds, preserving order.
    pub fn filter(&self, mut keep: impl FnMut(&Sentence, &Sentence) -> bool) -> ParallelCorpus {
        ParallelCorpus {
            pairs: self.pairs.iter().filter(|(s, t)| keep(s, t)).cloned().collect(),
            src_lang: self.src_lang.clone(),
            tgt_lang: self.tgt_lang.clone(),
        }
    }

    /// Swaps source and target sides.
    pub fn reversed(&self) -> ParallelCorpus {
        ParallelCorpus {
            pairs: self.pairs.iter().map(|(s, t)| (t.clone(), s.clone())).collect(),
            src_lang: self.tgt_lang.clone(),
            tgt_lang: self.src_lang.clone(),
        }
    }

    pub fn map_sides(&self, mut f: impl FnMut(&Sentence, &Sentence) -> (Sentence, Sentence)) -> ParallelCorpus {
        ParallelCorpus {
            pairs: self.pairs.iter().map(|(s, t)| f(s, t)).collect(),
            src_lang: self.src_lang.clone(),
            tgt_lang: self.tgt_lang.clone(),
        }
    }
}

pub const DEFAULT_MAX_LEN: usize = 80;

/// Drops every pair where either side is longer than `max_len` tokens.
pub fn clean_pairs(corpus: &ParallelCorpus, max_len: usize) -> Result<ParallelCorpus> {
    let out = corpus.filter(|s, t| s.len() <= max_len && t.len() <= max_len);
    if out.is_empty() {
        return Err(Error::AllFiltered { max_len });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: ParallelCorpus,
    pub dev: ParallelCorpus,
    pub test: ParallelCorpus,
}

/// Seeded shuffle followed by a (train, dev, test) partition. Dev and test
/// sizes are floors of their shares; the remainder goes to train.
pub fn split(corpus: &ParallelCorpus, ratios: (f64, f64, f64), seed: u64) -> Result<Split> {
    let (tr, dv, ts) = ratios;
    if [tr, dv, ts].iter().any(|r| !r.is_finite() || *r < 0.0) || ((tr + dv + ts) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidRatios(format!("({tr}, {dv}, {ts}) must be non-negative and sum to 1")));
    }
    let n = corpus.len();
    let n_dev = (n as f64 * dv).floor() as usize;
    let n_test = (n as f64 * ts).floor() as usize;
    let n_train = n - n_dev - n_test;
    for (size, name) in [(n_train, "train"), (n_dev, "dev"), (n_test, "test")] {
        if size == 0 {
            return Err(Error::EmptyPartition(name));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |idx: &[usize]| ParallelCorpus {
        pairs: idx.iter().map(|&i| corpus.pairs[i].clone()).collect(),
        src_lang: corpus.src_lang.clone(),
        tgt_lang: corpus.tgt_lang.clone(),
    };
    Ok(Split {
        train: take(&order[..n_train]),
        dev: take(&order[n_train..n_train + n_dev]),
        test: take(&order[n_train + n_dev..]),
    })
}
