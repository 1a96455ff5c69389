use std::collections::{BTreeSet, HashMap};

use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};

/// Source-side pseudo word that target words may align to.
pub const NULL: &str = "<null>";

#[derive(Clone, Debug, Default, PartialEq)]
struct Interner {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, w: &str) -> u32 {
        if let Some(&i) = self.index.get(w) {
            return i;
        }
        let i = self.words.len() as u32;
        self.words.push(w.to_string());
        self.index.insert(w.to_string(), i);
        i
    }

    fn get(&self, w: &str) -> Option<u32> {
        self.index.get(w).copied()
    }
}

/// Lexical translation probabilities t(target | source), NULL included on
/// the source side.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationTable {
    src: Interner,
    tgt: Interner,
    t: HashMap<(u32, u32), f64>,
}

impl TranslationTable {
    /// t(tgt | src); 0 for pairs never seen together.
    pub fn prob(&self, src: &str, tgt: &str) -> f64 {
        match (self.src.get(src), self.tgt.get(tgt)) {
            (Some(s), Some(t)) => self.t.get(&(s, t)).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn null_prob(&self, tgt: &str) -> f64 {
        self.prob(NULL, tgt)
    }

    pub fn source_words(&self) -> impl Iterator<Item = &str> {
        self.src.words.iter().map(String::as_str)
    }

    /// Sum of t(f | src) over every target word observed with `src`.
    pub fn row_sum(&self, src: &str) -> f64 {
        let Some(s) = self.src.get(src) else { return 0.0 };
        self.t.iter().filter(|((e, _), _)| *e == s).map(|(_, p)| p).sum()
    }

    /// Observed (source, target, probability) triples.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.t.iter().map(|(&(s, t), &p)| (self.src.words[s as usize].as_str(), self.tgt.words[t as usize].as_str(), p))
    }
}

struct EncodedPair {
    src: Vec<u32>,
    tgt: Vec<u32>,
}

/// Result of EM training with the corpus log-likelihood before the first
/// iteration and after each one.
#[derive(Clone, Debug)]
pub struct Ibm1Fit {
    pub table: TranslationTable,
    pub log_likelihoods: Vec<f64>,
}

pub fn train_ibm1(corpus: &ParallelCorpus, iterations: usize) -> Result<TranslationTable> {
    Ok(train_ibm1_logged(corpus, iterations)?.table)
}

/// IBM Model 1 EM for t(target | source). Every co-occurring pair starts
/// at 1/|V_target| and each iteration renormalizes expected counts per
/// source word.
pub fn train_ibm1_logged(corpus: &ParallelCorpus, iterations: usize) -> Result<Ibm1Fit> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if iterations == 0 {
        return Err(Error::Config("IBM Model 1 needs at least one iteration".into()));
    }
    let mut src = Interner::default();
    let mut tgt = Interner::default();
    src.intern(NULL);
    let pairs: Vec<EncodedPair> = corpus
        .pairs()
        .iter()
        .map(|(s, t)| {
            let mut ids = vec![0];
            ids.extend(s.surfaces().map(|w| src.intern(w)));
            EncodedPair { src: ids, tgt: t.surfaces().map(|w| tgt.intern(w)).collect() }
        })
        .collect();
    let init = 1.0 / tgt.words.len() as f64;
    let mut t: HashMap<(u32, u32), f64> = HashMap::new();
    for p in &pairs {
        for &e in &p.src {
            for &f in &p.tgt {
                t.insert((e, f), init);
            }
        }
    }
    let mut log_likelihoods = Vec::with_capacity(iterations + 1);
    for _ in 0..iterations {
        let mut counts: HashMap<(u32, u32), f64> = HashMap::with_capacity(t.len());
        let mut totals = vec![0.0; src.words.len()];
        let mut ll = 0.0;
        for p in &pairs {
            let norm = p.src.len() as f64;
            for &f in &p.tgt {
                let z: f64 = p.src.iter().map(|&e| t[&(e, f)]).sum();
                ll += (z / norm).ln();
                for &e in &p.src {
                    let c = t[&(e, f)] / z;
                    *counts.entry((e, f)).or_insert(0.0) += c;
                    totals[e as usize] += c;
                }
            }
        }
        log_likelihoods.push(ll);
        for ((e, f), c) in counts {
            t.insert((e, f), c / totals[e as usize]);
        }
    }
    log_likelihoods.push(log_likelihood(&pairs, &t));
    Ok(Ibm1Fit { table: TranslationTable { src, tgt, t }, log_likelihoods })
}

fn log_likelihood(pairs: &[EncodedPair], t: &HashMap<(u32, u32), f64>) -> f64 {
    pairs
        .iter()
        .map(|p| {
            p.tgt
                .iter()
                .map(|&f| (p.src.iter().map(|&e| t[&(e, f)]).sum::<f64>() / p.src.len() as f64).ln())
                .sum::<f64>()
        })
        .sum()
}

/// Word links `(source index, target index)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment {
    pub links: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn new(links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Alignment { links: links.into_iter().collect() }
    }

    pub fn transposed(&self) -> Self {
        Alignment { links: self.links.iter().map(|&(s, t)| (t, s)).collect() }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, s: usize, t: usize) -> bool {
        self.links.contains(&(s, t))
    }

    /// Moses-style `s-t s-t ...` text.
    pub fn to_pharaoh(&self) -> String {
        self.links.iter().map(|(s, t)| format!("{s}-{t}")).collect::<Vec<_>>().join(" ")
    }
}

/// Links each target word to its most probable source word. NULL wins only
/// when strictly better than every source word (and then yields no link);
/// ties among source words go to the leftmost.
pub fn viterbi_align<S: AsRef<str>>(t: &TranslationTable, src: &[S], tgt: &[S]) -> Alignment {
    let mut links = BTreeSet::new();
    for (j, f) in tgt.iter().enumerate() {
        let f = f.as_ref();
        let mut best = t.null_prob(f);
        let mut best_i: Option<usize> = None;
        for (i, e) in src.iter().enumerate() {
            let p = t.prob(e.as_ref(), f);
            let better = match best_i {
                None => p >= best,
                Some(_) => p > best,
            };
            if better {
                best = p;
                best_i = Some(i);
            }
        }
        if let Some(i) = best_i {
            links.insert((i, j));
        }
    }
    Alignment { links }
}

/// grow-diag-final: start from the intersection, repeatedly add union links
/// in the 8-neighbourhood of existing links that cover a new word, then add
/// remaining union links touching an unaligned word.
pub fn symmetrize(src_to_tgt: &Alignment, tgt_to_src: &Alignment, src_len: usize, tgt_len: usize) -> Alignment {
    let union: BTreeSet<(usize, usize)> = src_to_tgt.links.union(&tgt_to_src.links).copied().collect();
    let mut links: BTreeSet<(usize, usize)> = src_to_tgt.links.intersection(&tgt_to_src.links).copied().collect();
    let mut src_aligned = vec![false; src_len];
    let mut tgt_aligned = vec![false; tgt_len];
    for &(s, t) in &links {
        src_aligned[s] = true;
        tgt_aligned[t] = true;
    }
    const NEIGHBOURS: [(isize, isize); 8] = [(-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)];
    loop {
        let mut added = false;
        for s in 0..src_len {
            for t in 0..tgt_len {
                if !links.contains(&(s, t)) {
                    continue;
                }
                for (ds, dt) in NEIGHBOURS {
                    let (ns, nt) = (s as isize + ds, t as isize + dt);
                    if ns < 0 || nt < 0 || ns as usize >= src_len || nt as usize >= tgt_len {
                        continue;
                    }
                    let (ns, nt) = (ns as usize, nt as usize);
                    if (!src_aligned[ns] || !tgt_aligned[nt]) && union.contains(&(ns, nt)) && links.insert((ns, nt)) {
                        src_aligned[ns] = true;
                        tgt_aligned[nt] = true;
                        added = true;
                    }
                }
            }
        }
        if !added {
            break;
        }
    }
    for directional in [src_to_tgt, tgt_to_src] {
        for s in 0..src_len {
            for t in 0..tgt_len {
                if (!src_aligned[s] || !tgt_aligned[t]) && directional.contains(s, t) && links.insert((s, t)) {
                    src_aligned[s] = true;
                    tgt_aligned[t] = true;
                }
            }
        }
    }
    Alignment { links }
}
