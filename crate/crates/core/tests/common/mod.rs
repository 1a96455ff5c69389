//! Reference implementations used as oracles by the integration tests.
//! They favour obviousness over speed and share no code with the library.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use minimt::lm::NGramLM;
use minimt::smt::{DecoderConfig, PhraseTable};

/// Word-level edit distance (insert, delete, substitute; unit costs).
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Every sequence reachable by moving one contiguous block anywhere else.
fn block_moves<T: Clone>(seq: &[T]) -> Vec<Vec<T>> {
    let n = seq.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..=n {
            let block = &seq[i..j];
            let rest: Vec<T> = seq[..i].iter().chain(&seq[j..]).cloned().collect();
            for k in 0..=rest.len() {
                if k == i {
                    continue;
                }
                let mut v = rest[..k].to_vec();
                v.extend_from_slice(block);
                v.extend_from_slice(&rest[k..]);
                out.push(v);
            }
        }
    }
    out
}

/// Minimum over any number of unrestricted block shifts of
/// `shifts + edit_distance(shifted, reference)`, by breadth-first search
/// over every rearrangement of the hypothesis.
pub fn optimal_ter_edits<T: Clone + Eq + std::hash::Hash>(reference: &[T], hyp: &[T]) -> usize {
    let mut dist: HashMap<Vec<T>, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(hyp.to_vec(), 0);
    queue.push_back(hyp.to_vec());
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        for next in block_moves(&cur) {
            if !dist.contains_key(&next) {
                dist.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    dist.iter().map(|(s, k)| k + edit_distance(s, reference)).min().unwrap()
}

/// All boxes (inclusive spans) with at least one link inside, no link
/// crossing the border, and both sides at most `max_len` long.
pub fn consistent_boxes(
    links: &BTreeSet<(usize, usize)>,
    src_len: usize,
    tgt_len: usize,
    max_len: usize,
) -> BTreeSet<((usize, usize), (usize, usize))> {
    let mut out = BTreeSet::new();
    for s1 in 0..src_len {
        for s2 in s1..src_len {
            for t1 in 0..tgt_len {
                for t2 in t1..tgt_len {
                    if s2 - s1 + 1 > max_len || t2 - t1 + 1 > max_len {
                        continue;
                    }
                    let in_s = |s: usize| s1 <= s && s <= s2;
                    let in_t = |t: usize| t1 <= t && t <= t2;
                    let inside = links.iter().any(|&(s, t)| in_s(s) && in_t(t));
                    let crossing = links.iter().any(|&(s, t)| in_s(s) != in_t(t));
                    if inside && !crossing {
                        out.insert(((s1, s2), (t1, t2)));
                    }
                }
            }
        }
    }
    out
}

struct OracleOption {
    start: usize,
    end: usize,
    tgt: Vec<String>,
    static_score: f64,
}

fn oracle_options(src: &[String], table: &PhraseTable, cfg: &DecoderConfig) -> Vec<OracleOption> {
    let w = &cfg.weights;
    let mut out = Vec::new();
    for i in 0..src.len() {
        for j in i + 1..=src.len().min(i + cfg.max_phrase_len) {
            let opts = table.options(&src[i..j]);
            let take = cfg.ttable_limit.unwrap_or(opts.len()).min(opts.len());
            for o in &opts[..take] {
                let tm: f64 = (0..4).map(|k| w.tm[k] * o.scores[k].ln()).sum();
                out.push(OracleOption {
                    start: i,
                    end: j,
                    tgt: o.tgt.clone(),
                    static_score: tm - w.word_penalty * o.tgt.len() as f64,
                });
            }
        }
    }
    for (i, word) in src.iter().enumerate() {
        if !out.iter().any(|o| o.start <= i && i < o.end) {
            out.push(OracleOption { start: i, end: i + 1, tgt: vec![word.clone()], static_score: cfg.oov_penalty - w.word_penalty });
        }
    }
    out
}

/// Best model score over every complete derivation: all orders of all
/// segmentations into options, respecting the distortion limit. Returns
/// `None` when no derivation satisfies the limit.
pub fn exhaustive_decode(src: &[String], table: &PhraseTable, lm: &NGramLM, cfg: &DecoderConfig) -> Option<f64> {
    let opts = oracle_options(src, table, cfg);
    let mut best: Option<f64> = None;
    let mut history = vec!["<s>".to_string()];
    let mut covered = vec![false; src.len()];
    search(src.len(), &opts, lm, cfg, &mut covered, 0, &mut history, 0.0, &mut best);
    best
}

#[allow(clippy::too_many_arguments)]
fn search(
    n: usize,
    opts: &[OracleOption],
    lm: &NGramLM,
    cfg: &DecoderConfig,
    covered: &mut Vec<bool>,
    last_end: usize,
    history: &mut Vec<String>,
    score: f64,
    best: &mut Option<f64>,
) {
    let w = &cfg.weights;
    if covered.iter().all(|&c| c) {
        let total = score + w.lm * lm.logprob(history, "</s>") * std::f64::consts::LN_10;
        if best.map_or(true, |b| total > b) {
            *best = Some(total);
        }
        return;
    }
    for o in opts {
        if covered[o.start..o.end].iter().any(|&c| c) {
            continue;
        }
        let jump = o.start.abs_diff(last_end);
        if cfg.distortion_limit.is_some_and(|d| jump > d) {
            continue;
        }
        let mut lm_score = 0.0;
        let before = history.len();
        for word in &o.tgt {
            lm_score += lm.logprob(history, word);
            history.push(word.clone());
        }
        let s = score + o.static_score + w.lm * lm_score * std::f64::consts::LN_10 - w.distortion * jump as f64;
        covered[o.start..o.end].iter_mut().for_each(|c| *c = true);
        search(n, opts, lm, cfg, covered, o.end, history, s, best);
        covered[o.start..o.end].iter_mut().for_each(|c| *c = false);
        history.truncate(before);
    }
}

/// Distinct strings, for quick set comparisons.
pub fn distinct<T: Eq + std::hash::Hash + Clone>(xs: &[T]) -> HashSet<T> {
    xs.iter().cloned().collect()
}
