use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    /// Smoothed modified precisions p_1..p_N used in the score.
    pub precisions: Vec<f64>,
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub brevity_penalty: f64,
    /// Score in [0, 100] with add-one smoothing applied to zero match counts.
    pub score: f64,
    /// Score without smoothing; exactly 0 when some order has no match.
    pub unsmoothed_score: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
    pub smoothing: String,
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram matches and hypothesis n-gram total for one sentence pair.
pub fn clipped_matches<S: AsRef<str>>(reference: &[S], hypothesis: &[S], n: usize) -> (u64, u64) {
    let r = ngram_counts(reference, n);
    let h = ngram_counts(hypothesis, n);
    let total = h.values().sum();
    let matched = h.iter().map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0))).sum();
    (matched, total)
}

/// Corpus-level BLEU over aligned single references.
pub fn bleu<S: AsRef<str>>(references: &[Vec<S>], hypotheses: &[Vec<S>], max_n: usize) -> Result<BleuReport> {
    if hypotheses.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if references.len() != hypotheses.len() {
        return Err(Error::Misaligned { left: references.len(), right: hypotheses.len() });
    }
    if max_n == 0 {
        return Err(Error::Config("max_n must be at least 1".into()));
    }
    let mut matches = vec![0u64; max_n];
    let mut totals = vec![0u64; max_n];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (r, h) in references.iter().zip(hypotheses) {
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=max_n {
            let (m, t) = clipped_matches(r, h, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
    }
    let precisions: Vec<f64> = matches
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| if m == 0 { 1.0 / (t as f64 + 1.0) } else { m as f64 / t as f64 })
        .collect();
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    let geo = |ps: &[f64]| (ps.iter().map(|p| p.ln()).sum::<f64>() / max_n as f64).exp();
    let score = (100.0 * brevity_penalty * geo(&precisions)).clamp(0.0, 100.0);
    let unsmoothed_score = if matches.contains(&0) {
        0.0
    } else {
        let raw: Vec<f64> = matches.iter().zip(&totals).map(|(&m, &t)| m as f64 / t as f64).collect();
        (100.0 * brevity_penalty * geo(&raw)).clamp(0.0, 100.0)
    };
    Ok(BleuReport {
        precisions,
        matches,
        totals,
        brevity_penalty,
        score,
        unsmoothed_score,
        hyp_len,
        ref_len,
        smoothing: "add-one on zero match counts".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identity_scores_100() {
        let c = vec![toks("the cat sat on the mat"), toks("a b")];
        let r = bleu(&c, &c, 4).unwrap();
        assert_eq!(r.score, 100.0);
        assert_eq!(r.brevity_penalty, 1.0);
    }

    #[test]
    fn clipping_canonical_example() {
        assert_eq!(clipped_matches(&toks("the cat"), &toks("the the the"), 1), (1, 3));
        let r = bleu(&[toks("the cat")], &[toks("the the the")], 1).unwrap();
        assert!((r.precisions[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn short_hypothesis_is_penalized() {
        let r = bleu(&[toks("a b c d e f")], &[toks("a b c d")], 4).unwrap();
        assert!(r.brevity_penalty < 1.0);
        assert!(r.score < 100.0);
        assert!((r.brevity_penalty - (1.0f64 - 6.0 / 4.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn unsmoothed_zero_is_representable() {
        let r = bleu(&[toks("a b c d")], &[toks("w x y z")], 4).unwrap();
        assert_eq!(r.unsmoothed_score, 0.0);
        assert!(r.score > 0.0 && r.score < 100.0);
    }

    #[test]
    fn empty_input_errors() {
        let empty: Vec<Vec<String>> = vec![];
        assert!(bleu(&empty, &empty, 4).is_err());
        assert!(bleu(&[toks("a")], &[toks("a"), toks("b")], 4).is_err());
    }
}
