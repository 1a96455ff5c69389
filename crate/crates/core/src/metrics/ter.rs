use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest block considered for a shift.
pub const MAX_SHIFT_LEN: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerReport {
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub shifts: usize,
    pub ref_len: usize,
    /// `100 * edits / ref_len`; exceeds 100 when the hypothesis needs more
    /// edits than the reference has words.
    pub score: f64,
}

impl TerReport {
    pub fn edits(&self) -> usize {
        self.insertions + self.deletions + self.substitutions + self.shifts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Match,
    Sub,
    /// Reference word missing from the hypothesis.
    Ins,
    /// Extra hypothesis word.
    Del,
}

fn table<T: PartialEq>(hyp: &[T], reference: &[T]) -> Vec<Vec<usize>> {
    let (n, m) = (hyp.len(), reference.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        d[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = d[i - 1][j - 1] + usize::from(hyp[i - 1] != reference[j - 1]);
            d[i][j] = diag.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d
}

/// Word-level Levenshtein distance.
pub fn levenshtein<T: PartialEq>(hyp: &[T], reference: &[T]) -> usize {
    let prev_len = reference.len() + 1;
    let mut prev: Vec<usize> = (0..prev_len).collect();
    let mut cur = vec![0usize; prev_len];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(h != r)).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[reference.len()]
}

fn trace<T: PartialEq>(hyp: &[T], reference: &[T]) -> Vec<Op> {
    let d = table(hyp, reference);
    let (mut i, mut j) = (hyp.len(), reference.len());
    let mut ops = Vec::with_capacity(i.max(j));
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let same = hyp[i - 1] == reference[j - 1];
            if d[i][j] == d[i - 1][j - 1] + usize::from(!same) {
                ops.push(if same { Op::Match } else { Op::Sub });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && d[i][j] == d[i][j - 1] + 1 {
            ops.push(Op::Ins);
            j -= 1;
        } else {
            ops.push(Op::Del);
            i -= 1;
        }
    }
    ops.reverse();
    ops
}

struct PathInfo {
    /// For each reference position, the hypothesis index in front of which it sits.
    ref_pos: Vec<usize>,
    /// Reference index each hypothesis word exactly matches, if any.
    hyp_match: Vec<Option<usize>>,
}

fn path_info<T: PartialEq>(hyp: &[T], reference: &[T]) -> PathInfo {
    let mut ref_pos = vec![0; reference.len()];
    let mut hyp_match = vec![None; hyp.len()];
    let (mut i, mut j) = (0, 0);
    for op in trace(hyp, reference) {
        match op {
            Op::Match | Op::Sub => {
                ref_pos[j] = i;
                if op == Op::Match {
                    hyp_match[i] = Some(j);
                }
                i += 1;
                j += 1;
            }
            Op::Ins => {
                ref_pos[j] = i;
                j += 1;
            }
            Op::Del => i += 1,
        }
    }
    PathInfo { ref_pos, hyp_match }
}

fn apply_shift<T: Clone>(hyp: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let block = &hyp[start..start + len];
    let mut rest: Vec<T> = hyp[..start].iter().chain(&hyp[start + len..]).cloned().collect();
    let at = if dest > start { dest - len } else { dest };
    rest.splice(at..at, block.iter().cloned());
    rest
}

/// Finds the block move that lowers the edit distance the most. Only blocks
/// that occur verbatim in the reference and are not already aligned there
/// are tried, moved to where the reference occurrence sits.
fn best_shift<T: PartialEq + Clone>(hyp: &[T], reference: &[T], current: usize) -> Option<(Vec<T>, usize)> {
    let info = path_info(hyp, reference);
    let mut best: Option<(Vec<T>, usize)> = None;
    for start in 0..hyp.len() {
        for len in (1..=MAX_SHIFT_LEN.min(hyp.len() - start).min(reference.len())).rev() {
            let block = &hyp[start..start + len];
            for j in 0..=reference.len() - len {
                if reference[j..j + len] != *block {
                    continue;
                }
                if (0..len).all(|k| info.hyp_match[start + k] == Some(j + k)) {
                    continue;
                }
                let dest = info.ref_pos[j];
                if dest >= start && dest <= start + len {
                    continue;
                }
                let moved = apply_shift(hyp, start, len, dest);
                let dist = levenshtein(&moved, reference);
                if best.as_ref().is_none_or(|(_, d)| dist < *d) {
                    best = Some((moved, dist));
                }
            }
        }
    }
    best.filter(|(_, d)| d + 1 < current)
}

/// Translation edit rate of one hypothesis against one reference. Shifts
/// are searched greedily and accepted only while they lower the total edit
/// count; the remainder is plain Levenshtein.
pub fn ter<T: PartialEq + Clone>(reference: &[T], hypothesis: &[T]) -> Result<TerReport> {
    if reference.is_empty() {
        return Err(Error::Config("TER needs a non-empty reference".into()));
    }
    let mut hyp = hypothesis.to_vec();
    let mut dist = levenshtein(&hyp, reference);
    let mut shifts = 0;
    while let Some((moved, d)) = best_shift(&hyp, reference, dist) {
        hyp = moved;
        dist = d;
        shifts += 1;
    }
    let (mut insertions, mut deletions, mut substitutions) = (0, 0, 0);
    for op in trace(&hyp, reference) {
        match op {
            Op::Ins => insertions += 1,
            Op::Del => deletions += 1,
            Op::Sub => substitutions += 1,
            Op::Match => {}
        }
    }
    debug_assert_eq!(insertions + deletions + substitutions, dist);
    let edits = dist + shifts;
    Ok(TerReport {
        insertions,
        deletions,
        substitutions,
        shifts,
        ref_len: reference.len(),
        score: 100.0 * edits as f64 / reference.len() as f64,
    })
}

/// Corpus TER: total edits over total reference words.
pub fn corpus_ter<S: AsRef<str> + PartialEq + Clone>(references: &[Vec<S>], hypotheses: &[Vec<S>]) -> Result<TerReport> {
    if references.len() != hypotheses.len() {
        return Err(Error::Misaligned { left: references.len(), right: hypotheses.len() });
    }
    if references.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut acc = TerReport { insertions: 0, deletions: 0, substitutions: 0, shifts: 0, ref_len: 0, score: 0.0 };
    for (r, h) in references.iter().zip(hypotheses) {
        let t = ter(r, h)?;
        acc.insertions += t.insertions;
        acc.deletions += t.deletions;
        acc.substitutions += t.substitutions;
        acc.shifts += t.shifts;
        acc.ref_len += t.ref_len;
    }
    acc.score = 100.0 * acc.edits() as f64 / acc.ref_len as f64;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_is_zero() {
        let r = ter(&toks("a b c"), &toks("a b c")).unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.edits(), 0);
    }

    #[test]
    fn single_shift() {
        let r = ter(&toks("a b c d"), &toks("a c d b")).unwrap();
        assert_eq!(r.shifts, 1);
        assert_eq!(r.edits(), 1);
        assert_eq!(r.score, 25.0);
    }

    #[test]
    fn insertions_push_score_past_100() {
        let r = ter(&toks("a b"), &toks("a b x y z")).unwrap();
        assert_eq!(r.deletions, 3);
        assert_eq!(r.score, 150.0);
    }

    #[test]
    fn empty_reference_is_an_error() {
        assert!(ter::<&str>(&[], &["a"]).is_err());
    }

    #[test]
    fn empty_hypothesis_costs_reference_length() {
        let r = ter(&toks("a b c"), &[]).unwrap();
        assert_eq!(r.insertions, 3);
        assert_eq!(r.score, 100.0);
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein(&toks("a c d b"), &toks("a b c d")), 2);
        assert_eq!(levenshtein::<&str>(&[], &toks("x y")), 2);
        assert_eq!(levenshtein(&toks("kitten"), &toks("sitting")), 1);
    }

    #[test]
    fn shift_helper_moves_blocks_both_ways() {
        assert_eq!(apply_shift(&[0, 1, 2, 3, 4], 3, 1, 1), vec![0, 3, 1, 2, 4]);
        assert_eq!(apply_shift(&[0, 1, 2, 3, 4], 0, 2, 4), vec![2, 3, 0, 1, 4]);
    }
}
