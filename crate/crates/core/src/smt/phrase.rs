use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::ibm1::{Alignment, TranslationTable};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_PHRASE_LEN: usize = 7;

/// Smallest value any phrase score may take, so every score stays in (0, 1].
pub const SCORE_FLOOR: f64 = 1e-10;

/// A phrase pair cut out of one sentence pair, with the links inside it in
/// phrase-local coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhrasePair {
    pub src: Vec<String>,
    pub tgt: Vec<String>,
    pub links: Vec<(usize, usize)>,
}

/// Source and target spans (inclusive) of one consistent box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhraseBox {
    pub src: (usize, usize),
    pub tgt: (usize, usize),
}

/// All boxes consistent with the alignment: at least one link inside, no
/// link leaving it, both sides at most `max_len` words. Unaligned words at
/// the target edges are absorbed in every combination.
pub fn phrase_boxes(alignment: &Alignment, src_len: usize, tgt_len: usize, max_len: usize) -> Vec<PhraseBox> {
    let mut tgt_aligned = vec![false; tgt_len];
    for &(_, t) in &alignment.links {
        tgt_aligned[t] = true;
    }
    let mut boxes = Vec::new();
    for s1 in 0..src_len {
        for s2 in s1..src_len.min(s1 + max_len) {
            let mut lo = usize::MAX;
            let mut hi = 0;
            for &(s, t) in &alignment.links {
                if (s1..=s2).contains(&s) {
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
            }
            if lo == usize::MAX || hi - lo + 1 > max_len {
                continue;
            }
            let leaks = alignment.links.iter().any(|&(s, t)| (lo..=hi).contains(&t) && !(s1..=s2).contains(&s));
            if leaks {
                continue;
            }
            let mut t1 = lo;
            loop {
                let mut t2 = hi;
                while t2 - t1 < max_len {
                    boxes.push(PhraseBox { src: (s1, s2), tgt: (t1, t2) });
                    t2 += 1;
                    if t2 >= tgt_len || tgt_aligned[t2] {
                        break;
                    }
                }
                if t1 == 0 || tgt_aligned[t1 - 1] {
                    break;
                }
                t1 -= 1;
                if hi - t1 + 1 > max_len {
                    break;
                }
            }
        }
    }
    boxes
}

pub fn extract_phrases<S: AsRef<str>>(src: &[S], tgt: &[S], alignment: &Alignment, max_len: usize) -> Vec<PhrasePair> {
    phrase_boxes(alignment, src.len(), tgt.len(), max_len)
        .into_iter()
        .map(|b| PhrasePair {
            src: src[b.src.0..=b.src.1].iter().map(|w| w.as_ref().to_string()).collect(),
            tgt: tgt[b.tgt.0..=b.tgt.1].iter().map(|w| w.as_ref().to_string()).collect(),
            links: alignment
                .links
                .iter()
                .filter(|&&(s, t)| (b.src.0..=b.src.1).contains(&s) && (b.tgt.0..=b.tgt.1).contains(&t))
                .map(|&(s, t)| (s - b.src.0, t - b.tgt.0))
                .collect(),
        })
        .collect()
}

fn by_forward_score(a: &PhraseOption, b: &PhraseOption) -> std::cmp::Ordering {
    b.scores[0].total_cmp(&a.scores[0]).then_with(|| a.tgt.cmp(&b.tgt))
}

/// Scores in Moses order: φ(t|s), φ(s|t), lex(t|s), lex(s|t).
#[derive(Clone, Debug, PartialEq)]
pub struct PhraseOption {
    pub tgt: Vec<String>,
    pub scores: [f64; 4],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhraseTable {
    entries: BTreeMap<Vec<String>, Vec<PhraseOption>>,
    max_src_len: usize,
}

impl PhraseTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, src: Vec<String>, option: PhraseOption) {
        self.max_src_len = self.max_src_len.max(src.len());
        let opts = self.entries.entry(src).or_default();
        opts.push(option);
        opts.sort_by(by_forward_score);
    }

    /// Options for a source phrase, best φ(t|s) first.
    pub fn options<S: AsRef<str>>(&self, src: &[S]) -> &[PhraseOption] {
        let key: Vec<String> = src.iter().map(|w| w.as_ref().to_string()).collect();
        self.entries.get(&key).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_src_len(&self) -> usize {
        self.max_src_len
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[String], &PhraseOption)> {
        self.entries.iter().flat_map(|(s, opts)| opts.iter().map(move |o| (s.as_slice(), o)))
    }

    fn push_unsorted(&mut self, src: Vec<String>, option: PhraseOption) {
        self.max_src_len = self.max_src_len.max(src.len());
        self.entries.entry(src).or_default().push(option);
    }

    fn sort_options(&mut self) {
        for opts in self.entries.values_mut() {
            opts.sort_by(by_forward_score);
        }
    }

    /// `src ||| tgt ||| p1 p2 p3 p4`, one entry per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (src, o) in self.iter() {
            let s = o.scores;
            let _ = writeln!(out, "{} ||| {} ||| {} {} {} {}", src.join(" "), o.tgt.join(" "), s[0], s[1], s[2], s[3]);
        }
        out
    }

    /// Reads the text format; extra trailing `|||` fields are ignored.
    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let mut table = PhraseTable::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
            if fields.len() < 3 {
                return Err(Error::parse(path, i + 1, "expected `src ||| tgt ||| scores`"));
            }
            let src: Vec<String> = fields[0].split_whitespace().map(str::to_string).collect();
            let tgt: Vec<String> = fields[1].split_whitespace().map(str::to_string).collect();
            if src.is_empty() || tgt.is_empty() {
                return Err(Error::parse(path, i + 1, "empty phrase"));
            }
            let nums: Vec<f64> = fields[2]
                .split_whitespace()
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(path, i + 1, format!("bad score: {e}")))?;
            let scores: [f64; 4] = nums
                .try_into()
                .map_err(|_| Error::parse(path, i + 1, "expected four scores"))?;
            if scores.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
                return Err(Error::parse(path, i + 1, "scores must lie in (0, 1]"));
            }
            table.push_unsorted(src, PhraseOption { tgt, scores });
        }
        table.sort_options();
        Ok(table)
    }
}

/// Lexical weight of `tgt` given `src` under the phrase-internal links:
/// each target word averages t(f|e) over its linked source words, or takes
/// t(f|NULL) when unlinked.
pub fn lexical_weight<F>(src: &[String], tgt: &[String], links: &[(usize, usize)], prob: F, null: impl Fn(&str) -> f64) -> f64
where
    F: Fn(&str, &str) -> f64,
{
    let mut w = 1.0;
    for (j, f) in tgt.iter().enumerate() {
        let linked: Vec<usize> = links.iter().filter(|l| l.1 == j).map(|l| l.0).collect();
        w *= if linked.is_empty() {
            null(f)
        } else {
            linked.iter().map(|&i| prob(&src[i], f)).sum::<f64>() / linked.len() as f64
        };
    }
    w
}

/// Relative-frequency phrase probabilities plus lexical weights. `t_fwd`
/// holds t(target | source) and `t_rev` t(source | target). A pair seen with
/// several internal alignments keeps its best lexical weight.
pub fn score_phrase_table(pairs: &[PhrasePair], t_fwd: &TranslationTable, t_rev: &TranslationTable) -> Result<PhraseTable> {
    if pairs.is_empty() {
        return Err(Error::EmptyPhraseTable);
    }
    let mut joint: HashMap<(&[String], &[String]), (u64, f64, f64)> = HashMap::new();
    let mut src_count: HashMap<&[String], u64> = HashMap::new();
    let mut tgt_count: HashMap<&[String], u64> = HashMap::new();
    for p in pairs {
        let fwd = lexical_weight(&p.src, &p.tgt, &p.links, |e, f| t_fwd.prob(e, f), |f| t_fwd.null_prob(f));
        let flipped: Vec<(usize, usize)> = p.links.iter().map(|&(s, t)| (t, s)).collect();
        let rev = lexical_weight(&p.tgt, &p.src, &flipped, |f, e| t_rev.prob(f, e), |e| t_rev.null_prob(e));
        let e = joint.entry((&p.src, &p.tgt)).or_insert((0, 0.0, 0.0));
        e.0 += 1;
        e.1 = e.1.max(fwd);
        e.2 = e.2.max(rev);
        *src_count.entry(&p.src).or_insert(0) += 1;
        *tgt_count.entry(&p.tgt).or_insert(0) += 1;
    }
    let mut table = PhraseTable::new();
    for ((s, t), (n, lex_ts, lex_st)) in joint {
        let scores = [
            n as f64 / src_count[s] as f64,
            n as f64 / tgt_count[t] as f64,
            lex_ts.clamp(SCORE_FLOOR, 1.0),
            lex_st.clamp(SCORE_FLOOR, 1.0),
        ];
        table.push_unsorted(s.to_vec(), PhraseOption { tgt: t.to_vec(), scores });
    }
    table.sort_options();
    Ok(table)
}
