use std::collections::HashMap;
use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use super::phrase::{PhraseOption, PhraseTable, DEFAULT_MAX_PHRASE_LEN};
use crate::corpus::{BOS, EOS};
use crate::error::{Error, Result};
use crate::lm::NGramLM;

/// Log-linear weights. Translation-model features are natural logs of the
/// four phrase scores, the LM feature is ln P, distortion is minus the jump
/// width and the word penalty is minus the number of target words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub tm: [f64; 4],
    pub lm: f64,
    pub distortion: f64,
    pub word_penalty: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { tm: [1.0; 4], lm: 1.0, distortion: 0.6, word_penalty: -1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub beam_size: usize,
    /// Largest allowed jump between consecutive phrases; `None` for no limit.
    pub distortion_limit: Option<usize>,
    pub max_phrase_len: usize,
    /// Options kept per source phrase, best φ(t|s) first.
    pub ttable_limit: Option<usize>,
    pub weights: Weights,
    /// Score added for each source word copied through untranslated.
    pub oov_penalty: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            beam_size: 100,
            distortion_limit: Some(6),
            max_phrase_len: DEFAULT_MAX_PHRASE_LEN,
            ttable_limit: Some(20),
            weights: Weights::default(),
            oov_penalty: -10.0,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        let w = &self.weights;
        let finite = w.tm.iter().chain([&w.lm, &w.distortion, &w.word_penalty, &self.oov_penalty]).all(|x| x.is_finite());
        if self.beam_size == 0 {
            return Err(Error::Config("beam_size must be at least 1".into()));
        }
        if self.max_phrase_len == 0 {
            return Err(Error::Config("max_phrase_len must be at least 1".into()));
        }
        if !finite {
            return Err(Error::Config("decoder weights must be finite".into()));
        }
        Ok(())
    }
}

/// One applied phrase with its weighted feature contributions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub src_span: (usize, usize),
    pub src: String,
    pub tgt: String,
    pub oov: bool,
    pub tm: f64,
    pub lm: f64,
    pub distortion: f64,
    pub word_penalty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeResult {
    pub translation: Vec<String>,
    pub score: f64,
    /// LM score of `</s>`, already included in `score`.
    pub end_lm: f64,
    pub steps: Vec<TraceStep>,
    /// True when no hypothesis completed and a monotone fallback was used.
    pub fallback: bool,
}

impl DecodeResult {
    pub fn trace_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

struct TranslationOption {
    start: usize,
    end: usize,
    tgt: Vec<String>,
    tgt_ids: Vec<u32>,
    oov: bool,
    /// Weighted TM (or OOV penalty) plus word penalty.
    static_score: f64,
    tm: f64,
    word_penalty: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Coverage(Vec<u64>);

impl Coverage {
    fn new(n: usize) -> Self {
        Coverage(vec![0; n.div_ceil(64).max(1)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn with_span(&self, start: usize, end: usize) -> Self {
        let mut c = self.clone();
        for i in start..end {
            c.0[i / 64] |= 1 << (i % 64);
        }
        c
    }

    fn span_free(&self, start: usize, end: usize) -> bool {
        (start..end).all(|i| !self.get(i))
    }
}

struct Hyp {
    coverage: Coverage,
    covered: usize,
    lm_state: Vec<u32>,
    last_end: usize,
    score: f64,
    future: f64,
    back: Option<(usize, usize, f64, f64)>, // predecessor, option, lm, distortion
}

fn collect_options<S: AsRef<str>>(src: &[S], table: &PhraseTable, lm: &NGramLM, cfg: &DecoderConfig) -> Vec<TranslationOption> {
    let w = &cfg.weights;
    let max_len = cfg.max_phrase_len.min(table.max_src_len().max(1));
    let mut out = Vec::new();
    for start in 0..src.len() {
        for end in start + 1..=src.len().min(start + max_len) {
            let opts: &[PhraseOption] = table.options(&src[start..end]);
            let limit = cfg.ttable_limit.unwrap_or(usize::MAX);
            for o in opts.iter().take(limit) {
                let tm: f64 = o.scores.iter().zip(w.tm).map(|(p, l)| l * p.ln()).sum();
                let wp = -w.word_penalty * o.tgt.len() as f64;
                out.push(TranslationOption {
                    start,
                    end,
                    tgt_ids: o.tgt.iter().map(|t| lm.id(t)).collect(),
                    tgt: o.tgt.clone(),
                    oov: false,
                    static_score: tm + wp,
                    tm,
                    word_penalty: wp,
                });
            }
        }
    }
    for (i, word) in src.iter().enumerate() {
        if !out.iter().any(|o| o.start <= i && i < o.end) {
            let wp = -w.word_penalty;
            out.push(TranslationOption {
                start: i,
                end: i + 1,
                tgt: vec![word.as_ref().to_string()],
                tgt_ids: vec![lm.id(word.as_ref())],
                oov: true,
                static_score: cfg.oov_penalty + wp,
                tm: cfg.oov_penalty,
                word_penalty: wp,
            });
        }
    }
    out
}

/// Best-case cost of every span: the best single option (scored with a
/// context-free LM estimate) or the best split into two cheaper spans.
fn future_costs(n: usize, options: &[TranslationOption], lm: &NGramLM, lm_weight: f64) -> Vec<Vec<f64>> {
    let mut fc = vec![vec![f64::NEG_INFINITY; n + 1]; n + 1];
    for o in options {
        let lm_est: f64 = o.tgt_ids.iter().map(|&id| lm.logprob_ids(&[], id)).sum::<f64>() * LN_10 * lm_weight;
        let s = o.static_score + lm_est;
        if s > fc[o.start][o.end] {
            fc[o.start][o.end] = s;
        }
    }
    for len in 2..=n {
        for i in 0..=n - len {
            let j = i + len;
            for k in i + 1..j {
                let split = fc[i][k] + fc[k][j];
                if split > fc[i][j] {
                    fc[i][j] = split;
                }
            }
        }
    }
    fc
}

fn future_of(cov: &Coverage, n: usize, fc: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    let mut i = 0;
    while i < n {
        if cov.get(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !cov.get(i) {
            i += 1;
        }
        total += fc[start][i];
    }
    total
}

/// Weighted LM score (natural log) of appending `ids` after `state`, and
/// the resulting state.
fn lm_extend(lm: &NGramLM, state: &[u32], ids: &[u32], weight: f64) -> (f64, Vec<u32>) {
    let keep = lm.order().saturating_sub(1);
    let mut ctx = state.to_vec();
    let mut total = 0.0;
    for &id in ids {
        total += lm.logprob_ids(&ctx, id);
        ctx.push(id);
        if ctx.len() > keep {
            ctx.drain(..ctx.len() - keep);
        }
    }
    (total * LN_10 * weight, ctx)
}

fn initial_state(lm: &NGramLM) -> Vec<u32> {
    if lm.order() > 1 {
        vec![BOS]
    } else {
        Vec::new()
    }
}

/// Phrase-based stack decoding. Stacks are indexed by the number of covered
/// source words; hypotheses with the same coverage, LM state and last phrase
/// end are recombined, and each stack is pruned to `beam_size` by partial
/// plus future score before it is expanded.
pub fn decode<S: AsRef<str>>(src: &[S], table: &PhraseTable, lm: &NGramLM, cfg: &DecoderConfig) -> Result<DecodeResult> {
    cfg.validate()?;
    if table.is_empty() {
        return Err(Error::EmptyPhraseTable);
    }
    let n = src.len();
    let w = &cfg.weights;
    let options = collect_options(src, table, lm, cfg);
    let fc = future_costs(n, &options, lm, w.lm);
    let mut by_start: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, o) in options.iter().enumerate() {
        by_start[o.start].push(i);
    }

    let mut arena: Vec<Hyp> = Vec::new();
    let mut stacks: Vec<HashMap<(Coverage, Vec<u32>, usize), usize>> = vec![HashMap::new(); n + 1];
    let empty = Coverage::new(n);
    arena.push(Hyp {
        future: future_of(&empty, n, &fc),
        coverage: empty.clone(),
        covered: 0,
        lm_state: initial_state(lm),
        last_end: 0,
        score: 0.0,
        back: None,
    });
    stacks[0].insert((empty, arena[0].lm_state.clone(), 0), 0);

    let mut finished: Vec<(usize, f64, f64)> = Vec::new();
    for k in 0..=n {
        let mut live: Vec<usize> = stacks[k].values().copied().collect();
        live.sort_by(|&a, &b| {
            let (ha, hb) = (&arena[a], &arena[b]);
            (hb.score + hb.future).total_cmp(&(ha.score + ha.future)).then(a.cmp(&b))
        });
        live.truncate(cfg.beam_size);
        if k == n {
            for h in live {
                let (end_lm, _) = lm_extend(lm, &arena[h].lm_state, &[EOS], w.lm);
                finished.push((h, arena[h].score + end_lm, end_lm));
            }
            break;
        }
        for h in live {
            for start in 0..n {
                if arena[h].coverage.get(start) {
                    continue;
                }
                let jump = start.abs_diff(arena[h].last_end);
                if cfg.distortion_limit.is_some_and(|d| jump > d) {
                    continue;
                }
                for &oi in &by_start[start] {
                    let o = &options[oi];
                    let hyp = &arena[h];
                    if !hyp.coverage.span_free(o.start, o.end) {
                        continue;
                    }
                    let dist = -w.distortion * jump as f64;
                    let (lm_score, lm_state) = lm_extend(lm, &hyp.lm_state, &o.tgt_ids, w.lm);
                    let coverage = hyp.coverage.with_span(o.start, o.end);
                    let covered = hyp.covered + o.end - o.start;
                    let score = hyp.score + o.static_score + lm_score + dist;
                    let key = (coverage, lm_state, o.end);
                    if let Some(&existing) = stacks[covered].get(&key) {
                        if arena[existing].score >= score {
                            continue;
                        }
                    }
                    let future = future_of(&key.0, n, &fc);
                    let id = arena.len();
                    arena.push(Hyp {
                        coverage: key.0.clone(),
                        covered,
                        lm_state: key.1.clone(),
                        last_end: o.end,
                        score,
                        future,
                        back: Some((h, oi, lm_score, dist)),
                    });
                    stacks[covered].insert(key, id);
                }
            }
        }
    }

    let best = finished.into_iter().fold(None::<(usize, f64, f64)>, |acc, cur| match acc {
        Some(a) if a.1 >= cur.1 => Some(a),
        _ => Some(cur),
    });
    let Some((h, score, end_lm)) = best else {
        return monotone_fallback(src, &options, lm, cfg);
    };
    let mut steps = Vec::new();
    let mut cur = h;
    while let Some((prev, oi, lm_score, dist)) = arena[cur].back {
        steps.push(trace_step(src, &options[oi], lm_score, dist));
        cur = prev;
    }
    steps.reverse();
    let translation = steps.iter().flat_map(|s| s.tgt.split(' ').map(str::to_string)).collect();
    Ok(DecodeResult { translation, score, end_lm, steps, fallback: false })
}

fn trace_step<S: AsRef<str>>(src: &[S], o: &TranslationOption, lm: f64, distortion: f64) -> TraceStep {
    TraceStep {
        src_span: (o.start, o.end),
        src: src[o.start..o.end].iter().map(|w| w.as_ref()).collect::<Vec<_>>().join(" "),
        tgt: o.tgt.join(" "),
        oov: o.oov,
        tm: o.tm,
        lm,
        distortion,
        word_penalty: o.word_penalty,
    }
}

/// Left-to-right greedy segmentation used when the distortion limit leaves
/// no complete hypothesis. Each position takes the longest phrase starting
/// there, or copies the word through.
fn monotone_fallback<S: AsRef<str>>(
    src: &[S],
    options: &[TranslationOption],
    lm: &NGramLM,
    cfg: &DecoderConfig,
) -> Result<DecodeResult> {
    let w = &cfg.weights;
    let mut state = initial_state(lm);
    let mut steps = Vec::new();
    let mut score = 0.0;
    let mut i = 0;
    while i < src.len() {
        let o = options
            .iter()
            .filter(|o| o.start == i)
            .max_by(|a, b| a.end.cmp(&b.end).then(a.static_score.total_cmp(&b.static_score)))
            .expect("every position has an option");
        let (lm_score, next) = lm_extend(lm, &state, &o.tgt_ids, w.lm);
        score += o.static_score + lm_score;
        steps.push(trace_step(src, o, lm_score, 0.0));
        state = next;
        i = o.end;
    }
    let (end_lm, _) = lm_extend(lm, &state, &[EOS], w.lm);
    let translation = steps.iter().flat_map(|s| s.tgt.split(' ').map(str::to_string)).collect();
    Ok(DecodeResult { translation, score: score + end_lm, end_lm, steps, fallback: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(tgt: &str, p: f64) -> PhraseOption {
        PhraseOption { tgt: tgt.split(' ').map(str::to_string).collect(), scores: [p, p, p, p] }
    }

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn identity_table_reproduces_input() {
        let sent = words("the cat sat on the mat");
        let mut table = PhraseTable::new();
        for w in ["the", "cat", "sat", "on", "mat"] {
            table.insert(vec![w.into()], opt(w, 1.0));
        }
        let lm = NGramLM::uniform(&sent);
        let cfg = DecoderConfig { weights: Weights { distortion: 0.0, ..Weights::default() }, ..Default::default() };
        let out = decode(&sent, &table, &lm, &cfg).unwrap();
        assert_eq!(out.translation, sent);
    }

    #[test]
    fn lm_picks_between_options() {
        let mut table = PhraseTable::new();
        table.insert(vec!["a".into()], opt("x", 0.6));
        table.insert(vec!["a".into()], opt("y", 0.4));
        let corpus = vec![words("y"), words("y"), words("y"), words("x")];
        let lm = crate::lm::train_lm(&corpus, 2).unwrap();
        let tm_only = DecoderConfig { weights: Weights { lm: 0.0, ..Weights::default() }, ..Default::default() };
        assert_eq!(decode(&["a"], &table, &lm, &tm_only).unwrap().translation, ["x"]);
        let lm_heavy = DecoderConfig { weights: Weights { lm: 10.0, ..Weights::default() }, ..Default::default() };
        assert_eq!(decode(&["a"], &table, &lm, &lm_heavy).unwrap().translation, ["y"]);
    }

    #[test]
    fn oov_is_copied_with_penalty() {
        let mut table = PhraseTable::new();
        table.insert(vec!["a".into()], opt("x", 1.0));
        let lm = NGramLM::uniform(&["x"]);
        let out = decode(&["a", "zz"], &table, &lm, &DecoderConfig::default()).unwrap();
        assert_eq!(out.translation, ["x", "zz"]);
        assert!(out.steps[1].oov);
        assert_eq!(out.steps[1].tm, -10.0);
    }

    #[test]
    fn empty_table_is_an_error() {
        let lm = NGramLM::uniform(&["x"]);
        assert!(matches!(decode(&["a"], &PhraseTable::new(), &lm, &DecoderConfig::default()), Err(Error::EmptyPhraseTable)));
    }

    #[test]
    fn trace_components_add_up() {
        let mut table = PhraseTable::new();
        table.insert(words("a b"), opt("y x", 0.5));
        table.insert(words("a"), opt("x", 0.9));
        table.insert(words("b"), opt("y", 0.8));
        let lm = crate::lm::train_lm(&[words("y x"), words("x y")], 2).unwrap();
        let out = decode(&["a", "b"], &table, &lm, &DecoderConfig::default()).unwrap();
        let sum: f64 = out.steps.iter().map(|s| s.tm + s.lm + s.distortion + s.word_penalty).sum::<f64>() + out.end_lm;
        assert!((sum - out.score).abs() < 1e-9);
        assert!(out.trace_json().contains("\"src_span\""));
    }
}
