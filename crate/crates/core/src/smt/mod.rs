//! Phrase-based translation: word alignment, phrase extraction and scoring,
//! and a stack decoder.

pub mod decoder;
pub mod ibm1;
pub mod phrase;

pub use decoder::{decode, DecodeResult, DecoderConfig, TraceStep, Weights};
pub use ibm1::{symmetrize, train_ibm1, train_ibm1_logged, viterbi_align, Alignment, Ibm1Fit, TranslationTable, NULL};
pub use phrase::{
    extract_phrases, lexical_weight, phrase_boxes, score_phrase_table, PhraseBox, PhraseOption, PhrasePair,
    PhraseTable, DEFAULT_MAX_PHRASE_LEN,
};

use crate::corpus::ParallelCorpus;
use crate::error::Result;

pub const DEFAULT_IBM1_ITERATIONS: usize = 10;

/// Aligns both directions, symmetrizes, extracts and scores phrases.
pub fn build_phrase_table(corpus: &ParallelCorpus, iterations: usize, max_phrase_len: usize) -> Result<PhraseTable> {
    let t_fwd = train_ibm1(corpus, iterations)?;
    let t_rev = train_ibm1(&corpus.reversed(), iterations)?;
    let mut pairs = Vec::new();
    for (s, t) in corpus.pairs() {
        let src = s.words();
        let tgt = t.words();
        let fwd = viterbi_align(&t_fwd, &src, &tgt);
        let rev = viterbi_align(&t_rev, &tgt, &src).transposed();
        let sym = symmetrize(&fwd, &rev, src.len(), tgt.len());
        pairs.extend(extract_phrases(&src, &tgt, &sym, max_phrase_len));
    }
    score_phrase_table(&pairs, &t_fwd, &t_rev)
}
