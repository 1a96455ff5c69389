//! IBM Model 1 in both directions, grow-diag-final symmetrization and
//! phrase extraction on a handful of German-English pairs.

use minimt::corpus::ParallelCorpus;
use minimt::smt::{extract_phrases, symmetrize, train_ibm1_logged, viterbi_align, DEFAULT_MAX_PHRASE_LEN};

fn main() -> minimt::Result<()> {
    let corpus = ParallelCorpus::from_lines(
        &["das haus", "das buch", "ein buch", "das haus ist klein", "ein haus ist gross"],
        &["the house", "the book", "a book", "the house is small", "a house is big"],
        "de",
        "en",
    )?;
    let fwd = train_ibm1_logged(&corpus, 10)?;
    let rev = train_ibm1_logged(&corpus.reversed(), 10)?;
    let ll: Vec<String> = fwd.log_likelihoods.iter().map(|x| format!("{x:.3}")).collect();
    println!("log-likelihood per iteration: {}", ll.join(" "));
    println!("t(the | das) = {:.3}", fwd.table.prob("das", "the"));

    let (s, t) = &corpus.pairs()[3];
    let (src, tgt) = (s.words(), t.words());
    let a_fwd = viterbi_align(&fwd.table, &src, &tgt);
    let a_rev = viterbi_align(&rev.table, &tgt, &src).transposed();
    let sym = symmetrize(&a_fwd, &a_rev, src.len(), tgt.len());
    println!("{src:?} / {tgt:?}");
    println!("forward {}  reverse {}  symmetric {}", a_fwd.to_pharaoh(), a_rev.to_pharaoh(), sym.to_pharaoh());
    for p in extract_phrases(&src, &tgt, &sym, DEFAULT_MAX_PHRASE_LEN) {
        println!("  {} -> {}", p.src.join(" "), p.tgt.join(" "));
    }
    Ok(())
}
