//! Build a phrase table and trigram LM from the toy corpus, then decode with
//! the stack decoder and print the per-phrase trace.

use minimt::corpus::Sentence;
use minimt::lm::train_lm;
use minimt::smt::{build_phrase_table, decode, DecoderConfig};
use minimt::synthetic::synthetic_corpus;

fn main() -> minimt::Result<()> {
    let corpus = synthetic_corpus(300, 5)?;
    let table = build_phrase_table(&corpus, 10, 4)?;
    let targets: Vec<Vec<String>> = corpus.targets().map(Sentence::words).collect();
    let lm = train_lm(&targets, 3)?;
    println!("{} phrase pairs", table.len());

    let cfg = DecoderConfig { beam_size: 50, ..DecoderConfig::default() };
    for line in ["the dog ate the fish .", "a zebra slept today ."] {
        let words: Vec<&str> = line.split_whitespace().collect();
        let r = decode(&words, &table, &lm, &cfg)?;
        println!("\n{line}\n=> {}   (score {:.3}{})", r.translation.join(" "), r.score, if r.fallback { ", fallback" } else { "" });
        for s in &r.steps {
            println!("   [{}..{}) {:<14} -> {:<20} tm {:>7.3} lm {:>7.3} d {:>5.2}{}", s.src_span.0, s.src_span.1, s.src, s.tgt, s.tm, s.lm, s.distortion, if s.oov { "  (copied)" } else { "" });
        }
    }
    Ok(())
}
