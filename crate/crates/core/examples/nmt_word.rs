//! Word-level encoder-decoder with and without attention on a small slice of
//! the toy corpus; prints training curves, translations and one attention
//! matrix.

use minimt::corpus::Sentence;
use minimt::nmt::{examples_for, next_token_accuracy, train_word_nmt, TrainConfig};
use minimt::synthetic::synthetic_corpus;

fn main() -> minimt::Result<()> {
    let corpus = synthetic_corpus(40, 11)?;
    let base = TrainConfig { epochs: 150, batch_size: 8, lr: 0.005, hidden: 48, embed: 24, ..TrainConfig::word() };
    for attention in [false, true] {
        let out = train_word_nmt(&corpus, &TrainConfig { attention, ..base.clone() })?;
        let m = &out.model;
        let acc = next_token_accuracy(m, &examples_for(m, &corpus, base.max_len))?;
        println!("attention={attention}: final loss {:.3}, next-token accuracy {:.1}%", out.history.last().unwrap().loss, 100.0 * acc);
        let (s, t) = &corpus.pairs()[0];
        println!("  {}\n  ref {}\n  hyp {}", s.text(), t.text(), m.translate(&s.text(), 40)?);

        if attention {
            let src = m.encode_source(&s.text());
            let enc = m.encode(&src)?;
            let words = s.words();
            let mut state = enc.last.clone();
            let mut y = minimt::corpus::BOS;
            for tgt in Sentence::words(t).iter().take(4) {
                let step = m.decode_step(y, &state, &enc);
                let alpha = step.alpha.as_ref().expect("attention model");
                let best = alpha.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |x| x.0);
                println!("  {tgt:<12} attends most to {:?} ({:.2})", words.get(best).map_or("</s>", String::as_str), alpha[best]);
                y = m.tgt_vocab.index(tgt);
                state = step.state;
            }
        }
    }
    Ok(())
}
