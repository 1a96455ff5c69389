//! Character-level model (one-hot inputs, no attention) learning to copy
//! short strings.

use minimt::corpus::ParallelCorpus;
use minimt::nmt::{examples_for, exact_match_rate, train_char_nmt, TrainConfig};
use minimt::synthetic::copy_strings;

fn main() -> minimt::Result<()> {
    let words = copy_strings(30, 5, 2, 4, 3);
    let corpus = ParallelCorpus::from_lines(&words, &words, "src", "tgt")?;
    let cfg = TrainConfig { epochs: 60, batch_size: 8, lr: 0.01, hidden: 48, ..TrainConfig::char() };
    let out = train_char_nmt(&corpus, &cfg)?;
    for (i, e) in out.history.iter().enumerate().step_by(10) {
        println!("epoch {:>3}: loss {:.3}  token accuracy {:.1}%", i + 1, e.loss, 100.0 * e.accuracy);
    }
    let ex = examples_for(&out.model, &corpus, cfg.max_len);
    println!("exact-copy rate: {:.1}%", 100.0 * exact_match_rate(&out.model, &ex, 20)?);
    for w in words.iter().take(5) {
        println!("  {w} -> {}", out.model.translate(w, 20)?);
    }
    Ok(())
}
