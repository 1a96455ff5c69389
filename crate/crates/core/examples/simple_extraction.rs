//! Simple-sentence extraction on the bundled toy corpus: mine chunk-pattern
//! rules, train the feed-forward classifier, cross-validate it, and filter a
//! corpus down to its Simple sentences.

use minimt::metrics::classification_stats;
use minimt::simplex::{
    classify_rule, cross_validate, extract_simple, fallback_chunk, mine_rules, train_ffnn, FfnnConfig, Label,
    LabeledDataset,
};
use minimt::synthetic::{bundled_files, synthetic_corpus, BUNDLED_PAIRS, BUNDLED_SEED};

fn main() -> minimt::Result<()> {
    let files = bundled_files();
    let data = LabeledDataset::from_text(&files[3].1, "synthetic.labels")?;
    println!("{} labeled sequences: {} simple, {} other", data.len(), data.count(Label::Simple), data.count(Label::Other));

    let rules = mine_rules(data.items.iter().filter(|(_, l)| *l == Label::Simple).map(|(c, _)| c))?;
    print!("mined rules:\n{}", rules.to_text());
    let hits = data.items.iter().filter(|(c, l)| classify_rule(&rules, c) == (*l == Label::Simple)).count();
    println!("rule accuracy on the labeled set: {hits}/{}", data.len());

    let cfg = FfnnConfig { lr: 0.01, epochs: 40, batch_size: 32, max_len: 12, ..FfnnConfig::default() };
    let fit = train_ffnn(&data, &cfg)?;
    println!("ffnn loss: first {:.4}, last {:.4}", fit.epoch_losses[0], fit.epoch_losses.last().unwrap());

    let cm = cross_validate(&data, 10, &cfg, 1)?;
    let stats = classification_stats(&cm, Label::Other)?;
    println!("10-fold CV over {} items: {stats:?}", cm.total());

    // Heuristic chunking stands in for a real chunker here.
    let corpus = synthetic_corpus(BUNDLED_PAIRS, BUNDLED_SEED)?;
    let out = extract_simple(&corpus, |s| Ok(fallback_chunk(s)), &rules)?;
    println!("extracted {} simple of {} (heuristic chunks)", out.simple.len(), out.total());
    Ok(())
}
