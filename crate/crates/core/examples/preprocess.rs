//! Tokenize, truecase, filter and split a small parallel corpus, then build
//! vocabularies.

use minimt::corpus::{build_vocab, clean_pairs, split, tokenize, train_truecaser, truecase, ParallelCorpus};

fn main() -> minimt::Result<()> {
    let src = [
        "The cat didn't eat the fish, (sadly).",
        "the dog ate the rice.",
        "The Teacher said \"hello\" to the boy.",
        "A bird sang near the river today!",
        "The king's horse ran quickly.",
    ];
    let tgt = ["বিড়াল মাছ খায়নি ।", "কুকুর ভাত খেল ।", "শিক্ষক ছেলেকে বলল ।", "পাখি আজ নদীর কাছে গাইল !", "রাজার ঘোড়া দ্রুত দৌড়াল ।"];

    let toks: Vec<String> = tokenize(src[0])?.iter().map(|t| t.surface().to_string()).collect();
    println!("tokens: {toks:?}");

    let corpus = ParallelCorpus::from_lines(&src, &tgt, "en", "bn")?;
    let tc = train_truecaser(corpus.sources())?;
    let cased = corpus.map_sides(|s, t| (truecase(&tc, s), t.clone()));
    for s in cased.sources() {
        println!("{:>2}  {}", s.id, s.text());
    }

    let short = clean_pairs(&cased, 7)?;
    println!("kept {} of {} pairs with at most 7 tokens per side", short.len(), cased.len());

    let parts = split(&cased, (0.6, 0.2, 0.2), 42)?;
    println!("split: train {} / dev {} / test {}", parts.train.len(), parts.dev.len(), parts.test.len());

    let vocab = build_vocab(cased.sources(), 1)?;
    println!("source vocabulary: {} entries (4 reserved)", vocab.len());
    println!("encode `the cat`: {:?}", vocab.encode(["the", "cat", "zebra"]));
    Ok(())
}
