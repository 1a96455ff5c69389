//! Train a trigram Kneser-Ney model, query it, and round-trip it through ARPA
//! text.

use minimt::lm::{read_arpa, train_lm, write_arpa, NGramLM};

fn main() -> minimt::Result<()> {
    let text = "the cat sat on the mat\nthe dog sat on the log\na cat saw the dog\nthe mat was red";
    let sents: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
    let lm = train_lm(&sents, 3)?;

    for (ctx, w) in [(&["on", "the"][..], "mat"), (&["on", "the"][..], "cat"), (&[][..], "zebra")] {
        println!("log10 P({w} | {ctx:?}) = {:.4}", lm.logprob(ctx, w));
    }
    println!("sentence log10 P = {:.4}", lm.sentence_logprob(&["the", "cat", "sat"]));

    let vocab: Vec<&str> = text.split_whitespace().collect();
    let uniform = NGramLM::uniform(&vocab);
    println!("training perplexity: trained {:.3}, uniform {:.3}", lm.perplexity(&sents), uniform.perplexity(&sents));

    let arpa = write_arpa(&lm);
    let back = read_arpa(&arpa, "<memory>")?;
    println!("ARPA round trip identical: {}", write_arpa(&back) == arpa);
    println!("{}", arpa.lines().take(8).collect::<Vec<_>>().join("\n"));
    Ok(())
}
