//! BLEU and TER on a few hypotheses, classifier statistics from a confusion
//! table, and a manual-rating round trip.

use minimt::metrics::{
    aggregate_ratings, classification_stats, evaluate, make_rating_sheet, read_ratings, ter, ConfusionMatrix,
};
use minimt::simplex::Label;

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> minimt::Result<()> {
    let refs: Vec<Vec<String>> = ["the cat sat on the mat", "a dog barked loudly at night"].map(toks).to_vec();
    let hyps: Vec<Vec<String>> = ["the cat sat on a mat", "at night a dog barked loudly"].map(toks).to_vec();
    let report = evaluate("demo", &refs, &hyps, &["bleu", "ter"])?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    let shifted = ter(&toks("a b c d"), &toks("a c d b"))?;
    println!("TER(a b c d | a c d b) = {} ({} shift)", shifted.score, shifted.shifts);

    // Rows are predicted Other / predicted Simple.
    let cm = ConfusionMatrix::from_predicted_rows([[1275, 90], [220, 1291]]);
    println!("{:?}", classification_stats(&cm, Label::Other)?);

    let sources = ["ami bhat khai", "se boi pore"];
    let outputs = ["i eat rice", "he reads book"];
    let mut sheet = Vec::new();
    make_rating_sheet(&mut sheet, &sources, &outputs, 7)?;
    print!("{}", String::from_utf8_lossy(&sheet));
    let filled = "sentence_id,rater_id,adequacy,fluency\n1,r1,5,4\n2,r1,4,3\n1,r2,4,4\n2,r2,3,3\n";
    let summary = aggregate_ratings(&read_ratings(filled.as_bytes())?)?;
    println!("adequacy {:.2}, fluency {:.2}", summary.avg_adequacy, summary.avg_fluency);
    Ok(())
}
