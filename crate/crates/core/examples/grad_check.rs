//! Finite-difference check of the hand-written backward pass, then the same
//! check against a deliberately corrupted gradient.

use minimt::corpus::Vocab;
use minimt::nmt::{grad_check, grad_check_with, Example, ModelDims, ModelKind, Seq2SeqModel, DEFAULT_EPS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> minimt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vocab = Vocab::from_symbols((0..26).map(|i| (format!("w{i}"), 1u64)));
    let dims = ModelDims { kind: ModelKind::Word, embed: 8, hidden: 16, attention: true };
    let model = Seq2SeqModel::init(dims, vocab.clone(), vocab, 0.2, &mut rng);
    let batch: Vec<Example> = (0..4)
        .map(|_| Example {
            src: (0..rng.gen_range(2..6)).map(|_| rng.gen_range(4..30)).collect(),
            tgt: (0..rng.gen_range(2..6)).map(|_| rng.gen_range(4..30)).collect(),
        })
        .collect();

    let report = grad_check(&model, &batch, DEFAULT_EPS, 240, 1)?;
    println!("{} coordinates, max relative error {:.2e}", report.samples, report.max_rel_error);
    for t in &report.tensors {
        println!("  {:<8} {:>3} samples  max rel err {:.2e}", t.name, t.samples, t.max_rel_error);
    }

    let broken = grad_check_with(&model, &batch, DEFAULT_EPS, 240, 1, |g| g.scale(1.01))?;
    println!("gradient scaled by 1.01: max relative error {:.2e}", broken.max_rel_error);
    Ok(())
}
