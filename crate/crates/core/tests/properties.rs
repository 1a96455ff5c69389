mod common;

use std::collections::BTreeSet;

use minimt::corpus::{clean_pairs, split, train_truecaser, truecase, ParallelCorpus, Sentence, Token, Vocab, BOS, EOS};
use minimt::lm::train_lm;
use minimt::metrics::{bleu, levenshtein, ter};
use minimt::nmt::{Example, ModelDims, ModelKind, Seq2SeqModel};
use minimt::simplex::{
    encode_features, extract_simple, mine_rules, ChunkSequence, ChunkTag, FfnnModel, Label, Pattern, Rule, RuleSet,
};
use minimt::smt::{decode, phrase_boxes, train_ibm1_logged, Alignment, DecoderConfig, PhraseOption, PhraseTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sentence(id: usize, words: &[String]) -> Sentence {
    Sentence::new(id, words.iter().map(|w| Token::new(w.clone())).collect()).unwrap()
}

fn corpus_from(pairs: &[(Vec<String>, Vec<String>)]) -> ParallelCorpus {
    let pairs = pairs.iter().enumerate().map(|(i, (s, t))| (sentence(i + 1, s), sentence(i + 1, t))).collect();
    ParallelCorpus::new(pairs, "xx", "yy").unwrap()
}

fn word_seq(alphabet: &'static [&'static str], max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(alphabet), 1..=max).prop_map(|v| v.into_iter().map(String::from).collect())
}

const CASED: &[&str] = &["The", "the", "Cat", "cat", "Paris", "a", "A", "runs", "Runs", "IBM"];
const SRC: &[&str] = &["a", "b", "c", "d", "e"];
const TGT: &[&str] = &["v", "w", "x", "y", "z"];

fn tag() -> impl Strategy<Value = ChunkTag> {
    prop::sample::select(vec![ChunkTag::NP, ChunkTag::VP, ChunkTag::PP, ChunkTag::ADJP, ChunkTag::ADVP, ChunkTag::PRP, ChunkTag::OTHER])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truecasing_touches_at_most_the_first_token(sents in prop::collection::vec(word_seq(CASED, 8), 1..20)) {
        let sents: Vec<Sentence> = sents.iter().enumerate().map(|(i, s)| sentence(i, s)).collect();
        let model = train_truecaser(&sents).unwrap();
        for s in &sents {
            let out = truecase(&model, s);
            prop_assert_eq!(out.len(), s.len());
            for (a, b) in out.surfaces().zip(s.surfaces()).skip(1) {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn cleaning_keeps_order_and_never_grows(
        lens in prop::collection::vec((1usize..12, 1usize..12), 1..30),
        max_len in 1usize..12,
    ) {
        let pairs: Vec<(Vec<String>, Vec<String>)> =
            lens.iter().map(|&(a, b)| (vec!["s".to_string(); a], vec!["t".to_string(); b])).collect();
        let corpus = corpus_from(&pairs);
        match clean_pairs(&corpus, max_len) {
            Ok(out) => {
                prop_assert!(out.len() <= corpus.len());
                let ids: Vec<usize> = out.sources().map(|s| s.id).collect();
                prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
                let expected: Vec<usize> =
                    lens.iter().enumerate().filter(|(_, &(a, b))| a <= max_len && b <= max_len).map(|(i, _)| i + 1).collect();
                prop_assert_eq!(ids, expected);
            }
            Err(_) => prop_assert!(lens.iter().all(|&(a, b)| a > max_len || b > max_len)),
        }
    }

    #[test]
    fn split_is_a_partition(n in 10usize..80, seed in any::<u64>()) {
        let pairs: Vec<(Vec<String>, Vec<String>)> = (0..n).map(|i| (vec![format!("s{i}")], vec![format!("t{i}")])).collect();
        let corpus = corpus_from(&pairs);
        let parts = split(&corpus, (0.8, 0.1, 0.1), seed).unwrap();
        let mut ids: Vec<usize> = [&parts.train, &parts.dev, &parts.test].iter().flat_map(|c| c.sources().map(|s| s.id)).collect();
        ids.sort();
        prop_assert_eq!(ids, (1..=n).collect::<Vec<_>>());
    }

    #[test]
    fn rule_confidences_are_percentages(seqs in prop::collection::vec(prop::collection::vec(tag(), 1..8), 1..40)) {
        let chunks: Vec<ChunkSequence> = seqs.into_iter().enumerate().map(|(i, t)| ChunkSequence::new(i, t).unwrap()).collect();
        let rules = mine_rules(&chunks).unwrap();
        let total: f64 = rules.rules.iter().map(|r| r.confidence).sum();
        prop_assert!(rules.rules.iter().all(|r| r.confidence > 0.0 && r.confidence <= 100.0));
        prop_assert!(total <= 100.0 + 1e-9);
    }

    #[test]
    fn extraction_partitions_the_corpus(
        seqs in prop::collection::vec(prop::collection::vec(tag(), 1..5), 1..30),
        pattern in prop::collection::vec(tag(), 1..3),
    ) {
        let pairs: Vec<(Vec<String>, Vec<String>)> = (0..seqs.len()).map(|i| (vec![format!("s{i}")], vec![format!("t{i}")])).collect();
        let corpus = corpus_from(&pairs);
        let text: Vec<&str> = pattern.iter().map(|t| t.as_str()).collect();
        let rules = RuleSet { rules: vec![Rule { pattern: Pattern::parse(&text.join("* ")).unwrap(), confidence: 100.0 }], source_count: 0 };
        let out = extract_simple(&corpus, |s| ChunkSequence::new(s.id, seqs[s.id - 1].clone()), &rules).unwrap();
        prop_assert_eq!(out.simple.len() + out.other_ids.len(), corpus.len());
        let mut all: Vec<usize> = out.simple.sources().map(|s| s.id).chain(out.other_ids.iter().copied()).collect();
        all.sort();
        prop_assert_eq!(all, (1..=corpus.len()).collect::<Vec<_>>());
    }

    #[test]
    fn lm_distributions_normalize(sents in prop::collection::vec(word_seq(SRC, 6), 1..25), order in 1usize..=3, seed in any::<u64>()) {
        let lm = train_lm(&sents, order).unwrap();
        let words: Vec<u32> = lm.predictable().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut contexts: Vec<u32> = words.clone();
        contexts.push(BOS);
        for _ in 0..10 {
            let ctx: Vec<u32> = (0..order - 1).map(|_| contexts[rng.gen_range(0..contexts.len())]).collect();
            let sum: f64 = words.iter().map(|&w| 10f64.powf(lm.logprob_ids(&ctx, w))).sum();
            prop_assert!((sum - 1.0).abs() < 1e-6, "context {:?} sums to {}", ctx, sum);
        }
    }

    #[test]
    fn seen_ngrams_stay_seen(sents in prop::collection::vec(word_seq(SRC, 6), 1..15), extra in word_seq(TGT, 6)) {
        let small = train_lm(&sents, 3).unwrap();
        let mut more = sents.clone();
        more.push(extra);
        let big = train_lm(&more, 3).unwrap();
        for s in &sents {
            let padded: Vec<&str> = std::iter::once("<s>").chain(s.iter().map(String::as_str)).chain(["</s>"]).collect();
            for n in 1..=3 {
                for gram in padded.windows(n) {
                    prop_assert!(small.ngram_logprob(gram).is_some(), "{:?} missing", gram);
                    prop_assert!(big.ngram_logprob(gram).is_some(), "{:?} lost", gram);
                }
            }
        }
    }

    #[test]
    fn ibm1_likelihood_never_falls(pairs in prop::collection::vec((word_seq(SRC, 5), word_seq(TGT, 5)), 1..12)) {
        let fit = train_ibm1_logged(&corpus_from(&pairs), 8).unwrap();
        for w in fit.log_likelihoods.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn phrase_boxes_equal_brute_force(
        sl in 1usize..=6,
        tl in 1usize..=6,
        bits in prop::collection::vec(any::<bool>(), 36),
        max_len in 1usize..=7,
    ) {
        let links: BTreeSet<(usize, usize)> =
            (0..sl).flat_map(|s| (0..tl).map(move |t| (s, t))).filter(|&(s, t)| bits[s * 6 + t]).collect();
        let got: BTreeSet<_> = phrase_boxes(&Alignment::new(links.iter().copied()), sl, tl, max_len).iter().map(|b| (b.src, b.tgt)).collect();
        prop_assert_eq!(got, common::consistent_boxes(&links, sl, tl, max_len));
    }

    #[test]
    fn bleu_is_bounded_and_order_invariant(
        data in prop::collection::vec((word_seq(SRC, 8), word_seq(SRC, 8)), 1..10),
        rot in 0usize..10,
    ) {
        let refs: Vec<Vec<String>> = data.iter().map(|p| p.0.clone()).collect();
        let hyps: Vec<Vec<String>> = data.iter().map(|p| p.1.clone()).collect();
        let a = bleu(&refs, &hyps, 4).unwrap();
        prop_assert!((0.0..=100.0).contains(&a.score));
        let k = rot % data.len();
        let (mut r2, mut h2) = (refs.clone(), hyps.clone());
        r2.rotate_left(k);
        h2.rotate_left(k);
        let b = bleu(&r2, &h2, 4).unwrap();
        prop_assert!((a.score - b.score).abs() < 1e-9);
        prop_assert!((bleu(&refs, &refs, 4).unwrap().score - 100.0).abs() < 1e-9);
    }

    #[test]
    fn ter_shifts_never_hurt(reference in word_seq(SRC, 12), hyp in prop::collection::vec(prop::sample::select(SRC), 0..12)) {
        let hyp: Vec<String> = hyp.into_iter().map(String::from).collect();
        let r = ter(&reference, &hyp).unwrap();
        prop_assert!(r.edits() <= levenshtein(&hyp, &reference));
        prop_assert_eq!(levenshtein(&hyp, &reference), common::edit_distance(&hyp, &reference));
        prop_assert_eq!(ter(&reference, &reference).unwrap().score, 0.0);
    }
}

fn random_table(rng: &mut ChaCha8Rng) -> PhraseTable {
    let mut table = PhraseTable::new();
    let scores = |rng: &mut ChaCha8Rng| [0; 4].map(|_| rng.gen_range(0.05..1.0));
    for s in SRC {
        for _ in 0..rng.gen_range(1..=2) {
            let t = (0..rng.gen_range(1..=2)).map(|_| TGT[rng.gen_range(0..TGT.len())].to_string()).collect();
            table.insert(vec![s.to_string()], PhraseOption { tgt: t, scores: scores(rng) });
        }
    }
    for _ in 0..6 {
        let s = (0..2).map(|_| SRC[rng.gen_range(0..SRC.len())].to_string()).collect();
        let t = (0..rng.gen_range(1..=2)).map(|_| TGT[rng.gen_range(0..TGT.len())].to_string()).collect();
        table.insert(s, PhraseOption { tgt: t, scores: scores(rng) });
    }
    table
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decoder_is_exact_with_unbounded_beam_and_bounded_otherwise(seed in any::<u64>(), n in 1usize..=5, beam in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = random_table(&mut rng);
        let lm_data: Vec<Vec<String>> =
            (0..20).map(|_| (0..rng.gen_range(1..5)).map(|_| TGT[rng.gen_range(0..TGT.len())].to_string()).collect()).collect();
        let lm = train_lm(&lm_data, 2).unwrap();
        let sent: Vec<String> = (0..n).map(|_| ["a", "b", "c", "d", "e", "q"][rng.gen_range(0..6)].to_string()).collect();
        let full = DecoderConfig { beam_size: usize::MAX, distortion_limit: Some(2), max_phrase_len: 2, ..DecoderConfig::default() };
        let best = common::exhaustive_decode(&sent, &table, &lm, &full).unwrap();
        let exact = decode(&sent, &table, &lm, &full).unwrap();
        prop_assert!((exact.score - best).abs() < 1e-9, "{} vs {}", exact.score, best);

        let narrow = decode(&sent, &table, &lm, &DecoderConfig { beam_size: beam, ..full }).unwrap();
        prop_assert!(narrow.score <= best + 1e-9);
        let parts: f64 = narrow.steps.iter().map(|s| s.tm + s.lm + s.distortion + s.word_penalty).sum::<f64>() + narrow.end_lm;
        prop_assert!((parts - narrow.score).abs() < 1e-9);
    }
}

#[test]
fn ffnn_gradient_matches_central_differences() {
    let max_len = 6;
    let mut model = FfnnModel::new(max_len, 4, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tags = [ChunkTag::NP, ChunkTag::VP, ChunkTag::PP, ChunkTag::ADVP, ChunkTag::OTHER];
    let batch: Vec<(Vec<f64>, Label)> = (0..5)
        .map(|i| {
            let seq: Vec<ChunkTag> = (0..rng.gen_range(1..=max_len)).map(|_| tags[rng.gen_range(0..tags.len())]).collect();
            let label = if i % 2 == 0 { Label::Simple } else { Label::Other };
            (encode_features(&ChunkSequence::new(i, seq).unwrap(), max_len), label)
        })
        .collect();
    let (_, grads) = model.loss_and_grads(&batch);
    let analytic: Vec<Vec<f64>> = grads.params().iter().map(|p| p.to_vec()).collect();
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (k, g) in analytic.iter().enumerate() {
        for _ in 0..40 {
            let i = rng.gen_range(0..g.len());
            let orig = model.params_mut()[k][i];
            model.params_mut()[k][i] = orig + eps;
            let plus = model.loss_and_grads(&batch).0;
            model.params_mut()[k][i] = orig - eps;
            let minus = model.loss_and_grads(&batch).0;
            model.params_mut()[k][i] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let denom = g[i].abs().max(numeric.abs());
            if denom < 1e-7 {
                assert!((g[i] - numeric).abs() < 1e-9);
                continue;
            }
            worst = worst.max((g[i] - numeric).abs() / denom);
            checked += 1;
        }
    }
    assert!(checked > 100, "only {checked} informative coordinates");
    assert!(worst < 1e-4, "max relative error {worst:.3e}");
}

fn small_model(kind: ModelKind, attention: bool, seed: u64) -> Seq2SeqModel {
    let vocab = Vocab::from_symbols((0..12).map(|i| (format!("w{i}"), 1u64)));
    let dims = ModelDims { kind, embed: 5, hidden: 6, attention };
    Seq2SeqModel::init(dims, vocab.clone(), vocab, 0.4, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn loss_is_cross_entropy_of_step_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (kind, attention) in [(ModelKind::Word, true), (ModelKind::Word, false), (ModelKind::Char, false)] {
        let model = small_model(kind, attention, 3);
        for _ in 0..5 {
            let ex = Example {
                src: (0..rng.gen_range(1..6)).map(|_| rng.gen_range(4..16)).collect(),
                tgt: (0..rng.gen_range(1..6)).map(|_| rng.gen_range(4..16)).collect(),
            };
            let enc = model.encode(&ex.src).unwrap();
            let mut state = enc.last.clone();
            let mut prev = BOS;
            let mut ce = 0.0;
            for &gold in ex.tgt.iter().chain([EOS].iter()) {
                let step = model.decode_step(prev, &state, &enc);
                assert!((step.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                if let Some(a) = &step.alpha {
                    assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
                ce -= step.probs[gold as usize].ln();
                prev = gold;
                state = step.state;
            }
            let loss = model.forward_backward(&ex, true, None).unwrap().loss;
            assert!((loss - ce).abs() < 1e-12 * ce.max(1.0), "{kind:?}/{attention}: {loss} vs {ce}");
        }
    }
}
