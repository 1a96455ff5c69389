//! Deterministic toy data: an English-like source language paired with a
//! Bengali-script, verb-final target, plus gold chunk tags and labels.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::ParallelCorpus;
use crate::error::Result;
use crate::simplex::{ChunkSequence, ChunkTag, Label, LabeledDataset};
use crate::util::rng;

const SUBJECTS: [(&str, &str); 10] = [
    ("cat", "বিড়াল"),
    ("dog", "কুকুর"),
    ("boy", "ছেলে"),
    ("girl", "মেয়ে"),
    ("man", "লোক"),
    ("woman", "মহিলা"),
    ("teacher", "শিক্ষক"),
    ("farmer", "কৃষক"),
    ("bird", "পাখি"),
    ("king", "রাজা"),
];

const OBJECTS: [(&str, &str); 10] = [
    ("book", "বই"),
    ("ball", "বল"),
    ("rice", "ভাত"),
    ("fish", "মাছ"),
    ("house", "বাড়ি"),
    ("tree", "গাছ"),
    ("letter", "চিঠি"),
    ("song", "গান"),
    ("water", "জল"),
    ("apple", "আপেল"),
];

const TRANSITIVE: [(&str, &str); 8] = [
    ("saw", "দেখল"),
    ("ate", "খেল"),
    ("took", "নিল"),
    ("read", "পড়ল"),
    ("wrote", "লিখল"),
    ("found", "পেল"),
    ("liked", "ভালোবাসল"),
    ("bought", "কিনল"),
];

const INTRANSITIVE: [(&str, &str); 5] =
    [("ran", "দৌড়াল"), ("slept", "ঘুমাল"), ("sang", "গাইল"), ("laughed", "হাসল"), ("came", "এল")];

const ADJECTIVES: [(&str, &str); 5] = [("big", "বড়"), ("small", "ছোট"), ("red", "লাল"), ("old", "পুরনো"), ("happy", "খুশি")];

const ADVERBS: [(&str, &str); 4] = [("quickly", "দ্রুত"), ("slowly", "ধীরে"), ("quietly", "চুপচাপ"), ("today", "আজ")];

/// Place nouns with their locative target form.
const PLACES: [(&str, &str, &str); 5] = [
    ("garden", "বাগানে", "বাগানের"),
    ("market", "বাজারে", "বাজারের"),
    ("school", "স্কুলে", "স্কুলের"),
    ("village", "গ্রামে", "গ্রামের"),
    ("river", "নদীতে", "নদীর"),
];

const PRONOUNS: [(&str, &str); 3] = [("he", "সে"), ("she", "সে"), ("they", "তারা")];

const LINKERS: [(&str, &str); 5] =
    [("because", "কারণ"), ("when", "যখন"), ("but", "কিন্তু"), ("and", "এবং"), ("although", "যদিও")];

/// Source words, target words and chunk tags of one clause.
struct Clause {
    src: Vec<String>,
    tgt: Vec<String>,
    tags: Vec<ChunkTag>,
}

fn pick<'a, T>(r: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    xs.choose(r).expect("non-empty list")
}

fn clause(r: &mut ChaCha8Rng) -> Clause {
    let mut src: Vec<String> = Vec::new();
    let mut subj_t: Vec<String> = Vec::new();
    let mut tags = vec![ChunkTag::NP, ChunkTag::VP];
    if r.gen_bool(0.2) {
        let (s, t) = pick(r, &PRONOUNS);
        src.push(s.to_string());
        subj_t.push(t.to_string());
    } else {
        src.push("the".into());
        if r.gen_bool(0.3) {
            let (s, t) = pick(r, &ADJECTIVES);
            src.push(s.to_string());
            subj_t.push(t.to_string());
        }
        let (s, t) = pick(r, &SUBJECTS);
        src.push(s.to_string());
        subj_t.push(t.to_string());
    }
    let transitive = r.gen_bool(0.6);
    let (verb_s, verb_t) = if transitive { *pick(r, &TRANSITIVE) } else { *pick(r, &INTRANSITIVE) };
    src.push(verb_s.into());
    let mut obj_t = Vec::new();
    if transitive {
        tags.push(ChunkTag::NP);
        src.push("the".into());
        if r.gen_bool(0.3) {
            let (s, t) = pick(r, &ADJECTIVES);
            src.push(s.to_string());
            obj_t.push(t.to_string());
        }
        let (s, t) = pick(r, &OBJECTS);
        src.push(s.to_string());
        obj_t.push(t.to_string());
    }
    let mut place_t = Vec::new();
    let mut adv_t = Vec::new();
    match r.gen_range(0..3) {
        0 => {
            tags.push(ChunkTag::PP);
            let (place, loc, gen) = *pick(r, &PLACES);
            if r.gen_bool(0.7) {
                src.extend(["in", "the", place].map(String::from));
                place_t.push(loc.to_string());
            } else {
                src.extend(["near", "the", place].map(String::from));
                place_t.extend([gen.to_string(), "কাছে".into()]);
            }
            tags.push(ChunkTag::NP);
        }
        1 => {
            tags.push(ChunkTag::ADVP);
            let (s, t) = pick(r, &ADVERBS);
            src.push(s.to_string());
            adv_t.push(t.to_string());
        }
        _ => {}
    }
    let tgt = subj_t.into_iter().chain(place_t).chain(adv_t).chain(obj_t).chain([verb_t.to_string()]).collect();
    Clause { src, tgt, tags }
}

/// One generated sentence pair with its gold analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticPair {
    pub source: String,
    pub target: String,
    pub tags: Vec<ChunkTag>,
    pub label: Label,
}

fn capitalize(words: &[String]) -> String {
    let text = words.join(" ");
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => text,
    }
}

/// `n` sentence pairs; about 40% are single-clause (Simple) and the rest
/// join two clauses with a linker word.
pub fn synthetic_pairs(n: usize, seed: u64) -> Vec<SyntheticPair> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let first = clause(&mut r);
            let (mut src, mut tgt, mut tags, label) = (first.src, first.tgt, first.tags, Label::Simple);
            let label = if r.gen_bool(0.6) {
                let (ls, lt) = *pick(&mut r, &LINKERS);
                let second = clause(&mut r);
                src.push(ls.into());
                src.extend(second.src);
                tgt.push(lt.into());
                tgt.extend(second.tgt);
                tags.push(ChunkTag::OTHER);
                tags.extend(second.tags);
                Label::Other
            } else {
                label
            };
            SyntheticPair {
                source: format!("{} .", capitalize(&src)).replace(" .", "."),
                target: format!("{} ।", tgt.join(" ")),
                tags,
                label,
            }
        })
        .collect()
}

/// Size of the bundled corpus under `data/`.
pub const BUNDLED_PAIRS: usize = 500;
pub const BUNDLED_SEED: u64 = 2018;

/// Contents of the bundled files: source lines, target lines, chunk file
/// (`id<TAB>tags`, 1-based) and labeled chunk patterns.
pub fn bundled_files() -> [(String, String); 4] {
    let pairs = synthetic_pairs(BUNDLED_PAIRS, BUNDLED_SEED);
    let mut en = String::new();
    let mut bn = String::new();
    let mut chunks = String::new();
    let mut labels = String::new();
    for (i, p) in pairs.iter().enumerate() {
        let tags: Vec<&str> = p.tags.iter().map(|t| t.as_str()).collect();
        en.push_str(&p.source);
        en.push('\n');
        bn.push_str(&p.target);
        bn.push('\n');
        chunks.push_str(&format!("{}\t{}\n", i + 1, tags.join(" ")));
        labels.push_str(&format!("{}\t{}\n", p.label, tags.join(" ")));
    }
    [
        ("synthetic.en".into(), en),
        ("synthetic.bn".into(), bn),
        ("synthetic.chunks".into(), chunks),
        ("synthetic.labels".into(), labels),
    ]
}

/// Whitespace-tokenized corpus of `n` generated pairs (punctuation split).
pub fn synthetic_corpus(n: usize, seed: u64) -> Result<ParallelCorpus> {
    let pairs = synthetic_pairs(n, seed);
    let src: Vec<String> = pairs.iter().map(|p| p.source.replace('.', " .")).collect();
    let tgt: Vec<String> = pairs.iter().map(|p| p.target.clone()).collect();
    ParallelCorpus::from_lines(&src, &tgt, "en", "bn")
}

/// Chunk sequences whose label is Simple exactly when no OTHER tag occurs,
/// which a linear function of the position-wise one-hot features decides.
pub fn separable_chunk_dataset(n: usize, max_len: usize, seed: u64) -> LabeledDataset {
    let mut r = rng(seed);
    let plain = [ChunkTag::NP, ChunkTag::VP, ChunkTag::PP, ChunkTag::ADJP, ChunkTag::ADVP, ChunkTag::PRP];
    let items = (0..n)
        .map(|i| {
            let len = r.gen_range(2..=max_len.max(2));
            let mut tags: Vec<ChunkTag> = (0..len).map(|_| *pick(&mut r, &plain)).collect();
            let label = if i % 2 == 0 {
                Label::Simple
            } else {
                let k = r.gen_range(1..len);
                tags[k] = ChunkTag::OTHER;
                Label::Other
            };
            (ChunkSequence::new(i + 1, tags).expect("non-empty"), label)
        })
        .collect();
    LabeledDataset { items }
}

/// Random lowercase strings for a copy task: source and target identical.
pub fn copy_strings(n: usize, alphabet: usize, min_len: usize, max_len: usize, seed: u64) -> Vec<String> {
    let mut r = rng(seed);
    let letters: Vec<char> = ('a'..='z').take(alphabet.clamp(1, 26)).collect();
    let mut out: Vec<String> = Vec::with_capacity(n);
    while out.len() < n {
        let len = r.gen_range(min_len..=max_len);
        let s: String = (0..len).map(|_| *pick(&mut r, &letters)).collect();
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}
