use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::Sentence;

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;

const RESERVED: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];

/// Dense symbol/index bijection with four reserved entries at 0..4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    symbols: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::reserved_only()
    }
}

impl Vocab {
    pub fn reserved_only() -> Self {
        let symbols: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let index = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        Vocab { symbols, counts: vec![0; RESERVED.len()], index }
    }

    /// Appends symbols in the given order, skipping duplicates and reserved names.
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut v = Self::reserved_only();
        for (sym, count) in symbols {
            v.push(sym.into(), count);
        }
        v
    }

    fn push(&mut self, sym: String, count: u64) -> u32 {
        if let Some(&i) = self.index.get(&sym) {
            return i;
        }
        let i = self.symbols.len() as u32;
        self.index.insert(sym.clone(), i);
        self.symbols.push(sym);
        self.counts.push(count);
        i
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    /// Index of `symbol`, or `UNK` when absent.
    pub fn index(&self, symbol: &str) -> u32 {
        self.get(symbol).unwrap_or(UNK)
    }

    pub fn symbol(&self, index: u32) -> &str {
        &self.symbols[index as usize]
    }

    pub fn count(&self, index: u32) -> u64 {
        self.counts[index as usize]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn encode<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Vec<u32> {
        words.into_iter().map(|w| self.index(w)).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter().map(|&i| self.symbol(i).to_string()).collect()
    }

    pub fn is_reserved(index: u32) -> bool {
        (index as usize) < RESERVED.len()
    }

    /// `index<TAB>symbol<TAB>count` per line, reserved symbols first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (s, c)) in self.symbols.iter().zip(&self.counts).enumerate() {
            let _ = writeln!(out, "{i}\t{s}\t{c}");
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let mut v = Self::reserved_only();
        for (lineno, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            let [idx, sym, count] = fields[..] else {
                return Err(Error::parse(path, lineno + 1, "expected index<TAB>symbol<TAB>count"));
            };
            let idx: usize = idx.parse().map_err(|_| Error::parse(path, lineno + 1, "bad index"))?;
            let count: u64 = count.parse().map_err(|_| Error::parse(path, lineno + 1, "bad count"))?;
            if idx != lineno {
                return Err(Error::parse(path, lineno + 1, format!("index {idx} out of sequence")));
            }
            if idx < RESERVED.len() {
                if sym != RESERVED[idx] {
                    return Err(Error::parse(path, lineno + 1, "reserved symbol mismatch"));
                }
                v.counts[idx] = count;
            } else if v.push(sym.to_string(), count) as usize != idx {
                return Err(Error::parse(path, lineno + 1, format!("duplicate symbol `{sym}`")));
            }
        }
        Ok(v)
    }
}

/// Counts token surfaces and indexes those seen at least `min_count` times,
/// most frequent first, ties broken lexicographically.
pub fn build_vocab<'a>(sentences: impl IntoIterator<Item = &'a Sentence>, min_count: usize) -> Result<Vocab> {
    vocab_from_symbols(sentences.into_iter().flat_map(Sentence::surfaces), min_count)
}

/// Vocabulary over arbitrary symbols (words, characters), most frequent
/// first and ties broken lexicographically.
pub fn vocab_from_symbols<'a>(symbols: impl IntoIterator<Item = &'a str>, min_count: usize) -> Result<Vocab> {
    if min_count == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for w in symbols {
        *counts.entry(w).or_insert(0) += 1;
    }
    let mut kept: Vec<(&str, u64)> =
        counts.into_iter().filter(|&(w, c)| c >= min_count as u64 && !RESERVED.contains(&w)).collect();
    if kept.is_empty() {
        return Err(Error::NoTokenQualifies { min_count });
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(Vocab::from_symbols(kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sents(texts: &[&str]) -> Vec<Sentence> {
        texts.iter().enumerate().map(|(i, t)| Sentence::from_tokens(i, t).unwrap()).collect()
    }

    #[test]
    fn frequency_order() {
        let v = build_vocab(&sents(&["a a b"]), 1).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v.index("a"), 4);
        assert_eq!(v.index("b"), 5);
    }

    #[test]
    fn threshold_maps_rare_to_unk() {
        let v = build_vocab(&sents(&["a a b"]), 2).unwrap();
        assert_eq!(v.index("b"), UNK);
        assert_eq!(v.len(), 5);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(build_vocab(&[], 1), Err(Error::NoTokenQualifies { .. })));
    }

    #[test]
    fn ties_are_lexicographic() {
        let v = build_vocab(&sents(&["c b a"]), 1).unwrap();
        assert_eq!(v.symbols()[4..], ["a", "b", "c"]);
    }

    #[test]
    fn text_format_round_trips() {
        let v = build_vocab(&sents(&["x y y z z z"]), 1).unwrap();
        let text = v.to_text();
        assert!(text.starts_with("0\t<pad>\t0\n1\t<s>\t0\n2\t</s>\t0\n3\t<unk>\t0\n4\tz\t3\n"));
        assert_eq!(Vocab::from_text(&text, "v").unwrap(), v);
    }

    proptest! {
        #[test]
        fn index_symbol_round_trip(words in prop::collection::vec("[a-e]{1,3}", 1..30)) {
            let s = Sentence::from_tokens(0, &words.join(" ")).unwrap();
            let v = build_vocab([&s], 1).unwrap();
            for i in 0..v.len() as u32 {
                prop_assert_eq!(v.index(v.symbol(i)), i);
            }
        }
    }
}
