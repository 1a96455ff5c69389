use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

use super::{Sentence, Token};

/// Casing statistics per lowercased form, gathered from non-initial tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TruecaseModel {
    case_counts: HashMap<String, BTreeMap<String, u64>>,
}

impl TruecaseModel {
    /// Most frequent observed casing; ties go to the lexicographically
    /// smallest casing, unseen forms fall back to lowercase.
    pub fn best_casing(&self, lowered: &str) -> String {
        match self.case_counts.get(lowered) {
            Some(counts) => {
                // BTreeMap iterates in ascending order, so `>` keeps the smallest on ties.
                let mut best: Option<(&String, u64)> = None;
                for (casing, &n) in counts {
                    if best.is_none_or(|(_, b)| n > b) {
                        best = Some((casing, n));
                    }
                }
                best.map(|(c, _)| c.clone()).unwrap_or_else(|| lowered.to_string())
            }
            None => lowered.to_string(),
        }
    }

    pub fn count(&self, lowered: &str, casing: &str) -> u64 {
        self.case_counts.get(lowered).and_then(|m| m.get(casing)).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.case_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.case_counts.is_empty()
    }
}

/// Collects casing counts from every token except the sentence-initial one,
/// whose capitalization is positional.
pub fn train_truecaser<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> Result<TruecaseModel> {
    let mut model = TruecaseModel::default();
    let mut n = 0usize;
    for sent in sentences {
        n += 1;
        for tok in sent.tokens.iter().skip(1) {
            *model
                .case_counts
                .entry(tok.lowered().to_string())
                .or_default()
                .entry(tok.surface().to_string())
                .or_insert(0) += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(model)
}

/// Rewrites the first token to its preferred casing; the rest is untouched.
pub fn truecase(model: &TruecaseModel, sent: &Sentence) -> Sentence {
    let mut out = sent.clone();
    if let Some(first) = out.tokens.first_mut() {
        *first = Token::new(model.best_casing(first.lowered()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(id: usize, text: &str) -> Sentence {
        Sentence::from_tokens(id, text).unwrap()
    }

    #[test]
    fn single_non_initial_observation_wins() {
        let m = train_truecaser(&[sent(0, "The dog . The Dog .")]).unwrap();
        assert_eq!(m.best_casing("dog"), "Dog");
    }

    #[test]
    fn majority_vote() {
        let corpus = vec![
            sent(0, "we saw NASA"),
            sent(1, "and NASA said"),
            sent(2, "then NASA left"),
            sent(3, "ask Nasa"),
        ];
        let m = train_truecaser(&corpus).unwrap();
        assert_eq!(m.best_casing("nasa"), "NASA");
    }

    #[test]
    fn tie_goes_to_smallest_casing() {
        let m = train_truecaser(&[sent(0, "x Apple apple")]).unwrap();
        assert_eq!(m.best_casing("apple"), "Apple");
    }

    #[test]
    fn unseen_falls_back_to_lowercase() {
        let m = train_truecaser(&[sent(0, "Only initial")]).unwrap();
        assert_eq!(m.best_casing("only"), "only");
        assert_eq!(m.count("only", "Only"), 0);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(train_truecaser(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn truecase_decapitalizes_function_word() {
        let m = train_truecaser(&[sent(0, "I saw the dog")]).unwrap();
        assert_eq!(truecase(&m, &sent(1, "The dog")).text(), "the dog");
    }

    #[test]
    fn truecase_keeps_names() {
        let m = train_truecaser(&[sent(0, "I met John")]).unwrap();
        assert_eq!(truecase(&m, &sent(1, "John slept")).text(), "John slept");
    }

    #[test]
    fn truecase_leaves_non_initial_tokens() {
        let m = train_truecaser(&[sent(0, "x ibm")]).unwrap();
        assert_eq!(truecase(&m, &sent(1, "IBM wins")).text(), "ibm wins");
        assert_eq!(truecase(&m, &sent(2, "now IBM wins")).text(), "now IBM wins");
    }

    #[test]
    fn caseless_script_is_unchanged() {
        let m = train_truecaser(&[sent(0, "वह घर गया")]).unwrap();
        let s = sent(1, "घर गया");
        assert_eq!(truecase(&m, &s), s);
    }
}
