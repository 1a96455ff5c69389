//! Simple-sentence extraction. Sentences are reduced to shallow chunk-tag
//! sequences and classified either by matching mined surface-form rules or
//! by a small feed-forward network.

mod chunk;
mod ffnn;
mod rules;

use std::fmt;
use std::str::FromStr;

use crate::corpus::{ParallelCorpus, Sentence};
use crate::error::{Error, Result};

pub use chunk::{fallback_chunk, format_chunk_file, parse_chunk_file, ChunkSequence, ChunkTag};
pub use ffnn::{
    classify_features, classify_ffnn, cross_validate, encode_features, target, train_ffnn, FfnnConfig, FfnnFit,
    FfnnGrads, FfnnModel, DEFAULT_MAX_LEN, HIDDEN,
};
pub use rules::{classify_rule, mine_rules, surface_form, Pattern, PatternItem, Rule, RuleSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Simple = 0,
    Other = 1,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Simple => "Simple",
            Label::Other => "Other",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(Label::Simple),
            "other" => Ok(Label::Other),
            _ => Err(format!("unknown label `{s}` (expected Simple or Other)")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledDataset {
    pub items: Vec<(ChunkSequence, Label)>,
}

impl LabeledDataset {
    pub fn count(&self, label: Label) -> usize {
        self.items.iter().filter(|(_, l)| *l == label).count()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Parses `label<TAB>TAG TAG ...` lines; line numbers become sentence ids.
    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (label, tags) =
                line.split_once('\t').ok_or_else(|| Error::parse(path, i + 1, "expected label<TAB>tags"))?;
            let label: Label = label.trim().parse().map_err(|m| Error::parse(path, i + 1, m))?;
            let tags = chunk::parse_tags(tags).map_err(|m| Error::parse(path, i + 1, m))?;
            let seq = ChunkSequence::new(i + 1, tags).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            items.push((seq, label));
        }
        if items.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(LabeledDataset { items })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (seq, label) in &self.items {
            let tags: Vec<&str> = seq.tags.iter().map(|t| t.as_str()).collect();
            out.push_str(&format!("{label}\t{}\n", tags.join(" ")));
        }
        out
    }
}

/// Anything that can decide whether a chunked sentence is simple.
pub trait SimpleClassifier {
    fn classify(&self, chunks: &ChunkSequence) -> Result<Label>;
}

impl SimpleClassifier for RuleSet {
    fn classify(&self, chunks: &ChunkSequence) -> Result<Label> {
        Ok(if classify_rule(self, chunks) { Label::Simple } else { Label::Other })
    }
}

impl SimpleClassifier for FfnnModel {
    fn classify(&self, chunks: &ChunkSequence) -> Result<Label> {
        classify_ffnn(self, chunks).map(|(l, _)| l)
    }
}

impl<F: Fn(&ChunkSequence) -> Label> SimpleClassifier for F {
    fn classify(&self, chunks: &ChunkSequence) -> Result<Label> {
        Ok(self(chunks))
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub simple: ParallelCorpus,
    /// Ids of source sentences classified as Other.
    pub other_ids: Vec<usize>,
}

impl Extraction {
    pub fn total(&self) -> usize {
        self.simple.len() + self.other_ids.len()
    }
}

/// Keeps the pairs whose source side classifies as Simple; target sides
/// travel with their sources.
pub fn extract_simple(
    corpus: &ParallelCorpus,
    chunker: impl Fn(&Sentence) -> Result<ChunkSequence>,
    classifier: &dyn SimpleClassifier,
) -> Result<Extraction> {
    let mut keep = Vec::with_capacity(corpus.len());
    let mut other_ids = Vec::new();
    for (src, _) in corpus.pairs() {
        let label = classifier.classify(&chunker(src)?)?;
        keep.push(label == Label::Simple);
        if label == Label::Other {
            other_ids.push(src.id);
        }
    }
    let mut flags = keep.into_iter();
    let simple = corpus.filter(|_, _| flags.next().unwrap_or(false));
    if simple.is_empty() {
        log::warn!("no sentence classified as simple");
    }
    Ok(Extraction { simple, other_ids })
}
