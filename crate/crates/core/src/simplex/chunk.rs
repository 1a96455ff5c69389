use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::{is_punct, Sentence};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChunkTag {
    NP,
    VP,
    PP,
    ADJP,
    ADVP,
    PRP,
    OTHER,
}

impl ChunkTag {
    pub const ALL: [ChunkTag; 7] =
        [ChunkTag::NP, ChunkTag::VP, ChunkTag::PP, ChunkTag::ADJP, ChunkTag::ADVP, ChunkTag::PRP, ChunkTag::OTHER];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChunkTag::NP => "NP",
            ChunkTag::VP => "VP",
            ChunkTag::PP => "PP",
            ChunkTag::ADJP => "ADJP",
            ChunkTag::ADVP => "ADVP",
            ChunkTag::PRP => "PRP",
            ChunkTag::OTHER => "OTHER",
        }
    }
}

impl fmt::Display for ChunkTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChunkTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ChunkTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown chunk tag `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChunkSequence {
    pub sentence_id: usize,
    pub tags: Vec<ChunkTag>,
}

impl ChunkSequence {
    pub fn new(sentence_id: usize, tags: Vec<ChunkTag>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::Config(format!("sentence {sentence_id} has no chunks")));
        }
        Ok(ChunkSequence { sentence_id, tags })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

pub(crate) fn parse_tags(s: &str) -> Result<Vec<ChunkTag>, String> {
    s.split_whitespace().map(str::parse).collect()
}

/// Parses the `id<TAB>TAG TAG ...` chunk annotation format.
pub fn parse_chunk_file(text: &str, path: &str) -> Result<BTreeMap<usize, ChunkSequence>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, tags) = line.split_once('\t').ok_or_else(|| Error::parse(path, i + 1, "expected id<TAB>tags"))?;
        let id: usize = id.trim().parse().map_err(|_| Error::parse(path, i + 1, "bad sentence id"))?;
        let tags = parse_tags(tags).map_err(|m| Error::parse(path, i + 1, m))?;
        let seq = ChunkSequence::new(id, tags).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if out.insert(id, seq).is_some() {
            return Err(Error::parse(path, i + 1, format!("duplicate sentence id {id}")));
        }
    }
    Ok(out)
}

pub fn format_chunk_file<'a>(seqs: impl IntoIterator<Item = &'a ChunkSequence>) -> String {
    let mut out = String::new();
    for s in seqs {
        let tags: Vec<&str> = s.tags.iter().map(|t| t.as_str()).collect();
        out.push_str(&format!("{}\t{}\n", s.sentence_id, tags.join(" ")));
    }
    out
}

const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "by", "for", "with", "from", "to", "of", "into", "onto", "over", "under", "about",
    "above", "below", "after", "before", "behind", "between", "through", "during", "without", "within",
    "near", "across", "along", "around", "towards", "toward", "upon", "beside", "inside", "outside",
];

const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they"];

const OBJECT_PRONOUNS: &[&str] = &[
    "me", "him", "her", "us", "them", "myself", "yourself", "himself", "herself", "itself", "ourselves",
    "themselves", "mine", "yours", "hers", "ours", "theirs",
];

const LINKERS: &[&str] = &[
    "and", "but", "or", "because", "although", "though", "when", "while", "if", "that", "which", "who",
    "whom", "whose", "since", "unless", "until", "so", "whereas", "where",
];

const AUXILIARIES: &[&str] = &[
    "is", "am", "are", "was", "were", "be", "been", "being", "has", "have", "had", "do", "does", "did",
    "will", "would", "shall", "should", "can", "could", "may", "might", "must", "not",
];

const VERBS: &[&str] = &[
    "run", "runs", "ran", "go", "goes", "went", "gone", "eat", "eats", "ate", "eaten", "see", "sees", "saw",
    "seen", "come", "comes", "came", "take", "takes", "took", "taken", "give", "gives", "gave", "given",
    "make", "makes", "made", "say", "says", "said", "know", "knows", "knew", "get", "gets", "got", "find",
    "finds", "found", "think", "thinks", "thought", "tell", "tells", "told", "leave", "leaves", "left",
    "feel", "feels", "felt", "bring", "brings", "brought", "keep", "keeps", "kept", "write", "writes",
    "wrote", "read", "reads", "sit", "sits", "sat", "speak", "speaks", "spoke", "buy", "buys", "bought",
    "sleep", "sleeps", "slept", "sing", "sings", "sang", "swim", "swims", "swam", "fly", "flies", "flew",
    "drink", "drinks", "drank", "like", "likes", "love", "loves", "want", "wants", "play", "plays", "live",
    "lives", "work", "works", "walk", "walks", "carry", "carries", "build", "builds", "built", "meet",
    "meets", "met", "win", "wins", "won", "lose", "loses", "lost", "pay", "pays", "paid", "send", "sends",
    "sent", "cost", "costs", "help", "helps", "need", "needs", "open", "opens", "close", "closes",
];

const ADVERBS: &[&str] = &[
    "very", "often", "always", "never", "here", "there", "now", "then", "soon", "today", "yesterday",
    "tomorrow", "also", "too", "quite", "again", "still", "already", "fast", "well",
];

const ADJECTIVE_SUFFIXES: &[&str] = &["ful", "ous", "ive", "able", "ible", "less", "ish"];
const ADJECTIVES: &[&str] =
    &["happy", "sad", "big", "small", "good", "bad", "tall", "short", "old", "young", "new", "hot", "cold", "red"];

fn word_tag(lowered: &str, prev: Option<ChunkTag>) -> ChunkTag {
    let w = lowered;
    let len = w.chars().count();
    if PREPOSITIONS.contains(&w) {
        ChunkTag::PP
    } else if LINKERS.contains(&w) {
        ChunkTag::OTHER
    } else if SUBJECT_PRONOUNS.contains(&w) {
        ChunkTag::NP
    } else if OBJECT_PRONOUNS.contains(&w) {
        ChunkTag::PRP
    } else if AUXILIARIES.contains(&w) || VERBS.contains(&w) {
        ChunkTag::VP
    } else if ADVERBS.contains(&w) || (len > 3 && w.ends_with("ly")) {
        ChunkTag::ADVP
    } else if (len > 3 && w.ends_with("ed")) || (len > 4 && w.ends_with("ing")) {
        ChunkTag::VP
    } else if prev == Some(ChunkTag::VP)
        && (ADJECTIVES.contains(&w) || (len > 4 && ADJECTIVE_SUFFIXES.iter().any(|s| w.ends_with(s))))
    {
        ChunkTag::ADJP
    } else {
        ChunkTag::NP
    }
}

/// Heuristic shallow chunker used when no external chunk annotations are
/// available. Each word is tagged from closed-class word lists and suffix
/// cues, punctuation is skipped, and adjacent equal tags merge into one chunk.
pub fn fallback_chunk(sent: &Sentence) -> ChunkSequence {
    let mut tags: Vec<ChunkTag> = Vec::new();
    for tok in &sent.tokens {
        if tok.surface().chars().all(is_punct) {
            continue;
        }
        let tag = word_tag(tok.lowered(), tags.last().copied());
        if tags.last() != Some(&tag) {
            tags.push(tag);
        }
    }
    if tags.is_empty() {
        tags.push(ChunkTag::OTHER);
    }
    ChunkSequence { sentence_id: sent.id, tags }
}

#[cfg(test)]
mod tests {
    use super::ChunkTag::*;
    use super::*;

    fn chunk(text: &str) -> Vec<ChunkTag> {
        fallback_chunk(&Sentence::from_tokens(0, text).unwrap()).tags
    }

    #[test]
    fn subject_verb_adverb() {
        assert_eq!(chunk("She ran quickly"), [NP, VP, ADVP]);
    }

    #[test]
    fn prepositional_phrase() {
        assert_eq!(chunk("In the house"), [PP, NP]);
    }

    #[test]
    fn unknown_word_is_np() {
        assert_eq!(chunk("Zorblax"), [NP]);
    }

    #[test]
    fn linkers_and_objects() {
        assert_eq!(chunk("he saw them because it rained ."), [NP, VP, PRP, OTHER, NP, VP]);
        assert_eq!(chunk("the boy is happy"), [NP, VP, ADJP]);
        assert_eq!(chunk("."), [OTHER]);
    }

    #[test]
    fn chunk_file_round_trip() {
        let text = "1\tNP VP NP\n7\tPP NP VP\n";
        let parsed = parse_chunk_file(text, "c").unwrap();
        assert_eq!(parsed[&7].tags, [PP, NP, VP]);
        assert_eq!(format_chunk_file(parsed.values()), text);
    }

    #[test]
    fn chunk_file_rejects_unknown_tag() {
        let err = parse_chunk_file("1\tNP XP\n", "c").unwrap_err();
        assert!(err.to_string().contains("c:1"), "{err}");
    }
}
