use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

use super::chunk::{ChunkSequence, ChunkTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatternItem {
    pub tag: ChunkTag,
    /// One or more repetitions of `tag` when set, exactly one otherwise.
    pub starred: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern(pub Vec<PatternItem>);

impl Pattern {
    /// Whole-sequence match; a starred item consumes one or more equal tags.
    pub fn matches(&self, tags: &[ChunkTag]) -> bool {
        let items = &self.0;
        // reach[j]: the first j tags are consumed by the items processed so far.
        let mut reach = vec![false; tags.len() + 1];
        reach[0] = true;
        for item in items {
            let mut next = vec![false; tags.len() + 1];
            for j in 0..tags.len() {
                if !reach[j] {
                    continue;
                }
                let mut k = j;
                while k < tags.len() && tags[k] == item.tag {
                    k += 1;
                    next[k] = true;
                    if !item.starred {
                        break;
                    }
                }
            }
            reach = next;
        }
        reach[tags.len()]
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let items = s
            .split_whitespace()
            .map(|w| {
                let (name, starred) = match w.strip_suffix('*') {
                    Some(n) => (n, true),
                    None => (w, false),
                };
                Ok(PatternItem { tag: name.parse()?, starred })
            })
            .collect::<Result<Vec<_>, String>>()?;
        if items.is_empty() {
            return Err("empty pattern".into());
        }
        Ok(Pattern(items))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", item.tag, if item.starred { "*" } else { "" })?;
        }
        Ok(())
    }
}

/// Collapses runs of equal adjacent tags into starred items.
pub fn surface_form(chunks: &ChunkSequence) -> Pattern {
    let mut items: Vec<PatternItem> = Vec::new();
    for &tag in &chunks.tags {
        match items.last_mut() {
            Some(last) if last.tag == tag => last.starred = true,
            _ => items.push(PatternItem { tag, starred: false }),
        }
    }
    Pattern(items)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub pattern: Pattern,
    /// Percentage of mined sentences with this surface form.
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    /// Number of sentences the confidences were computed over; 0 if unknown.
    pub source_count: usize,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// `PATTERN<TAB>confidence` per line, preceded by a `# source_count=` comment.
    pub fn to_text(&self) -> String {
        let mut out = format!("# source_count={}\n", self.source_count);
        for r in &self.rules {
            out.push_str(&format!("{}\t{:.2}\n", r.pattern, r.confidence));
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let mut rules = Vec::new();
        let mut source_count = 0;
        let mut seen = std::collections::HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(n) = rest.trim().strip_prefix("source_count=") {
                    source_count = n.parse().map_err(|_| Error::parse(path, i + 1, "bad source_count"))?;
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (pat, conf) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected PATTERN<TAB>confidence"))?;
            let pattern = Pattern::parse(pat).map_err(|m| Error::parse(path, i + 1, m))?;
            let confidence: f64 =
                conf.trim().parse().map_err(|_| Error::parse(path, i + 1, "bad confidence"))?;
            if !(0.0..=100.0).contains(&confidence) {
                return Err(Error::parse(path, i + 1, "confidence outside [0, 100]"));
            }
            if !seen.insert(pattern.clone()) {
                return Err(Error::parse(path, i + 1, format!("duplicate rule `{pattern}`")));
            }
            rules.push(Rule { pattern, confidence });
        }
        Ok(RuleSet { rules, source_count })
    }
}

/// Turns every distinct surface form among known-simple sentences into a
/// rule whose confidence is the share of sentences having that form.
pub fn mine_rules<'a>(simple: impl IntoIterator<Item = &'a ChunkSequence>) -> Result<RuleSet> {
    let mut counts: HashMap<Pattern, usize> = HashMap::new();
    let mut total = 0usize;
    for seq in simple {
        total += 1;
        *counts.entry(surface_form(seq)).or_insert(0) += 1;
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut rules: Vec<(Pattern, usize)> = counts.into_iter().collect();
    rules.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.to_string().cmp(&b.0.to_string())));
    let rules = rules
        .into_iter()
        .map(|(pattern, n)| Rule { pattern, confidence: 100.0 * n as f64 / total as f64 })
        .collect();
    Ok(RuleSet { rules, source_count: total })
}

/// True when any rule matches the full chunk sequence.
pub fn classify_rule(rules: &RuleSet, chunks: &ChunkSequence) -> bool {
    rules.rules.iter().any(|r| r.pattern.matches(&chunks.tags))
}

#[cfg(test)]
mod tests {
    use super::ChunkTag::*;
    use super::*;
    use proptest::prelude::*;

    fn seq(tags: &[ChunkTag]) -> ChunkSequence {
        ChunkSequence::new(0, tags.to_vec()).unwrap()
    }

    #[test]
    fn surface_forms() {
        assert_eq!(surface_form(&seq(&[NP, NP, VP, NP])).to_string(), "NP* VP NP");
        assert_eq!(surface_form(&seq(&[PP, NP, VP, PP, NP])).to_string(), "PP NP VP PP NP");
        assert_eq!(surface_form(&seq(&[VP, VP, VP])).to_string(), "VP*");
    }

    #[test]
    fn starred_item_needs_at_least_one() {
        let rules = RuleSet { rules: vec![Rule { pattern: Pattern::parse("NP* VP NP*").unwrap(), confidence: 11.69 }], source_count: 0 };
        assert!(!classify_rule(&rules, &seq(&[NP, NP, VP])));
        assert!(classify_rule(&rules, &seq(&[NP, VP, NP])));
        assert!(classify_rule(&rules, &seq(&[NP, NP, VP, NP, NP, NP])));
    }

    #[test]
    fn match_is_whole_sequence() {
        let p = Pattern::parse("NP VP").unwrap();
        assert!(!p.matches(&[NP, VP, NP]));
        assert!(!p.matches(&[NP]));
        let p = Pattern::parse("PP NP* PP").unwrap();
        assert!(p.matches(&[PP, NP, NP, PP]));
    }

    #[test]
    fn confidence_is_percentage_of_sentences() {
        let mut data = vec![seq(&[NP, VP, NP]); 12];
        data.extend(vec![seq(&[NP, VP]); 88]);
        let rs = mine_rules(&data).unwrap();
        assert_eq!(rs.source_count, 100);
        assert_eq!(rs.rules[0].pattern.to_string(), "NP VP");
        assert!((rs.rules[1].confidence - 12.0).abs() < 1e-12);
    }

    #[test]
    fn single_pattern_gets_full_confidence() {
        let rs = mine_rules(&vec![seq(&[VP, NP]); 5]).unwrap();
        assert_eq!(rs.len(), 1);
        assert_eq!(rs.rules[0].confidence, 100.0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(mine_rules(&[]).is_err());
    }

    #[test]
    fn rule_file_round_trip() {
        let text = "# source_count=3046\nNP VP PP NP PP NP\t12.15\nNP* VP NP*\t11.69\n";
        let rs = RuleSet::from_text(text, "r").unwrap();
        assert_eq!(rs.source_count, 3046);
        assert_eq!(rs.rules[1].pattern.to_string(), "NP* VP NP*");
        assert_eq!(rs.to_text(), text);
    }

    fn tag() -> impl Strategy<Value = ChunkTag> {
        prop::sample::select(ChunkTag::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn surface_form_has_no_adjacent_repeats(tags in prop::collection::vec(tag(), 1..20)) {
            let p = surface_form(&seq(&tags));
            for w in p.0.windows(2) {
                prop_assert_ne!(w[0].tag, w[1].tag);
            }
            prop_assert!(p.matches(&tags));
        }

        #[test]
        fn mined_rules_cover_training_set(data in prop::collection::vec(prop::collection::vec(tag(), 1..8), 1..30)) {
            let seqs: Vec<ChunkSequence> = data.iter().map(|t| seq(t)).collect();
            let rs = mine_rules(&seqs).unwrap();
            let total: f64 = rs.rules.iter().map(|r| r.confidence).sum();
            prop_assert!(total <= 100.0 + 1e-9);
            for r in &rs.rules {
                prop_assert!(r.confidence > 0.0 && r.confidence <= 100.0);
            }
            for s in &seqs {
                prop_assert!(classify_rule(&rs, s));
            }
        }
    }
}
