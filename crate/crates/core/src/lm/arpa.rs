use std::collections::HashMap;
use std::fmt::Write as _;

use crate::corpus::{Vocab, PAD};
use crate::error::{Error, Result};

use super::{Entry, NGramLM};

/// Serializes in ARPA text format. Floats use the shortest representation
/// that parses back to the same value, so save/load/save is byte-stable.
pub fn write_arpa(lm: &NGramLM) -> String {
    let mut out = String::from("\\data\\\n");
    for (i, grams) in lm.entries().iter().enumerate() {
        let _ = writeln!(out, "ngram {}={}", i + 1, grams.len());
    }
    for (i, grams) in lm.entries().iter().enumerate() {
        let _ = write!(out, "\n\\{}-grams:\n", i + 1);
        let mut keys: Vec<&Vec<u32>> = grams.keys().collect();
        keys.sort();
        for key in keys {
            let e = grams[key];
            let words: Vec<&str> = key.iter().map(|&id| lm.vocab().symbol(id)).collect();
            let _ = write!(out, "{}\t{}", e.logprob, words.join(" "));
            if let Some(b) = e.backoff {
                let _ = write!(out, "\t{b}");
            }
            out.push('\n');
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

pub fn read_arpa(text: &str, path: &str) -> Result<NGramLM> {
    let mut lines = text.lines().enumerate().peekable();
    let err = |line: usize, msg: &str| Error::parse(path, line + 1, msg);

    while let Some((_, l)) = lines.peek() {
        if l.trim() == "\\data\\" {
            break;
        }
        lines.next();
    }
    lines.next().ok_or_else(|| err(0, "missing \\data\\ header"))?;

    let mut declared: Vec<usize> = Vec::new();
    while let Some(&(i, l)) = lines.peek() {
        let l = l.trim();
        if l.is_empty() {
            lines.next();
            if !declared.is_empty() {
                break;
            }
            continue;
        }
        let Some(rest) = l.strip_prefix("ngram ") else { break };
        let (n, count) = rest.split_once('=').ok_or_else(|| err(i, "expected ngram N=count"))?;
        let n: usize = n.trim().parse().map_err(|_| err(i, "bad n-gram order"))?;
        if n != declared.len() + 1 {
            return Err(err(i, "n-gram orders must be consecutive from 1"));
        }
        declared.push(count.trim().parse().map_err(|_| err(i, "bad n-gram count"))?);
        lines.next();
    }
    if declared.is_empty() {
        return Err(err(0, "no n-gram counts declared"));
    }

    let order = declared.len();
    let mut raw: Vec<Vec<(f64, Vec<String>, Option<f64>)>> = vec![Vec::new(); order];
    let mut section: Option<usize> = None;
    let mut ended = false;
    for (i, l) in lines {
        let l = l.trim_end();
        if l.is_empty() {
            continue;
        }
        if l == "\\end\\" {
            ended = true;
            break;
        }
        if let Some(n) = l.strip_prefix('\\').and_then(|s| s.strip_suffix("-grams:")) {
            let n: usize = n.parse().map_err(|_| err(i, "bad section header"))?;
            if n == 0 || n > order {
                return Err(err(i, "section order outside declared range"));
            }
            section = Some(n);
            continue;
        }
        let n = section.ok_or_else(|| err(i, "n-gram line outside a section"))?;
        let fields: Vec<&str> = l.split('\t').collect();
        let (prob, gram, backoff) = match fields[..] {
            [p, g] => (p, g, None),
            [p, g, b] => (p, g, Some(b)),
            _ => return Err(err(i, "expected logprob<TAB>ngram[<TAB>backoff]")),
        };
        let prob: f64 = prob.parse().map_err(|_| err(i, "bad logprob"))?;
        let backoff = backoff.map(|b| b.parse::<f64>()).transpose().map_err(|_| err(i, "bad backoff"))?;
        let words: Vec<String> = gram.split(' ').map(str::to_string).collect();
        if words.len() != n {
            return Err(err(i, "n-gram length does not match section"));
        }
        raw[n - 1].push((prob, words, backoff));
    }
    if !ended {
        return Err(err(text.lines().count(), "missing \\end\\"));
    }
    for (n, (grams, &want)) in raw.iter().zip(&declared).enumerate() {
        if grams.len() != want {
            return Err(Error::parse(path, 0, format!("{}-grams: declared {want}, found {}", n + 1, grams.len())));
        }
    }

    let vocab = Vocab::from_symbols(raw[0].iter().map(|(_, w, _)| (w[0].as_str(), 0)));
    let mut entries = vec![HashMap::new(); order];
    for (n, grams) in raw.into_iter().enumerate() {
        for (logprob, words, backoff) in grams {
            let ids: Vec<u32> = words
                .iter()
                .map(|w| vocab.get(w).filter(|&id| id != PAD))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::parse(path, 0, format!("n-gram `{}` uses a word without a unigram", words.join(" "))))?;
            entries[n].insert(ids, Entry { logprob, backoff });
        }
    }
    Ok(NGramLM::from_parts(order, vocab, entries))
}
