use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::ParallelCorpus;

/// Language tag taken from the file extension (`corpus.bn` -> `bn`).
pub fn lang_tag(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("xx").to_string()
}

pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().map(|l| l.trim_end_matches('\r').to_string()).collect())
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_lines<S: AsRef<str>>(path: &Path, lines: &[S]) -> Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(l.as_ref());
        text.push('\n');
    }
    crate::util::write_atomic(path, text.as_bytes())
}

/// Reads two line-aligned files into a tokenized parallel corpus.
pub fn read_parallel(src: &Path, tgt: &Path) -> Result<ParallelCorpus> {
    let s = read_lines(src)?;
    let t = read_lines(tgt)?;
    if s.len() != t.len() {
        return Err(Error::Misaligned { left: s.len(), right: t.len() });
    }
    ParallelCorpus::from_lines(&s, &t, &lang_tag(src), &lang_tag(tgt))
}

/// Writes both sides as space-joined token lines.
pub fn write_parallel(corpus: &ParallelCorpus, src: &Path, tgt: &Path) -> Result<()> {
    let s: Vec<String> = corpus.sources().map(|x| x.text()).collect();
    let t: Vec<String> = corpus.targets().map(|x| x.text()).collect();
    write_lines(src, &s)?;
    write_lines(tgt, &t)
}
