//! Command implementations behind the `minimt` binary: layered settings,
//! run manifests, corpus directories and the experiment grid.

mod commands;
mod compare;
mod settings;

pub use commands::{
    cmd_evaluate, cmd_extract_simple, cmd_preprocess, cmd_rate_aggregate, cmd_rate_sheet, cmd_train, cmd_translate,
    ExtractMethod, ExtractSummary, ModelInfo, PreprocessSummary, System,
};
pub use compare::{cmd_compare, render_markdown, CellResult, CellStatus, ComparisonReport, GridSystem, Winner, CORPORA};
pub use settings::{resolve_seed, Settings, SEED_ENV};

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::corpus::{read_lines, write_lines, ParallelCorpus, Sentence};
use crate::error::{Error, Result};
use crate::util::{sha256_file, write_atomic};

/// Process exit status for a finished command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Usage = 1,
    Data = 2,
    Partial = 3,
}

impl Status {
    /// Usage errors are problems with flags or configuration; everything
    /// else is a problem with the data or files.
    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::Config(_) | Error::UnknownMetric { .. } | Error::InvalidRatios(_) | Error::WouldOverwrite(_) => {
                Status::Usage
            }
            _ => Status::Data,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(FileDigest { path: path.display().to_string(), sha256: sha256_file(path)? })
    }
}

/// Record of one command run, written next to its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: std::collections::BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
}

pub const MANIFEST: &str = "manifest.json";

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn start(command: &str, settings: &Settings, seed: u64, inputs: &[&Path]) -> Result<Self> {
        Ok(RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: settings.effective(),
            inputs: inputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_>>()?,
            outputs: Vec::new(),
            started_unix: now(),
            finished_unix: None,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(MANIFEST), serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn finish(&mut self, dir: &Path, outputs: &[PathBuf]) -> Result<()> {
        self.outputs = outputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_>>()?;
        self.finished_unix = Some(now());
        self.write(dir)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::Missing(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks that every recorded output still has its recorded digest.
    pub fn verify_outputs(&self) -> Result<()> {
        for f in &self.outputs {
            let actual = sha256_file(Path::new(&f.path))?;
            if actual != f.sha256 {
                return Err(Error::Checkpoint(format!("{} changed since it was written", f.path)));
            }
        }
        Ok(())
    }
}

/// Refuses to touch an existing artifact unless `force` is set.
pub fn guard_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::WouldOverwrite(path.to_path_buf()));
    }
    Ok(())
}

/// On-disk corpus: `corpus.<src>`, `corpus.<tgt>` token lines, `corpus.ids`
/// with the original 1-based line numbers, and `corpus.langs`.
pub struct CorpusDir;

impl CorpusDir {
    pub fn write(dir: &Path, corpus: &ParallelCorpus) -> Result<Vec<PathBuf>> {
        let src = dir.join(format!("corpus.{}", corpus.src_lang));
        let tgt = dir.join(format!("corpus.{}", corpus.tgt_lang));
        let ids = dir.join("corpus.ids");
        let langs = dir.join("corpus.langs");
        let s: Vec<String> = corpus.sources().map(Sentence::text).collect();
        let t: Vec<String> = corpus.targets().map(Sentence::text).collect();
        let i: Vec<String> = corpus.sources().map(|s| s.id.to_string()).collect();
        write_lines(&src, &s)?;
        write_lines(&tgt, &t)?;
        write_lines(&ids, &i)?;
        write_lines(&langs, &[corpus.src_lang.as_str(), corpus.tgt_lang.as_str()])?;
        Ok(vec![src, tgt, ids, langs])
    }

    pub fn langs(dir: &Path) -> Result<(String, String)> {
        let path = dir.join("corpus.langs");
        if !path.exists() {
            return Err(Error::Missing(format!("{} is not a corpus directory (no corpus.langs)", dir.display())));
        }
        let l = read_lines(&path)?;
        match l.as_slice() {
            [s, t] => Ok((s.clone(), t.clone())),
            _ => Err(Error::parse(path.display().to_string(), 1, "expected two language tags")),
        }
    }

    pub fn files(dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let (s, t) = Self::langs(dir)?;
        Ok((dir.join(format!("corpus.{s}")), dir.join(format!("corpus.{t}"))))
    }

    pub fn read(dir: &Path) -> Result<ParallelCorpus> {
        let (src_lang, tgt_lang) = Self::langs(dir)?;
        let (sp, tp) = Self::files(dir)?;
        let s = read_lines(&sp)?;
        let t = read_lines(&tp)?;
        let ids = read_lines(&dir.join("corpus.ids"))?;
        if s.len() != t.len() {
            return Err(Error::Misaligned { left: s.len(), right: t.len() });
        }
        if ids.len() != s.len() {
            return Err(Error::Misaligned { left: ids.len(), right: s.len() });
        }
        let mut pairs = Vec::with_capacity(s.len());
        for (k, ((a, b), id)) in s.iter().zip(&t).zip(&ids).enumerate() {
            let id: usize =
                id.trim().parse().map_err(|_| Error::parse("corpus.ids", k + 1, format!("bad id `{id}`")))?;
            pairs.push((Sentence::from_tokens(id, a)?, Sentence::from_tokens(id, b)?));
        }
        ParallelCorpus::new(pairs, src_lang, tgt_lang)
    }
}
