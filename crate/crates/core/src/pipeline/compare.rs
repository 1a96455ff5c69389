use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::commands::{System, Translator};
use super::{guard_overwrite, resolve_seed, CorpusDir, RunManifest, Settings};
use crate::corpus::{split, write_lines, ParallelCorpus, Sentence};
use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::util::write_atomic;

/// The four systems of the comparison grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridSystem {
    #[serde(rename = "smt")]
    Smt,
    #[serde(rename = "cnmt")]
    Cnmt,
    #[serde(rename = "wnmt-na")]
    WnmtNa,
    #[serde(rename = "wnmt-a")]
    WnmtA,
}

impl GridSystem {
    pub const ALL: [GridSystem; 4] = [GridSystem::Smt, GridSystem::Cnmt, GridSystem::WnmtNa, GridSystem::WnmtA];

    pub fn key(self) -> &'static str {
        match self {
            GridSystem::Smt => "smt",
            GridSystem::Cnmt => "cnmt",
            GridSystem::WnmtNa => "wnmt-na",
            GridSystem::WnmtA => "wnmt-a",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GridSystem::Smt => "SMT",
            GridSystem::Cnmt => "CNMT",
            GridSystem::WnmtNa => "WNMT-NA",
            GridSystem::WnmtA => "WNMT-A",
        }
    }

    fn base(self) -> System {
        match self {
            GridSystem::Smt => System::Smt,
            GridSystem::Cnmt => System::NmtChar,
            GridSystem::WnmtNa | GridSystem::WnmtA => System::NmtWord,
        }
    }
}

impl FromStr for GridSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GridSystem::ALL
            .into_iter()
            .find(|g| g.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown grid system `{s}` (valid: smt, cnmt, wnmt-na, wnmt-a)")))
    }
}

pub const CORPORA: [&str; 2] = ["simple", "whole"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// No corpus was supplied for this cell.
    Missing,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub system: GridSystem,
    pub corpus: String,
    pub status: CellStatus,
    pub bleu: Option<f64>,
    pub ter: Option<f64>,
    pub train_pairs: Option<usize>,
    pub eval_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Winner {
    pub corpus: String,
    pub metric: String,
    pub systems: Vec<GridSystem>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `train` scores on the training corpus, `test` on a held-out split.
    pub eval_on: String,
    pub seed: u64,
    pub cells: Vec<CellResult>,
    pub winners: Vec<Winner>,
}

impl ComparisonReport {
    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| c.status == CellStatus::Ok)
    }

    pub fn cell(&self, system: GridSystem, corpus: &str) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.system == system && c.corpus == corpus)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

fn winners(cells: &[CellResult]) -> Vec<Winner> {
    let mut out = Vec::new();
    for corpus in CORPORA {
        let ok: Vec<&CellResult> = cells.iter().filter(|c| c.corpus == corpus && c.status == CellStatus::Ok).collect();
        for (metric, higher) in [("bleu", true), ("ter", false)] {
            let value = |c: &CellResult| if metric == "bleu" { c.bleu } else { c.ter };
            let vals: Vec<(GridSystem, f64)> = ok.iter().filter_map(|c| value(c).map(|v| (c.system, v))).collect();
            let best = vals.iter().map(|v| v.1).fold(None, |acc: Option<f64>, v| match acc {
                None => Some(v),
                Some(a) if (higher && v > a) || (!higher && v < a) => Some(v),
                a => a,
            });
            if let Some(b) = best {
                out.push(Winner {
                    corpus: corpus.to_string(),
                    metric: metric.to_string(),
                    systems: vals.iter().filter(|v| v.1 == b).map(|v| v.0).collect(),
                    value: b,
                });
            }
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"))
}

/// Markdown table of a report; missing or failed cells print as `n/a` with
/// their status.
pub fn render_markdown(report: &ComparisonReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# System comparison (scored on {} data, seed {})\n", report.eval_on, report.seed);
    let _ = writeln!(s, "| System | Corpus | BLEU | TER | Status |");
    let _ = writeln!(s, "|---|---|---|---|---|");
    for c in &report.cells {
        let status = match (&c.status, &c.note) {
            (CellStatus::Ok, _) => "ok".to_string(),
            (st, Some(n)) => format!("{} ({n})", serde_json::to_string(st).unwrap_or_default().trim_matches('"')),
            (st, None) => serde_json::to_string(st).unwrap_or_default().trim_matches('"').to_string(),
        };
        let _ = writeln!(s, "| {} | {} | {} | {} | {} |", c.system.label(), c.corpus, fmt_opt(c.bleu), fmt_opt(c.ter), status);
    }
    if !report.winners.is_empty() {
        let _ = writeln!(s, "\nBest per corpus:\n");
        for w in &report.winners {
            let names: Vec<&str> = w.systems.iter().map(|g| g.label()).collect();
            let _ = writeln!(s, "- {} {}: {} ({:.2})", w.corpus, w.metric.to_uppercase(), names.join(", "), w.value);
        }
    }
    s
}

struct CellOutput {
    result: CellResult,
    hypotheses: Vec<String>,
}

fn run_cell(system: GridSystem, corpus_name: &str, corpus: &ParallelCorpus, settings: &Settings, seed: u64, eval_on: &str) -> Result<CellOutput> {
    let (train, eval) = if eval_on == "test" {
        let r: f64 = settings.get_or("test_ratio", 0.1)?;
        let parts = split(corpus, (1.0 - 2.0 * r, r, r), seed)?;
        (parts.train, parts.test)
    } else {
        (corpus.clone(), corpus.clone())
    };
    let mut settings = settings.clone();
    match system {
        GridSystem::WnmtNa => settings.set("attention", false)?,
        GridSystem::WnmtA => settings.set("attention", true)?,
        _ => {}
    }
    let (translator, _) = Translator::train(system.base(), &train, &settings, seed)?;
    let sources: Vec<String> = eval.sources().map(Sentence::text).collect();
    let (hyps, _) = translator.translate_lines(&sources, false)?;
    let refs: Vec<Vec<String>> = eval.targets().map(Sentence::words).collect();
    let hyp_tokens: Vec<Vec<String>> = hyps.iter().map(|h| h.split_whitespace().map(str::to_string).collect()).collect();
    let report = evaluate(system.label(), &refs, &hyp_tokens, &["bleu", "ter"])?;
    Ok(CellOutput {
        result: CellResult {
            system,
            corpus: corpus_name.to_string(),
            status: CellStatus::Ok,
            bleu: report.bleu.map(|b| b.score),
            ter: report.ter.map(|t| t.score),
            train_pairs: Some(train.len()),
            eval_pairs: Some(eval.len()),
            note: None,
        },
        hypotheses: hyps,
    })
}

/// Trains and scores the requested systems on the Simple and the whole
/// corpus. The report always holds all eight cells: unrequested systems and
/// absent corpora are marked missing, and a failing cell does not stop the
/// others.
pub fn cmd_compare(
    whole: Option<&Path>,
    simple: Option<&Path>,
    out_dir: &Path,
    settings: &Settings,
    force: bool,
) -> Result<ComparisonReport> {
    let report_path = out_dir.join("report.json");
    guard_overwrite(&report_path, force)?;
    let mut settings = settings.clone();
    let seed = resolve_seed(&mut settings)?;
    let eval_on = settings.raw("eval").to_string();
    if eval_on != "train" && eval_on != "test" {
        return Err(Error::Config(format!("eval must be `train` or `test`, got `{eval_on}`")));
    }
    let systems: Vec<GridSystem> =
        settings.raw("systems").split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect::<Result<_>>()?;
    if systems.is_empty() {
        return Err(Error::Config("no systems selected".into()));
    }

    let mut inputs: Vec<PathBuf> = Vec::new();
    let mut corpora: Vec<(&str, Option<ParallelCorpus>)> = Vec::new();
    for (name, dir) in [("simple", simple), ("whole", whole)] {
        let c = match dir {
            Some(d) => {
                let (s, t) = CorpusDir::files(d)?;
                inputs.extend([s, t]);
                Some(CorpusDir::read(d)?)
            }
            None => None,
        };
        corpora.push((name, c));
    }
    let input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut manifest = RunManifest::start("compare", &settings, seed, &input_refs)?;
    fs::create_dir_all(out_dir)?;
    manifest.write(out_dir)?;

    let jobs: Vec<(GridSystem, &str, Option<&ParallelCorpus>)> = corpora
        .iter()
        .flat_map(|(name, c)| GridSystem::ALL.into_iter().map(move |g| (g, *name, c.as_ref())))
        .collect();
    let outputs: Vec<CellOutput> = jobs
        .par_iter()
        .map(|&(g, name, corpus)| {
            let blank = |status, note: String| CellOutput {
                result: CellResult {
                    system: g,
                    corpus: name.to_string(),
                    status,
                    bleu: None,
                    ter: None,
                    train_pairs: None,
                    eval_pairs: None,
                    note: Some(note),
                },
                hypotheses: Vec::new(),
            };
            match corpus {
                _ if !systems.contains(&g) => blank(CellStatus::Missing, "not requested".into()),
                None => blank(CellStatus::Missing, "no corpus given".into()),
                Some(c) => match run_cell(g, name, c, &settings, seed, &eval_on) {
                    Ok(out) => out,
                    Err(e) => {
                        log::warn!("{} on {name} failed: {e}", g.label());
                        blank(CellStatus::Failed, e.to_string())
                    }
                },
            }
        })
        .collect();

    let mut written = Vec::new();
    for o in &outputs {
        if o.result.status == CellStatus::Ok {
            let p = out_dir.join(format!("hyp.{}.{}", o.result.system.key(), o.result.corpus));
            write_lines(&p, &o.hypotheses)?;
            written.push(p);
        }
    }
    let cells: Vec<CellResult> = outputs.into_iter().map(|o| o.result).collect();
    let report = ComparisonReport { eval_on, seed, winners: winners(&cells), cells };
    write_atomic(&report_path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    let md = out_dir.join("report.md");
    write_atomic(&md, render_markdown(&report).as_bytes())?;
    written.extend([report_path, md]);
    manifest.finish(out_dir, &written)?;
    Ok(report)
}
