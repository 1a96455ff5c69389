use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{guard_overwrite, resolve_seed, CorpusDir, RunManifest, Settings};
use crate::corpus::{
    build_vocab, clean_pairs, lang_tag, read_lines, train_truecaser, truecase, write_lines, ParallelCorpus, Sentence,
};
use crate::error::{Error, Result};
use crate::lm::{read_arpa, train_lm, write_arpa, NGramLM};
use crate::metrics::{aggregate_ratings, evaluate, make_rating_sheet, parse_metric_list, read_ratings, EvalReport, RatingSummary};
use crate::nmt::checkpoint;
use crate::nmt::{train_nmt, EpochStats, ModelKind, Optimizer, Seq2SeqModel, TrainConfig};
use crate::simplex::{
    extract_simple, fallback_chunk, mine_rules, parse_chunk_file, train_ffnn, ChunkSequence, FfnnConfig, Label,
    LabeledDataset, RuleSet, SimpleClassifier,
};
use crate::smt::{build_phrase_table, decode, DecoderConfig, PhraseTable, Weights};
use crate::util::write_atomic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum System {
    #[serde(rename = "smt")]
    Smt,
    #[serde(rename = "nmt-word")]
    NmtWord,
    #[serde(rename = "nmt-char")]
    NmtChar,
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smt" => Ok(System::Smt),
            "nmt-word" => Ok(System::NmtWord),
            "nmt-char" => Ok(System::NmtChar),
            _ => Err(Error::Config(format!("unknown system `{s}` (valid: smt, nmt-word, nmt-char)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreprocessSummary {
    pub input_pairs: usize,
    pub dropped_empty: usize,
    pub dropped_long: usize,
    pub output_pairs: usize,
}

/// Tokenizes, truecases and length-filters a raw parallel corpus into a
/// corpus directory with vocabularies.
pub fn cmd_preprocess(src: &Path, tgt: &Path, out_dir: &Path, settings: &Settings, force: bool) -> Result<PreprocessSummary> {
    let s = read_lines(src)?;
    let t = read_lines(tgt)?;
    if s.len() != t.len() {
        return Err(Error::Misaligned { left: s.len(), right: t.len() });
    }
    guard_overwrite(&out_dir.join("corpus.langs"), force)?;
    let max_len: usize = settings.get_or("max_len", crate::corpus::DEFAULT_MAX_LEN)?;
    let mut settings = settings.clone();
    let seed = resolve_seed(&mut settings)?;
    let mut manifest = RunManifest::start("preprocess", &settings, seed, &[src, tgt])?;
    fs::create_dir_all(out_dir)?;
    manifest.write(out_dir)?;

    let mut pairs = Vec::with_capacity(s.len());
    for (i, (a, b)) in s.iter().zip(&t).enumerate() {
        match (Sentence::parse(i + 1, a), Sentence::parse(i + 1, b)) {
            (Ok(x), Ok(y)) => pairs.push((x, y)),
            (Err(Error::EmptySentence), _) | (_, Err(Error::EmptySentence)) => {}
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    let dropped_empty = s.len() - pairs.len();
    let tokenized = ParallelCorpus::new(pairs, lang_tag(src), lang_tag(tgt))?;
    if tokenized.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let tc_src = train_truecaser(tokenized.sources())?;
    let tc_tgt = train_truecaser(tokenized.targets())?;
    let cased = tokenized.map_sides(|a, b| (truecase(&tc_src, a), truecase(&tc_tgt, b)));
    let cleaned = clean_pairs(&cased, max_len)?;

    let mut outputs = CorpusDir::write(out_dir, &cleaned)?;
    for (lang, side) in [(&cleaned.src_lang, true), (&cleaned.tgt_lang, false)] {
        let vocab = if side { build_vocab(cleaned.sources(), 1)? } else { build_vocab(cleaned.targets(), 1)? };
        let path = out_dir.join(format!("vocab.{lang}"));
        write_atomic(&path, vocab.to_text().as_bytes())?;
        outputs.push(path);
    }
    let summary = PreprocessSummary {
        input_pairs: s.len(),
        dropped_empty,
        dropped_long: cased.len() - cleaned.len(),
        output_pairs: cleaned.len(),
    };
    let sp = out_dir.join("summary.json");
    write_atomic(&sp, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    outputs.push(sp);
    manifest.finish(out_dir, &outputs)?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractMethod {
    Rules,
    Ffnn,
}

impl FromStr for ExtractMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rules" => Ok(ExtractMethod::Rules),
            "ffnn" => Ok(ExtractMethod::Ffnn),
            _ => Err(Error::Config(format!("unknown method `{s}` (valid: rules, ffnn)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtractSummary {
    pub method: ExtractMethod,
    pub total: usize,
    pub simple: usize,
    pub other: usize,
    /// Sentences chunked by the built-in heuristic because no annotation
    /// was given for them.
    pub fallback_chunked: usize,
}

fn read_labeled(path: &Path) -> Result<LabeledDataset> {
    LabeledDataset::from_text(&fs::read_to_string(path)?, &path.display().to_string())
}

/// Writes the Simple subset of a corpus directory. The classifier is a rule
/// set (read from `rules`, or mined from the Simple items of `labeled`) or
/// a feed-forward network trained on `labeled`.
#[allow(clippy::too_many_arguments)]
pub fn cmd_extract_simple(
    corpus_dir: &Path,
    method: ExtractMethod,
    rules: Option<&Path>,
    labeled: Option<&Path>,
    chunks: Option<&Path>,
    allow_fallback: bool,
    out_dir: &Path,
    settings: &Settings,
    force: bool,
) -> Result<ExtractSummary> {
    let corpus = CorpusDir::read(corpus_dir)?;
    if chunks.is_none() && !allow_fallback {
        return Err(Error::Missing("no chunk annotations: pass --chunks FILE or --allow-fallback".into()));
    }
    guard_overwrite(&out_dir.join("corpus.langs"), force)?;
    let mut settings = settings.clone();
    let seed = resolve_seed(&mut settings)?;
    let mut inputs: Vec<&Path> = Vec::new();
    inputs.extend(rules);
    inputs.extend(labeled);
    inputs.extend(chunks);
    let mut manifest = RunManifest::start("extract-simple", &settings, seed, &inputs)?;
    fs::create_dir_all(out_dir)?;
    manifest.write(out_dir)?;

    let annotations: BTreeMap<usize, ChunkSequence> = match chunks {
        Some(p) => parse_chunk_file(&fs::read_to_string(p)?, &p.display().to_string())?,
        None => BTreeMap::new(),
    };
    let mut outputs = Vec::new();
    let classifier: Box<dyn SimpleClassifier> = match method {
        ExtractMethod::Rules => {
            let set = match (rules, labeled) {
                (Some(p), _) => RuleSet::from_text(&fs::read_to_string(p)?, &p.display().to_string())?,
                (None, Some(p)) => {
                    let data = read_labeled(p)?;
                    let set = mine_rules(data.items.iter().filter(|(_, l)| *l == Label::Simple).map(|(c, _)| c))?;
                    let rp = out_dir.join("rules.txt");
                    write_atomic(&rp, set.to_text().as_bytes())?;
                    outputs.push(rp);
                    set
                }
                (None, None) => return Err(Error::Missing("method rules needs --rules FILE or --labeled FILE".into())),
            };
            Box::new(set)
        }
        ExtractMethod::Ffnn => {
            let p = labeled.ok_or_else(|| Error::Missing("method ffnn needs --labeled FILE".into()))?;
            let cfg = FfnnConfig {
                lr: settings.get_or("ffnn_lr", 0.001)?,
                epochs: settings.get_or("ffnn_epochs", 100)?,
                batch_size: settings.get_or("ffnn_batch", 128)?,
                max_len: settings.get_or("ffnn_max_len", 40)?,
                seed,
                ..FfnnConfig::default()
            };
            Box::new(train_ffnn(&read_labeled(p)?, &cfg)?.model)
        }
    };
    let fallback_used = std::cell::Cell::new(0usize);
    let chunker = |s: &Sentence| -> Result<ChunkSequence> {
        match annotations.get(&s.id) {
            Some(c) => Ok(c.clone()),
            None if allow_fallback => {
                fallback_used.set(fallback_used.get() + 1);
                Ok(fallback_chunk(s))
            }
            None => Err(Error::Missing(format!("no chunk annotation for sentence {} (use --allow-fallback)", s.id))),
        }
    };
    let extraction = extract_simple(&corpus, chunker, classifier.as_ref())?;
    let summary = ExtractSummary {
        method,
        total: extraction.total(),
        simple: extraction.simple.len(),
        other: extraction.other_ids.len(),
        fallback_chunked: fallback_used.get(),
    };
    outputs.extend(CorpusDir::write(out_dir, &extraction.simple)?);
    let sp = out_dir.join("summary.json");
    write_atomic(&sp, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    outputs.push(sp);
    manifest.finish(out_dir, &outputs)?;
    Ok(summary)
}

/// Description of a trained model directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelInfo {
    pub system: System,
    pub src_lang: String,
    pub tgt_lang: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decoder: Option<DecoderConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nmt: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub history: Option<Vec<EpochStats>>,
}

pub(crate) const MODEL_INFO: &str = "model.json";
pub(crate) const PHRASE_TABLE: &str = "phrase-table";
pub(crate) const LM_FILE: &str = "lm.arpa";
pub(crate) const CHECKPOINT: &str = "model.bin";

pub(crate) fn decoder_config(settings: &Settings) -> Result<DecoderConfig> {
    let tm: [f64; 4] = settings
        .list_f64("w_tm")?
        .try_into()
        .map_err(|_| Error::Config("w_tm needs four comma-separated weights".into()))?;
    let limit: i64 = settings.get_or("distortion_limit", 6)?;
    let cfg = DecoderConfig {
        beam_size: settings.get_or("beam_size", 100)?,
        distortion_limit: (limit >= 0).then_some(limit as usize),
        max_phrase_len: settings.get_or("max_phrase_len", 7)?,
        ttable_limit: Some(settings.get_or("ttable_limit", 20)?),
        weights: Weights {
            tm,
            lm: settings.get_or("w_lm", 1.0)?,
            distortion: settings.get_or("w_distortion", 0.6)?,
            word_penalty: settings.get_or("w_word_penalty", -1.0)?,
        },
        oov_penalty: settings.get_or("oov_penalty", -10.0)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Per-system defaults, overridden by any explicitly set key.
pub(crate) fn nmt_config(settings: &Settings, kind: ModelKind, seed: u64) -> Result<TrainConfig> {
    let base = match kind {
        ModelKind::Word => TrainConfig::word(),
        ModelKind::Char => TrainConfig::char(),
    };
    let optimizer = match settings.raw("optimizer") {
        "" => base.optimizer,
        "rmsprop" => Optimizer::RmsProp,
        "sgd" => Optimizer::Sgd,
        other => return Err(Error::Config(format!("unknown optimizer `{other}` (valid: rmsprop, sgd)"))),
    };
    let clip: Option<f64> = settings.get("clip_norm")?;
    let cfg = TrainConfig {
        lr: settings.get_or("lr", base.lr)?,
        epochs: settings.get_or("epochs", base.epochs)?,
        batch_size: settings.get_or("batch_size", base.batch_size)?,
        optimizer,
        seed,
        max_len: settings.get_or("nmt_max_len", base.max_len)?,
        teacher_forcing: settings.get_or("teacher_forcing", base.teacher_forcing)?,
        hidden: settings.get_or("hidden", base.hidden)?,
        embed: settings.get_or("embed", base.embed)?,
        attention: kind == ModelKind::Word && settings.get_or("attention", base.attention)?,
        clip_norm: match clip {
            Some(c) if c <= 0.0 => None,
            Some(c) => Some(c),
            None => base.clip_norm,
        },
        init_scale: settings.get_or("init_scale", base.init_scale)?,
        min_count: settings.get_or("min_count", base.min_count)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// A loaded translation system.
pub(crate) enum Translator {
    Smt { table: PhraseTable, lm: NGramLM, cfg: DecoderConfig },
    Nmt { model: Seq2SeqModel, max_len: usize },
}

impl Translator {
    pub(crate) fn train(system: System, corpus: &ParallelCorpus, settings: &Settings, seed: u64) -> Result<(Self, ModelInfo)> {
        let mut info = ModelInfo {
            system,
            src_lang: corpus.src_lang.clone(),
            tgt_lang: corpus.tgt_lang.clone(),
            decoder: None,
            nmt: None,
            history: None,
        };
        let translator = match system {
            System::Smt => {
                let cfg = decoder_config(settings)?;
                let table = build_phrase_table(corpus, settings.get_or("ibm1_iterations", 10)?, cfg.max_phrase_len)?;
                let targets: Vec<Vec<String>> = corpus.targets().map(Sentence::words).collect();
                let lm = train_lm(&targets, settings.get_or("lm_order", 3)?)?;
                info.decoder = Some(cfg.clone());
                Translator::Smt { table, lm, cfg }
            }
            System::NmtWord | System::NmtChar => {
                let kind = if system == System::NmtWord { ModelKind::Word } else { ModelKind::Char };
                let cfg = nmt_config(settings, kind, seed)?;
                let out = train_nmt(corpus, kind, &cfg)?;
                info.nmt = Some(cfg);
                info.history = Some(out.history);
                Translator::Nmt { model: out.model, max_len: settings.get_or("translate_max_len", 80)? }
            }
        };
        Ok((translator, info))
    }

    pub(crate) fn save(&self, dir: &Path, info: &ModelInfo) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        match self {
            Translator::Smt { table, lm, .. } => {
                let pt = dir.join(PHRASE_TABLE);
                write_atomic(&pt, table.to_text().as_bytes())?;
                let lp = dir.join(LM_FILE);
                write_atomic(&lp, write_arpa(lm).as_bytes())?;
                out.extend([pt, lp]);
            }
            Translator::Nmt { model, .. } => {
                let cp = dir.join(CHECKPOINT);
                write_atomic(&cp, &checkpoint::to_bytes(model))?;
                out.push(cp);
            }
        }
        let ip = dir.join(MODEL_INFO);
        write_atomic(&ip, serde_json::to_string_pretty(info)?.as_bytes())?;
        out.push(ip);
        Ok(out)
    }

    pub(crate) fn load(dir: &Path, settings: &Settings) -> Result<(Self, ModelInfo)> {
        let ip = dir.join(MODEL_INFO);
        let text = fs::read_to_string(&ip).map_err(|e| Error::Missing(format!("{}: {e}", ip.display())))?;
        let info: ModelInfo = serde_json::from_str(&text)?;
        if let Ok(m) = RunManifest::read(dir) {
            m.verify_outputs()?;
        }
        let t = match info.system {
            System::Smt => {
                let pt = dir.join(PHRASE_TABLE);
                let table = PhraseTable::from_text(&fs::read_to_string(&pt)?, &pt.display().to_string())?;
                let lp = dir.join(LM_FILE);
                let lm = read_arpa(&fs::read_to_string(&lp)?, &lp.display().to_string())?;
                let cfg = info.decoder.clone().ok_or_else(|| Error::Missing("model.json lacks decoder settings".into()))?;
                Translator::Smt { table, lm, cfg }
            }
            System::NmtWord | System::NmtChar => {
                let model = checkpoint::from_bytes(&fs::read(dir.join(CHECKPOINT))?)?;
                Translator::Nmt { model, max_len: settings.get_or("translate_max_len", 80)? }
            }
        };
        Ok((t, info))
    }

    /// Translates tokenized lines in parallel; output order follows input.
    /// Blank lines stay blank. With `trace`, SMT decoding also returns one
    /// JSON trace per line.
    pub(crate) fn translate_lines(&self, lines: &[String], trace: bool) -> Result<(Vec<String>, Vec<String>)> {
        let results: Vec<Result<(String, String)>> = lines
            .par_iter()
            .map(|line| {
                let words: Vec<&str> = line.split_whitespace().collect();
                if words.is_empty() {
                    return Ok((String::new(), String::from("{}")));
                }
                match self {
                    Translator::Smt { table, lm, cfg } => {
                        let r = decode(&words, table, lm, cfg)?;
                        Ok((r.translation.join(" "), if trace { r.trace_json() } else { String::new() }))
                    }
                    Translator::Nmt { model, max_len } => Ok((model.translate(line, *max_len)?, String::new())),
                }
            })
            .collect();
        let mut out = Vec::with_capacity(lines.len());
        let mut traces = Vec::new();
        for r in results {
            let (t, tr) = r?;
            out.push(t);
            if trace {
                traces.push(tr);
            }
        }
        Ok((out, traces))
    }
}

/// Trains one system on a corpus directory and writes its artifacts.
pub fn cmd_train(system: System, corpus_dir: &Path, out_dir: &Path, settings: &Settings, force: bool) -> Result<Vec<PathBuf>> {
    let corpus = CorpusDir::read(corpus_dir)?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    guard_overwrite(&out_dir.join(MODEL_INFO), force)?;
    let mut settings = settings.clone();
    let seed = resolve_seed(&mut settings)?;
    let (sp, tp) = CorpusDir::files(corpus_dir)?;
    let mut manifest = RunManifest::start(&format!("train {}", system_name(system)), &settings, seed, &[&sp, &tp])?;
    fs::create_dir_all(out_dir)?;
    manifest.write(out_dir)?;
    let (translator, info) = Translator::train(system, &corpus, &settings, seed)?;
    let outputs = translator.save(out_dir, &info)?;
    manifest.finish(out_dir, &outputs)?;
    Ok(outputs)
}

fn system_name(s: System) -> &'static str {
    match s {
        System::Smt => "smt",
        System::NmtWord => "nmt-word",
        System::NmtChar => "nmt-char",
    }
}

/// Translates `input` line by line into `output`, optionally writing one
/// JSON decoder trace per line.
pub fn cmd_translate(model_dir: &Path, input: &Path, output: &Path, trace: Option<&Path>, settings: &Settings) -> Result<usize> {
    let (translator, info) = Translator::load(model_dir, settings)?;
    let tag = lang_tag(input);
    let looks_like_lang = (2..=3).contains(&tag.len()) && tag.chars().all(|c| c.is_ascii_lowercase()) && tag != "txt";
    if looks_like_lang && tag != info.src_lang {
        return Err(Error::Config(format!(
            "model translates {}->{} but input {} looks like `{tag}`",
            info.src_lang,
            info.tgt_lang,
            input.display()
        )));
    }
    let lines = read_lines(input)?;
    let (out, traces) = translator.translate_lines(&lines, trace.is_some())?;
    write_lines(output, &out)?;
    if let Some(tp) = trace {
        write_lines(tp, &traces)?;
    }
    Ok(out.len())
}

fn tokenized(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(read_lines(path)?.iter().map(|l| l.split_whitespace().map(str::to_string).collect()).collect())
}

/// Scores `hyp` against `reference`; with `out`, writes `<out>` as JSON and
/// `<out>.csv` as a one-row table.
pub fn cmd_evaluate(reference: &Path, hyp: &Path, metrics: &str, system: &str, out: Option<&Path>) -> Result<EvalReport> {
    let metrics = parse_metric_list(metrics)?;
    let report = evaluate(system, &tokenized(reference)?, &tokenized(hyp)?, &metrics)?;
    if let Some(p) = out {
        write_atomic(p, serde_json::to_string_pretty(&report)?.as_bytes())?;
        let mut csv_path = p.as_os_str().to_owned();
        csv_path.push(".csv");
        write_atomic(Path::new(&csv_path), format!("{}\n{}\n", EvalReport::CSV_HEADER, report.csv_row()).as_bytes())?;
    }
    Ok(report)
}

pub fn cmd_rate_sheet(sources: &Path, hyps: &Path, out: &Path, seed: u64) -> Result<usize> {
    let s = read_lines(sources)?;
    let h = read_lines(hyps)?;
    let mut buf = Vec::new();
    make_rating_sheet(&mut buf, &s, &h, seed)?;
    write_atomic(out, &buf)?;
    Ok(s.len())
}

/// Pools rating files into per-rater and overall means. Rows with a blank
/// rater id are credited to the file's stem.
pub fn cmd_rate_aggregate(inputs: &[PathBuf], out: Option<&Path>) -> Result<RatingSummary> {
    let mut records = Vec::new();
    for p in inputs {
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for mut r in read_ratings(fs::File::open(p)?)? {
            if r.rater_id.trim().is_empty() {
                r.rater_id.clone_from(&stem);
            }
            records.push(r);
        }
    }
    let summary = aggregate_ratings(&records)?;
    if let Some(p) = out {
        write_atomic(p, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    }
    Ok(summary)
}
