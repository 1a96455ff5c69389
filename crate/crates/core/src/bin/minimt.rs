use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use minimt::pipeline::{self, ExtractMethod, Settings, Status, System};
use minimt::{Error, Result};

#[derive(Parser)]
#[command(name = "minimt", version, about = "Desk-scale SMT/NMT comparison workbench")]
struct Cli {
    /// key=value settings file, applied over the built-in defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one setting (repeatable): --set beam_size=50
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Random seed; falls back to $MINIMT_SEED, then 0
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Allow replacing existing outputs
    #[arg(long, global = true)]
    force: bool,
    /// More log output (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tokenize, truecase and length-filter a raw parallel corpus
    Preprocess {
        src: PathBuf,
        tgt: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Keep only the Simple sentences of a corpus directory
    ExtractSimple {
        corpus: PathBuf,
        #[arg(long, default_value = "rules")]
        method: ExtractMethod,
        /// Rule file (rules method)
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Labeled chunk sequences to mine rules from or to train the FFNN on
        #[arg(long)]
        labeled: Option<PathBuf>,
        /// Chunk annotations for the corpus, one `id<TAB>tags` per line
        #[arg(long)]
        chunks: Option<PathBuf>,
        /// Chunk unannotated sentences with the built-in heuristic
        #[arg(long)]
        allow_fallback: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Train smt, nmt-word or nmt-char on a corpus directory
    Train {
        system: System,
        corpus: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Translate a tokenized file line by line
    Translate {
        model: PathBuf,
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Write one JSON decoder trace per line (SMT only)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Score a hypothesis file against a reference file
    Evaluate {
        reference: PathBuf,
        hyp: PathBuf,
        #[arg(long, default_value = "bleu,ter")]
        metrics: String,
        #[arg(long, default_value = "system")]
        system: String,
        /// JSON report path; a CSV row goes to <out>.csv
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write a shuffled CSV sheet for manual adequacy/fluency rating
    RateSheet {
        sources: PathBuf,
        hyps: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Average filled-in rating sheets
    RateAggregate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the system x corpus grid, or re-render a saved report
    Compare {
        /// Corpus directory with every sentence
        #[arg(long)]
        whole: Option<PathBuf>,
        /// Corpus directory with the Simple subset
        #[arg(long)]
        simple: Option<PathBuf>,
        #[arg(short, long, required_unless_present = "render")]
        out: Option<PathBuf>,
        /// Print the table for an existing report.json and exit
        #[arg(long, conflicts_with_all = ["whole", "simple"])]
        render: Option<PathBuf>,
    },
}

fn settings(cli: &Cli) -> Result<Settings> {
    let overrides = cli
        .set
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = Settings::layered(cli.config.as_deref(), &overrides)?;
    if let Some(seed) = cli.seed {
        s.set("seed", seed)?;
    }
    Ok(s)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: &Cli) -> Result<Status> {
    let mut s = settings(cli)?;
    let force = cli.force;
    match &cli.cmd {
        Cmd::Preprocess { src, tgt, out } => print_json(&pipeline::cmd_preprocess(src, tgt, out, &s, force)?)?,
        Cmd::ExtractSimple { corpus, method, rules, labeled, chunks, allow_fallback, out } => {
            let summary = pipeline::cmd_extract_simple(
                corpus,
                *method,
                rules.as_deref(),
                labeled.as_deref(),
                chunks.as_deref(),
                *allow_fallback,
                out,
                &s,
                force,
            )?;
            print_json(&summary)?;
        }
        Cmd::Train { system, corpus, out } => {
            for p in pipeline::cmd_train(*system, corpus, out, &s, force)? {
                println!("{}", p.display());
            }
        }
        Cmd::Translate { model, input, out, trace } => {
            let n = pipeline::cmd_translate(model, input, out, trace.as_deref(), &s)?;
            log::info!("translated {n} lines");
        }
        Cmd::Evaluate { reference, hyp, metrics, system, out } => {
            print_json(&pipeline::cmd_evaluate(reference, hyp, metrics, system, out.as_deref())?)?
        }
        Cmd::RateSheet { sources, hyps, out } => {
            let seed = pipeline::resolve_seed(&mut s)?;
            pipeline::cmd_rate_sheet(sources, hyps, out, seed)?;
        }
        Cmd::RateAggregate { inputs, out } => print_json(&pipeline::cmd_rate_aggregate(inputs, out.as_deref())?)?,
        Cmd::Compare { whole, simple, out, render } => {
            let report = match (render, out) {
                (Some(path), _) => pipeline::ComparisonReport::load(path)?,
                (None, Some(out)) => pipeline::cmd_compare(whole.as_deref(), simple.as_deref(), out, &s, force)?,
                (None, None) => return Err(Error::Config("compare needs --out or --render".into())),
            };
            print!("{}", pipeline::render_markdown(&report));
            if !report.is_complete() {
                return Ok(Status::Partial);
            }
        }
    }
    Ok(Status::Success)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Usage as u8 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::of_error(&e) as u8)
        }
    }
}
