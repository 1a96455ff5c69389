use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use minimt::synthetic::{bundled_files, synthetic_pairs};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn minimt(dir: &Path, args: &[&str]) -> Run {
    minimt_env(dir, args, &[])
}

fn minimt_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_minimt"));
    cmd.current_dir(dir).args(args).env_remove("MINIMT_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// A scratch directory holding a 60-pair slice of the bundled corpus
/// (`raw.en`, `raw.bn`) plus its chunk and label files.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let pairs = synthetic_pairs(60, 3);
    let en: String = pairs.iter().map(|p| format!("{}\n", p.source)).collect();
    let bn: String = pairs.iter().map(|p| format!("{}\n", p.target)).collect();
    fs::write(dir.path().join("raw.en"), en).unwrap();
    fs::write(dir.path().join("raw.bn"), bn).unwrap();
    for (name, content) in bundled_files() {
        if name.ends_with("chunks") || name.ends_with("labels") {
            fs::write(dir.path().join(name), content).unwrap();
        }
    }
    let chunks: String = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| format!("{}\t{}\n", i + 1, p.tags.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" ")))
        .collect();
    fs::write(dir.path().join("raw.chunks"), chunks).unwrap();
    dir
}

fn ok(r: &Run) {
    assert_eq!(r.code, 0, "stdout:\n{}\nstderr:\n{}", r.stdout, r.stderr);
}

fn files_except_manifest(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (PathBuf::from(p.file_name().unwrap()), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

const SMALL_NMT: [&str; 8] = ["--set", "epochs=2", "--set", "hidden=8", "--set", "embed=4", "--set", "batch_size=16"];

#[test]
fn reruns_are_byte_identical() {
    let w = workspace();
    let d = w.path();
    for run in ["a", "b"] {
        ok(&minimt(d, &["preprocess", "raw.en", "raw.bn", "-o", &format!("{run}/corpus")]));
        ok(&minimt(d, &["train", "smt", &format!("{run}/corpus"), "-o", &format!("{run}/smt")]));
        let mut args = vec!["train", "nmt-word"];
        let (c, o) = (format!("{run}/corpus"), format!("{run}/nmt"));
        args.extend([c.as_str(), "-o", o.as_str(), "--seed", "5"]);
        args.extend(SMALL_NMT);
        ok(&minimt(d, &args));
        ok(&minimt(d, &["translate", &format!("{run}/smt"), &format!("{run}/corpus/corpus.en"), "-o", &format!("{run}/out.bn")]));
    }
    for sub in ["corpus", "smt", "nmt"] {
        assert_eq!(files_except_manifest(&d.join("a").join(sub)), files_except_manifest(&d.join("b").join(sub)), "{sub}");
    }
    assert_eq!(fs::read(d.join("a/out.bn")).unwrap(), fs::read(d.join("b/out.bn")).unwrap());
}

#[test]
fn existing_artifacts_need_force() {
    let w = workspace();
    let d = w.path();
    ok(&minimt(d, &["preprocess", "raw.en", "raw.bn", "-o", "corpus"]));
    ok(&minimt(d, &["train", "smt", "corpus", "-o", "smt"]));
    let before = fs::read(d.join("smt/phrase-table")).unwrap();
    let again = minimt(d, &["train", "smt", "corpus", "-o", "smt", "--set", "max_phrase_len=2"]);
    assert_eq!(again.code, 1, "{}", again.stderr);
    assert!(again.stderr.contains("--force"));
    assert_eq!(fs::read(d.join("smt/phrase-table")).unwrap(), before);
    ok(&minimt(d, &["train", "smt", "corpus", "-o", "smt", "--set", "max_phrase_len=2", "--force"]));
    assert_ne!(fs::read(d.join("smt/phrase-table")).unwrap(), before);
}

#[test]
fn exit_codes_separate_usage_and_data_errors() {
    let w = workspace();
    let d = w.path();
    fs::write(d.join("short.bn"), "এক\n").unwrap();
    assert_eq!(minimt(d, &["evaluate", "raw.bn", "raw.bn", "--metrics", "bleu,meteor"]).code, 1);
    assert_eq!(minimt(d, &["evaluate", "raw.bn", "short.bn"]).code, 2);
    assert_eq!(minimt(d, &["train", "smt", "no-such-dir", "-o", "m"]).code, 2);
    assert_eq!(minimt(d, &["train", "rbmt", "x", "-o", "m"]).code, 1);
    assert_eq!(minimt(d, &["frobnicate"]).code, 1);
    assert_eq!(minimt(d, &["train", "smt", "x", "-o", "m", "--set", "beam_width=3"]).code, 1);
    assert_eq!(minimt(d, &["preprocess", "raw.en", "short.bn", "-o", "c"]).code, 2);
    ok(&minimt(d, &["preprocess", "raw.en", "raw.bn", "-o", "corpus"]));
    let r = minimt(d, &["extract-simple", "corpus", "--labeled", "synthetic.labels", "-o", "simple"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--allow-fallback"), "{}", r.stderr);
}

#[test]
fn preprocess_and_extract_report_consistent_counts() {
    let w = workspace();
    let d = w.path();
    fs::write(d.join("gappy.en"), "One .\n\nThree words here .\n").unwrap();
    fs::write(d.join("gappy.bn"), "এক ।\nদুই ।\n\n").unwrap();
    let r = minimt(d, &["preprocess", "gappy.en", "gappy.bn", "-o", "gappy", "--set", "max_len=3"]);
    ok(&r);
    let summary: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(summary["input_pairs"], 3);
    assert_eq!(summary["dropped_empty"], 2);
    assert_eq!(summary["output_pairs"], 1);

    ok(&minimt(d, &["preprocess", "raw.en", "raw.bn", "-o", "corpus"]));
    for method in ["rules", "ffnn"] {
        let r = minimt(
            d,
            &["extract-simple", "corpus", "--method", method, "--labeled", "synthetic.labels", "--chunks", "raw.chunks", "-o", method, "--set", "ffnn_epochs=20"],
        );
        ok(&r);
        let s: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
        let (simple, other, total) = (s["simple"].as_u64().unwrap(), s["other"].as_u64().unwrap(), s["total"].as_u64().unwrap());
        assert_eq!(simple + other, total);
        assert_eq!(total, 60);
        let kept = fs::read_to_string(d.join(method).join("corpus.en")).unwrap().lines().count() as u64;
        assert_eq!(kept, simple);
    }
    let gold_simple = synthetic_pairs(60, 3).iter().filter(|p| p.label == minimt::simplex::Label::Simple).count();
    let kept = fs::read_to_string(d.join("rules/corpus.en")).unwrap().lines().count();
    assert_eq!(kept, gold_simple);
    let r = minimt(d, &["extract-simple", "corpus", "--labeled", "synthetic.labels", "--allow-fallback", "-o", "fb"]);
    ok(&r);
    let s: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(s["fallback_chunked"], 60);
}

#[test]
fn translate_preserves_lines_and_checks_direction() {
    let w = workspace();
    let d = w.path();
    ok(&minimt(d, &["preprocess", "raw.en", "raw.bn", "-o", "corpus"]));
    ok(&minimt(d, &["train", "smt", "corpus", "-o", "smt"]));
    fs::write(d.join("empty.en"), "").unwrap();
    ok(&minimt(d, &["translate", "smt", "empty.en", "-o", "empty.out"]));
    assert_eq!(fs::read(d.join("empty.out")).unwrap(), b"");

    fs::write(d.join("mixed.en"), "the dog slept .\n\nthe cat ate the fish .\n").unwrap();
    ok(&minimt(d, &["translate", "smt", "mixed.en", "-o", "mixed.out", "--trace", "mixed.trace"]));
    let out = fs::read_to_string(d.join("mixed.out")).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(!lines[0].is_empty() && lines[1].is_empty() && !lines[2].is_empty());
    let traces = fs::read_to_string(d.join("mixed.trace")).unwrap();
    let first: serde_json::Value = serde_json::from_str(traces.lines().next().unwrap()).unwrap();
    assert_eq!(first["translation"].as_array().unwrap().len(), lines[0].split(' ').count());

    let r = minimt(d, &["translate", "smt", "corpus/corpus.bn", "-o", "wrong.out"]);
    assert_eq!(r.code, 1, "{}", r.stderr);

    let mut tampered = fs::read_to_string(d.join("smt/lm.arpa")).unwrap();
    tampered.push('\n');
    fs::write(d.join("smt/lm.arpa"), tampered).unwrap();
    assert_eq!(minimt(d, &["translate", "smt", "mixed.en", "-o", "x.out"]).code, 2);
}

#[test]
fn nmt_training_applies_system_defaults() {
    let w = workspace();
    let d = w.path();
    ok(&minimt(d, &["preprocess", "raw.en", "raw.bn", "-o", "corpus"]));
    let small = ["--set", "epochs=1", "--set", "hidden=8", "--set", "embed=4"];
    ok(&minimt(d, &[&["train", "nmt-word", "corpus", "-o", "w"][..], &small].concat()));
    ok(&minimt(d, &[&["train", "nmt-char", "corpus", "-o", "c"][..], &small].concat()));
    let word: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("w/model.json")).unwrap()).unwrap();
    let chr: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("c/model.json")).unwrap()).unwrap();
    assert_eq!(word["nmt"]["batch_size"], 256);
    assert_eq!(word["nmt"]["lr"], 0.001);
    assert_eq!(word["nmt"]["optimizer"], "rmsprop");
    assert_eq!(word["nmt"]["attention"], true);
    assert_eq!(word["nmt"]["hidden"], 8);
    assert_eq!(chr["nmt"]["batch_size"], 64);
    assert_eq!(chr["nmt"]["attention"], false);
    assert_eq!(chr["system"], "nmt-char");

    ok(&minimt(d, &["translate", "c", "corpus/corpus.en", "-o", "c.out"]));
    let n = fs::read_to_string(d.join("c.out")).unwrap().lines().count();
    assert_eq!(n, 60);
}

#[test]
fn seeds_and_settings_are_recorded() {
    let w = workspace();
    let d = w.path();
    fs::write(d.join("run.cfg"), "# test config\nmax_len = 30\nlm_order = 2\n").unwrap();
    ok(&minimt_env(d, &["preprocess", "raw.en", "raw.bn", "-o", "env", "--config", "run.cfg"], &[("MINIMT_SEED", "77")]));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("env/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 77);
    assert_eq!(m["config"]["max_len"], "30");
    assert_eq!(m["config"]["lm_order"], "2");
    assert_eq!(m["config"]["beam_size"], "100");
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
    assert!(m["finished_unix"].is_u64());

    let args = ["preprocess", "raw.en", "raw.bn", "-o", "flag", "--config", "run.cfg", "--seed", "3", "--set", "max_len=40"];
    ok(&minimt_env(d, &args, &[("MINIMT_SEED", "77")]));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("flag/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 3);
    assert_eq!(m["config"]["max_len"], "40");
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap()).collect();
    assert!(outputs.iter().any(|p| p.ends_with("corpus.en")));
}

#[test]
fn evaluate_writes_json_and_csv() {
    let w = workspace();
    let d = w.path();
    let r = minimt(d, &["evaluate", "raw.bn", "raw.bn", "--system", "copy", "-o", "eval.json"]);
    ok(&r);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("eval.json")).unwrap()).unwrap();
    assert_eq!(report["bleu"]["score"], 100.0);
    assert_eq!(report["ter"]["score"], 0.0);
    assert!(!report["settings"].as_array().unwrap().is_empty());
    let csv = fs::read_to_string(d.join("eval.json.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "system,sentences,bleu,bleu_unsmoothed,ter");
    assert!(lines.next().unwrap().starts_with("copy,60,100"));
}

#[test]
fn rating_round_trip() {
    let w = workspace();
    let d = w.path();
    ok(&minimt(d, &["rate-sheet", "raw.en", "raw.bn", "-o", "sheet.csv", "--seed", "4"]));
    let sheet = fs::read_to_string(d.join("sheet.csv")).unwrap();
    assert_eq!(sheet.lines().count(), 61);
    assert!(sheet.starts_with("sentence_id,rater_id,source,hypothesis,adequacy,fluency"));
    let fill = |ad: u8, fl: u8| -> String {
        let mut rdr = csv::Reader::from_reader(sheet.as_bytes());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(rdr.headers().unwrap()).unwrap();
        for rec in rdr.records() {
            let rec = rec.unwrap();
            let (a, f) = (ad.to_string(), fl.to_string());
            w.write_record([&rec[0], "", &rec[2], &rec[3], a.as_str(), f.as_str()]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    };
    fs::write(d.join("alice.csv"), fill(4, 3)).unwrap();
    fs::write(d.join("bob.csv"), fill(2, 5)).unwrap();
    let r = minimt(d, &["rate-aggregate", "alice.csv", "bob.csv", "-o", "ratings.json"]);
    ok(&r);
    let s: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(s["avg_adequacy"], 3.0);
    assert_eq!(s["avg_fluency"], 4.0);
    let raters: Vec<&str> = s["per_rater"].as_array().unwrap().iter().map(|r| r["rater_id"].as_str().unwrap()).collect();
    assert_eq!(raters, ["alice", "bob"]);

    fs::write(d.join("bad.csv"), "sentence_id,rater_id,adequacy,fluency\n1,x,6,3\n").unwrap();
    assert_eq!(minimt(d, &["rate-aggregate", "bad.csv"]).code, 2);
}

#[test]
fn partial_grid_is_marked_and_re_renderable() {
    let w = workspace();
    let d = w.path();
    ok(&minimt(d, &["preprocess", "raw.en", "raw.bn", "-o", "corpus"]));
    let r = minimt(d, &["compare", "--whole", "corpus", "-o", "grid", "--set", "systems=smt", "--set", "eval=train"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("grid/report.json")).unwrap()).unwrap();
    let cells = report["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 8);
    let missing: Vec<_> = cells.iter().filter(|c| c["status"] == "missing").collect();
    assert_eq!(missing.len(), 7);
    assert!(missing.iter().all(|c| c["bleu"].is_null() && c["ter"].is_null()));
    let smt = cells.iter().find(|c| c["status"] == "ok").unwrap();
    assert_eq!((smt["system"].as_str(), smt["corpus"].as_str()), (Some("smt"), Some("whole")));
    assert!(fs::read_to_string(d.join("grid/hyp.smt.whole")).unwrap().lines().count() == 60);

    let rendered = minimt(d, &["compare", "--render", "grid/report.json"]);
    assert_eq!(rendered.code, 3);
    assert_eq!(rendered.stdout, fs::read_to_string(d.join("grid/report.md")).unwrap());
    assert!(rendered.stdout.contains("| WNMT-A | whole | n/a | n/a | missing (not requested) |"));

    let again = minimt(d, &["compare", "--whole", "corpus", "-o", "grid", "--set", "systems=smt"]);
    assert_eq!(again.code, 1);
}
