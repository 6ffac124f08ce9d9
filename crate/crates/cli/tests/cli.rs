use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn menli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_menli")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = menli(args);
    assert!(out.status.success(), "menli {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn generate(dir: &Path, phenomena: &str, seed: &str) -> PathBuf {
    let out = dir.join(format!("suite-{}-{seed}.jsonl", phenomena.replace([',', '+'], "_")));
    ok(&["generate", "--seeds", s(&fixture("seeds.jsonl")), "--phenomena", phenomena, "--seed", seed, "--out", s(&out)]);
    out
}

fn sha(path: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(path).unwrap()).to_vec()
}

#[test]
fn generate_is_deterministic_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "number,negation", "7");
    let copy = dir.path().join("copy.jsonl");
    std::fs::copy(&a, &copy).unwrap();
    let b = generate(dir.path(), "number,negation", "7");
    assert_eq!(sha(&copy), sha(&b));
    let n = data_lines(&a).len();
    assert!(n > 0 && n <= 20, "{n} instances");
    let c = generate(dir.path(), "number,negation", "8");
    assert_ne!(sha(&a), sha(&c));
}

#[test]
fn unknown_phenomenon_lists_valid_names() {
    let out = menli(&["generate", "--seeds", s(&fixture("seeds.jsonl")), "--phenomena", "number,sarcasm", "--seed", "1", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in [
        "addition", "omission", "mismatch_noun", "mismatch_verb", "mismatch_adj", "negation", "number", "pronoun", "name",
        "jumbling", "spelling", "svd",
    ] {
        assert!(err.contains(name), "missing {name} in {err}");
    }
}

#[test]
fn runtime_errors_are_json_on_stderr() {
    let out = menli(&["generate", "--seeds", "/nonexistent/seeds.jsonl", "--phenomena", "number", "--seed", "1", "--out", "x"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["error"]["message"].as_str().unwrap().contains("does not exist"));
}

#[test]
fn builtin_scalar_scores_twenty_responses() {
    let dir = tempfile::tempdir().unwrap();
    let suite = generate(dir.path(), "number", "3");
    assert_eq!(data_lines(&suite).len(), 10);
    let scores = dir.path().join("bleu.jsonl");
    let stdout = ok(&["score", "--suite", s(&suite), "--scorer", "sentbleu", "--out", s(&scores)]);
    assert!(stdout.starts_with("20 responses"));
    let recs = data_lines(&scores);
    assert_eq!(recs.len(), 20);
    assert!(recs.iter().all(|r| r["score"].is_f64() && r["metric_id"] == "sentbleu"));
    let again = ok(&["score", "--suite", s(&suite), "--scorer", "sentbleu", "--out", s(&scores)]);
    assert!(again.contains("(cached)"));
}

#[test]
fn nli_mode_requests_both_directions_unless_forward_only() {
    let dir = tempfile::tempdir().unwrap();
    let suite = generate(dir.path(), "number", "3");
    let template = format!("python3 {} {{in}} {{out}}", s(&fixture("fake_nli.py")));
    let both = dir.path().join("nli.jsonl");
    ok(&["score", "--suite", s(&suite), "--command", &template, "--mode", "nli", "--metric-id", "fake", "--out", s(&both)]);
    let recs = data_lines(&both);
    assert_eq!(recs.len(), 20);
    assert!(recs.iter().all(|r| r["forward"].is_object() && r["backward"].is_object()));

    let fwd = dir.path().join("fwd.jsonl");
    let line_cmd = format!("python3 {} --line", s(&fixture("fake_nli.py")));
    ok(&["score", "--suite", s(&suite), "--line", &line_cmd, "--mode", "nli", "--forward-only", "--out", s(&fwd)]);
    let recs = data_lines(&fwd);
    assert_eq!(recs.len(), 20);
    assert!(recs.iter().all(|r| r["forward"].is_object() && r.get("backward").is_none()));
}

/// Answers 1.0 for good candidates and 0.0 for adversarial ones.
const ORACLE: &str = r#"sed -n -e 's/.*"request_id":"\([^"]*#para\)".*/{"request_id":"\1","scalar":1.0}/p' -e 's/.*"request_id":"\([^"]*#adv\)".*/{"request_id":"\1","scalar":0.0}/p' {in} > {out}"#;

fn validate_schema(report: &Path) {
    let schema = ok(&["report", "--schema"]);
    let schema_path = report.with_extension("schema.json");
    std::fs::write(&schema_path, schema).unwrap();
    let script = "import json,sys,jsonschema; jsonschema.validate(json.load(open(sys.argv[1])), json.load(open(sys.argv[2])))";
    let out = Command::new("python3").args(["-c", script, s(report), s(&schema_path)]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_scores_are_perfect_and_report_validates() {
    let dir = tempfile::tempdir().unwrap();
    let suite = generate(dir.path(), "number,negation,jumbling", "5");
    let scores = dir.path().join("oracle.jsonl");
    ok(&["score", "--suite", s(&suite), "--command", ORACLE, "--metric-id", "oracle", "--out", s(&scores)]);
    let out = dir.path().join("report");
    let text = ok(&["evaluate", "--dataset", &format!("toy={}", s(&suite)), "--scores", &format!("toy={}", s(&scores)), "--out", s(&out)]);
    assert!(text.contains("Preference accuracy"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let section = &report["accuracy"][0];
    assert_eq!(section["accuracy"], 1.0);
    for (label, cell) in section["report"]["per_phenomenon"].as_object().unwrap() {
        assert_eq!(cell["correct"], cell["total"], "{label}");
    }
    validate_schema(&out.join("report.json"));
}

fn nli_and_base(dir: &Path) -> (PathBuf, [PathBuf; 4]) {
    let suite = generate(dir, "number,negation", "11");
    let template = format!("python3 {} {{in}} {{out}}", s(&fixture("fake_nli.py")));
    let paths = ["adv-nli", "adv-bleu", "std-nli", "std-bleu"].map(|n| dir.join(format!("{n}.jsonl")));
    ok(&["score", "--suite", s(&suite), "--command", &template, "--mode", "nli", "--metric-id", "fake", "--out", s(&paths[0])]);
    ok(&["score", "--suite", s(&suite), "--scorer", "sentbleu", "--out", s(&paths[1])]);
    let seg = fixture("segments.jsonl");
    ok(&["score", "--segments", s(&seg), "--command", &template, "--mode", "nli", "--metric-id", "fake", "--out", s(&paths[2])]);
    ok(&["score", "--segments", s(&seg), "--scorer", "sentbleu", "--out", s(&paths[3])]);
    (suite, paths)
}

#[test]
fn evaluate_pooling_modes() {
    let dir = tempfile::tempdir().unwrap();
    let (suite, p) = nli_and_base(dir.path());
    let judg = fixture("judgments.jsonl");
    let base_args = |out: &Path, pooling: &str| -> Vec<String> {
        vec![
            "evaluate".into(),
            "--dataset".into(),
            format!("adv={}", s(&suite)),
            "--judgments".into(),
            format!("wmt={}", s(&judg)),
            "--scores".into(),
            format!("adv={}", s(&p[0])),
            "--scores".into(),
            format!("wmt={}", s(&p[2])),
            "--pooling".into(),
            pooling.into(),
            "--out".into(),
            s(out).into(),
            "--plots".into(),
        ]
    };
    for pooling in ["auto", "auto-loo", "e-c/bi"] {
        let out = dir.path().join(format!("r-{}", pooling.replace('/', "_")));
        let args = base_args(&out, pooling);
        ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
        let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        let wins = report["winning"]["rows"].as_array().unwrap();
        assert_eq!(wins.len(), 15);
        let total: u64 = wins.iter().map(|r| r["adversarial"].as_u64().unwrap() + r["standard"].as_u64().unwrap()).sum();
        assert!(total >= 2);
        match pooling {
            "auto-loo" => assert_eq!(report["leave_one_out"].as_array().unwrap().len(), 2),
            "e-c/bi" => assert_eq!(report["selected_strategy"], "e-c/bi"),
            _ => assert!(report["selected_strategy"].is_string()),
        }
        let svgs = std::fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"));
        assert_eq!(svgs.count(), 1);
        validate_schema(&out.join("report.json"));
    }
}

#[test]
fn combine_sweeps_eleven_weights() {
    let dir = tempfile::tempdir().unwrap();
    let (suite, p) = nli_and_base(dir.path());
    let judg = fixture("judgments.jsonl");
    let out = dir.path().join("combine");
    let args = [
        "combine".to_string(),
        "--dataset".into(),
        format!("adv={}", s(&suite)),
        "--judgments".into(),
        format!("wmt={}", s(&judg)),
        "--nli".into(),
        format!("adv={}", s(&p[0])),
        "--nli".into(),
        format!("wmt={}", s(&p[2])),
        "--base".into(),
        format!("adv={}", s(&p[1])),
        "--base".into(),
        format!("wmt={}", s(&p[3])),
        "--pooling".into(),
        "e/bi".into(),
        "--out".into(),
        s(&out).into(),
        "--plots".into(),
    ];
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let points = report["sweeps"][0]["points"].as_array().unwrap();
    assert_eq!(points.len(), 11);
    assert!(out.join("sweep.svg").exists());
    validate_schema(&out.join("report.json"));

    // w = 0 is the base metric alone, w = 1 the pooled NLI metric alone.
    let eval_out = dir.path().join("base-only");
    ok(&[
        "evaluate",
        "--dataset",
        &format!("adv={}", s(&suite)),
        "--judgments",
        &format!("wmt={}", s(&judg)),
        "--scores",
        &format!("adv={}", s(&p[1])),
        "--scores",
        &format!("wmt={}", s(&p[3])),
        "--out",
        s(&eval_out),
    ]);
    let base: Value = serde_json::from_str(&std::fs::read_to_string(eval_out.join("report.json")).unwrap()).unwrap();
    let close = |a: &Value, b: &Value| (a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-12;
    assert!(close(&points[0]["accuracy"], &base["accuracy"][0]["accuracy"]));
    assert!(close(&points[0]["correlation"], &base["correlations"][0]["pearson"]));

    let text = ok(&["report", "--input", s(&out.join("report.json"))]);
    assert!(text.contains("best w_nli"));
}

#[test]
fn run_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.toml");
    std::fs::write(
        &run,
        format!(
            "seed = 9\nphenomena = [\"number\", \"number+negation\"]\n[paths]\nseeds = \"{}\"\nsuite = \"out/suite.jsonl\"\n",
            s(&fixture("seeds.jsonl"))
        ),
    )
    .unwrap();
    std::fs::create_dir(dir.path().join("out")).unwrap();
    let text = ok(&["--config", s(&run), "generate"]);
    assert!(text.contains("number+negation"));
    assert!(dir.path().join("out/suite.jsonl").exists());
    let flagged = dir.path().join("flag.jsonl");
    ok(&["generate", "--config", s(&run), "--phenomena", "negation", "--out", s(&flagged)]);
    assert!(data_lines(&flagged).iter().all(|r| r["phenomenon"] == "negation"));
}
