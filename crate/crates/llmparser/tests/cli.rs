mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use llmparser::inference::{GenerationServer, MockBackend};
use llmparser::manifest::{manifest_path, RunManifest};
use llmparser_core::EvalReport;

fn llmparser(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llmparser"))
        .args(args)
        .env_remove("LLMPARSER_ENDPOINT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn ok(o: Output) -> String {
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(path: &Path) -> EvalReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn manifest(artifact: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(manifest_path(artifact)).unwrap()).unwrap()
}

#[test]
fn sample_writes_requested_shots_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let data = common::dataset_in(dir.path(), "Apache_2k.log_structured.csv", &common::synthetic_pairs(300, 6, 1));
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let stdout = ok(llmparser(&["sample", "--dataset", s(&data), "--shots", "50", "--seed", "42", "--out", s(out)]));
        assert!(stdout.contains("clusters"), "{stdout}");
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 51, "header plus 50 shots");
    assert!(text.starts_with("{\"seed\":42,\"n\":50,\"system\":\"Apache\"}\n"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let m = manifest(&a);
    assert_eq!(m.command, "sample");
    assert_eq!(m.seed, Some(42));
    assert_eq!(m.outputs, vec![a.display().to_string()]);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = common::dataset_in(dir.path(), "S.csv", &common::synthetic_pairs(20, 2, 1));
    let out = dir.path().join("x");
    assert_eq!(code(&llmparser(&["sample", "--dataset", s(&data), "--shots", "0", "--out", s(&out)])), 1);
    assert_eq!(code(&llmparser(&["bogus"])), 1);
    assert_eq!(code(&llmparser(&["parse", "--dataset", s(&data), "--out", s(&out)])), 1, "no endpoint or mock");
    let icl = llmparser(&[
        "parse", "--dataset", s(&data), "--out", s(&out), "--mock", "echo-truth", "--mode", "icl", "--icl-shots", "3",
    ]);
    assert_eq!(code(&icl), 1);
    assert!(String::from_utf8_lossy(&icl.stderr).contains("--shots-file"));
    assert!(!out.exists());
    assert_eq!(code(&llmparser(&["--help"])), 0);
    assert_eq!(code(&llmparser(&["--version"])), 0);
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&llmparser(&["sample", "--dataset", s(&missing), "--out", s(&out)])), 2);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "LineId,Content\n1,hello\n").unwrap();
    assert_eq!(code(&llmparser(&["sample", "--dataset", s(&bad), "--out", s(&out)])), 2);
}

#[test]
fn pipeline_echo_truth_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = common::synthetic_pairs(400, 8, 3);
    let data = common::dataset_in(dir.path(), "HDFS_2k.log_structured.csv", &pairs);
    let shots = dir.path().join("shots.jsonl");
    let parsed = dir.path().join("parsed.csv");
    let eval = dir.path().join("eval.json");
    ok(llmparser(&["sample", "--dataset", s(&data), "--shots", "25", "--out", s(&shots)]));
    ok(llmparser(&[
        "parse", "--dataset", s(&data), "--out", s(&parsed), "--mock", "echo-truth", "--parallelism", "4",
    ]));
    let csv = fs::read_to_string(&parsed).unwrap();
    assert!(csv.starts_with("index,content,parsed_template,latency_ms,attempts\n"));
    assert_eq!(csv.lines().count(), 401);
    ok(llmparser(&["eval", "--dataset", s(&data), "--parsed", s(&parsed), "--shots-file", s(&shots), "--out", s(&eval)]));
    let r = report(&eval);
    assert_eq!((r.ga, r.pa, r.n_logs), (1.0, 1.0, 400));
    assert_eq!(r.pa_seen, Some(1.0));
    assert!(r.n_excluded.unwrap() >= 25, "every shot log occurs in the corpus");
    assert_eq!(manifest(&eval).command, "eval");
    assert_eq!(manifest(&parsed).command, "parse");

    let table = ok(llmparser(&["report", s(&eval)]));
    assert_eq!(table.lines().filter(|l| l.starts_with("| ")).count(), 4, "header, rule, HDFS and Average\n{table}");
    assert!(table.contains("| HDFS"));
}

#[test]
fn shots_covering_every_template_omit_unseen() {
    let dir = tempfile::tempdir().unwrap();
    let data = common::dataset_in(dir.path(), "Mac.csv", &common::synthetic_pairs(40, 3, 9));
    let shots = dir.path().join("shots.jsonl");
    let parsed = dir.path().join("parsed.csv");
    let eval = dir.path().join("eval.json");
    ok(llmparser(&["sample", "--dataset", s(&data), "--shots", "40", "--out", s(&shots)]));
    ok(llmparser(&["parse", "--dataset", s(&data), "--out", s(&parsed), "--mock", "echo-truth"]));
    ok(llmparser(&["eval", "--dataset", s(&data), "--parsed", s(&parsed), "--shots-file", s(&shots), "--out", s(&eval)]));
    let text = fs::read_to_string(&eval).unwrap();
    assert!(!text.contains("pa_unseen"), "{text}");
    let r = report(&eval);
    assert_eq!(r.n_excluded, Some(40));
    assert_eq!(r.pa_excl, None);
}

#[test]
fn spark_example_eval() {
    let dir = tempfile::tempdir().unwrap();
    let (pairs, parsed) = common::spark_example();
    let data = common::dataset_in(dir.path(), "Spark.csv", &pairs);
    let run = dir.path().join("run.csv");
    let mut w = csv::Writer::from_path(&run).unwrap();
    w.write_record(["index", "content", "parsed_template", "latency_ms", "attempts"]).unwrap();
    for (i, ((log, _), p)) in pairs.iter().zip(&parsed).enumerate() {
        w.write_record([&i.to_string(), log, p, "1.0", "1"]).unwrap();
    }
    w.flush().unwrap();
    let eval = dir.path().join("eval.json");
    ok(llmparser(&["eval", "--dataset", s(&data), "--parsed", s(&run), "--out", s(&eval)]));
    let r = report(&eval);
    assert!((r.ga - 4.0 / 7.0).abs() < 1e-12);
    assert!((r.pa - 3.0 / 7.0).abs() < 1e-12);
}

#[test]
fn misaligned_eval_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = common::dataset_in(dir.path(), "A.csv", &common::synthetic_pairs(30, 3, 1));
    let other = common::dataset_in(dir.path(), "B.csv", &common::synthetic_pairs(30, 3, 2));
    let parsed = dir.path().join("parsed.csv");
    ok(llmparser(&["parse", "--dataset", s(&data), "--out", s(&parsed), "--mock", "echo-truth"]));
    let eval = dir.path().join("eval.json");
    assert_eq!(code(&llmparser(&["eval", "--dataset", s(&other), "--parsed", s(&parsed), "--out", s(&eval)])), 2);
    assert!(!eval.exists());
}

#[test]
fn mostly_failing_parse_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = common::dataset_in(dir.path(), "A.csv", &common::synthetic_pairs(10, 2, 1));
    let parsed = dir.path().join("parsed.csv");
    let o = llmparser(&["parse", "--dataset", s(&data), "--out", s(&parsed), "--mock", "fixed-text", "--mock-text", "  "]);
    assert_eq!(code(&o), 3);
}

#[test]
fn corrupt_k_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = common::synthetic_pairs(200, 8, 5);
    let data = common::dataset_in(dir.path(), "Zoo.csv", &pairs);
    let parsed = dir.path().join("parsed.csv");
    let eval = dir.path().join("eval.json");
    ok(llmparser(&["parse", "--dataset", s(&data), "--out", s(&parsed), "--mock", "corrupt-k", "--mock-k", "2"]));
    ok(llmparser(&["eval", "--dataset", s(&data), "--parsed", s(&parsed), "--out", s(&eval)]));
    let mut chosen = Vec::new();
    for (_, t) in &pairs {
        if chosen.len() < 2 && t.contains("<*>") && !chosen.contains(t) {
            chosen.push(t.clone());
        }
    }
    let m = pairs.iter().filter(|(_, t)| chosen.contains(t)).count();
    assert_eq!(report(&eval).pa, (200 - m) as f64 / 200.0);
}

#[test]
fn icl_prompts_carry_demonstrations() {
    let dir = tempfile::tempdir().unwrap();
    let data = common::dataset_in(dir.path(), "Linux.csv", &common::synthetic_pairs(60, 5, 4));
    let shots = dir.path().join("shots.jsonl");
    let parsed = dir.path().join("parsed.csv");
    ok(llmparser(&["sample", "--dataset", s(&data), "--shots", "5", "--out", s(&shots)]));
    ok(llmparser(&[
        "parse", "--dataset", s(&data), "--out", s(&parsed), "--mock", "echo-truth", "--mode", "icl", "--icl-shots", "3",
        "--shots-file", s(&shots), "--prompt-style", "alpaca",
    ]));
    let m = manifest(&parsed);
    assert_eq!(m.config["icl_shots"], 3);
    assert_eq!(m.config["mode"], "icl");
    assert_eq!(m.config["settings"]["max_length"], 512);
    let too_many = llmparser(&[
        "parse", "--dataset", s(&data), "--out", s(&parsed), "--mock", "echo-truth", "--mode", "icl", "--icl-shots", "9",
        "--shots-file", s(&shots),
    ]);
    assert_eq!(code(&too_many), 2);
}

#[test]
fn report_schema_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut evals = Vec::new();
    for (name, seed) in [("Apache.csv", 1), ("HDFS.csv", 2)] {
        let data = common::dataset_in(dir.path(), name, &common::synthetic_pairs(20, 3, seed));
        let parsed = dir.path().join(format!("{name}.parsed.csv"));
        let eval = dir.path().join(format!("{name}.json"));
        ok(llmparser(&["parse", "--dataset", s(&data), "--out", s(&parsed), "--mock", "echo-truth"]));
        ok(llmparser(&["eval", "--dataset", s(&data), "--parsed", s(&parsed), "--out", s(&eval)]));
        evals.push(eval);
    }
    let o = llmparser(&["report", s(&evals[0]), "--compare", s(&evals[1])]);
    assert_eq!(code(&o), 2);
    let out = dir.path().join("table.txt");
    ok(llmparser(&["report", s(&evals[0]), s(&evals[1]), "--format", "text", "--out", s(&out)]));
    assert!(fs::read_to_string(&out).unwrap().contains("Average"));
    assert_eq!(manifest(&out).command, "report");
}

#[test]
fn parse_against_http_endpoint_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = common::synthetic_pairs(50, 4, 8);
    let data = common::dataset_in(dir.path(), "OpenSSH.csv", &pairs);
    let corpus = llmparser::dataset::load_dataset(&data, Default::default()).unwrap();
    let server = GenerationServer::spawn(Arc::new(MockBackend::echo_truth(&corpus)), "127.0.0.1:0").unwrap();
    let parsed = dir.path().join("parsed.csv");
    let eval = dir.path().join("eval.json");
    let o = Command::new(env!("CARGO_BIN_EXE_llmparser"))
        .args(["parse", "--dataset", s(&data), "--out", s(&parsed), "--endpoint", "http://127.0.0.1:9", "--parallelism", "4"])
        .env("LLMPARSER_ENDPOINT", server.url())
        .output()
        .unwrap();
    ok(o);
    assert_eq!(server.request_count(), 50);
    ok(llmparser(&["eval", "--dataset", s(&data), "--parsed", s(&parsed), "--out", s(&eval)]));
    assert_eq!(report(&eval).pa, 1.0);
}
