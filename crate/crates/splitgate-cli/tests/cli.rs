//! Exit-code and envelope contract tests, one triplet per subcommand:
//! a success (0), a domain error (1), and a usage error (2).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitgate"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_exit(out: &Output, expected: i32, label: &str) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "{label}: stdout={} stderr={}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is one JSON document")
}

/// Tiny synthetic corpus plus plans, built once per fixture through the
/// binary itself so every file has the shipped shape.
struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let fixture = Fixture {
            dir: TempDir::new().expect("tempdir"),
        };
        let out = fixture.run(&[
            "synth",
            "--volumes-per-class",
            "3",
            "--slices-per-volume",
            "4",
            "--width",
            "32",
            "--height",
            "32",
            "--seed",
            "9",
            "--out-dir",
            "corpus",
            "--out",
            "synth.json",
        ]);
        assert_exit(&out, 0, "fixture synth");
        fixture
    }

    fn run(&self, args: &[&str]) -> Output {
        run_in(self.dir.path(), args)
    }

    fn manifest(&self) -> &'static str {
        "corpus/manifest.jsonl"
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn make_plan(&self, name: &str, strategy: &str) -> String {
        let mut args = vec![
            "split",
            "--manifest",
            self.manifest(),
            "--strategy",
            strategy,
            "--test-per-class",
            "4",
            "--seed",
            "2",
            "--out",
        ];
        args.push(name);
        if strategy == "per-group" {
            args.extend_from_slice(&["--group-key", "volume"]);
        }
        let out = self.run(&args);
        assert_exit(&out, 0, "fixture split");
        name.to_string()
    }
}

#[test]
fn scan_exit_codes() {
    let fx = Fixture::new();
    let ok = fx.run(&[
        "scan",
        "--root",
        "corpus",
        "--layout",
        "flat",
        "--pattern",
        "{class}-{subject}-{slice}",
        "--class-from",
        "filename",
        "--subject-from",
        "filename",
        "--extensions",
        "pgm",
        "--out",
        "scan.jsonl",
    ]);
    assert_exit(&ok, 0, "scan ok");
    let doc = stdout_json(&ok);
    assert_eq!(doc["subcommand"], "scan");
    assert_eq!(doc["result"]["records"], 24);

    let missing = fx.run(&[
        "scan",
        "--root",
        "no-such-dir",
        "--layout",
        "class-subject",
        "--out",
        "x.jsonl",
    ]);
    assert_exit(&missing, 1, "scan missing root");
    assert!(stderr_json(&missing)["code"].is_string());

    let usage = fx.run(&["scan", "--root", "corpus"]);
    assert_exit(&usage, 2, "scan without --out");
}

#[test]
fn audit_overlap_exit_codes() {
    let fx = Fixture::new();
    let plan = fx.make_plan("plan.json", "per-group");
    let ok = fx.run(&[
        "audit-overlap",
        "--manifest",
        fx.manifest(),
        "--plan",
        &plan,
        "--group-key",
        "volume",
    ]);
    assert_exit(&ok, 0, "audit-overlap ok");
    assert_eq!(stdout_json(&ok)["result"]["fraction"], 0.0);

    let missing = fx.run(&[
        "audit-overlap",
        "--manifest",
        fx.manifest(),
        "--plan",
        "nope.json",
        "--group-key",
        "volume",
    ]);
    assert_exit(&missing, 1, "audit-overlap missing plan");

    let usage = fx.run(&[
        "audit-overlap",
        "--manifest",
        fx.manifest(),
        "--plan",
        &plan,
        "--use-presplit",
        "--group-key",
        "volume",
    ]);
    assert_exit(&usage, 2, "audit-overlap conflicting side sources");
}

#[test]
fn audit_overlap_fail_above_flags_leaky_plan() {
    let fx = Fixture::new();
    let plan = fx.make_plan("leaky.json", "per-image");
    let out = fx.run(&[
        "audit-overlap",
        "--manifest",
        fx.manifest(),
        "--plan",
        &plan,
        "--group-key",
        "volume",
        "--fail-above",
        "0.0",
        "--out",
        "audit.json",
    ]);
    assert_exit(&out, 1, "fail-above on a leaking plan");
    let err = stderr_json(&out);
    assert_eq!(err["code"], "overlap_above_threshold");
    assert!(err["context"]["fraction"].as_f64().unwrap() > 0.0);
    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(fx.path("audit.json")).unwrap()).unwrap();
    assert!(written["result"]["fraction"].as_f64().unwrap() > 0.0);
}

#[test]
fn audit_dups_exit_codes() {
    let fx = Fixture::new();
    let plan = fx.make_plan("plan.json", "per-group");
    let ok = fx.run(&[
        "audit-dups",
        "--manifest",
        fx.manifest(),
        "--plan",
        &plan,
    ]);
    assert_exit(&ok, 0, "audit-dups ok");
    let doc = stdout_json(&ok);
    assert!(doc["result"]["summary"]["train_images"].as_u64().unwrap() > 0);

    let bad_root = fx.run(&[
        "audit-dups",
        "--manifest",
        fx.manifest(),
        "--plan",
        &plan,
        "--root",
        "no-such-dir",
    ]);
    assert_exit(&bad_root, 1, "audit-dups unreadable images");

    let usage = fx.run(&["audit-dups", "--plan", &plan]);
    assert_exit(&usage, 2, "audit-dups without --manifest");
}

#[test]
fn split_exit_codes() {
    let fx = Fixture::new();
    let ok = fx.run(&[
        "split",
        "--manifest",
        fx.manifest(),
        "--strategy",
        "per-group",
        "--group-key",
        "volume",
        "--test-per-class",
        "4",
        "--seed",
        "2",
    ]);
    assert_exit(&ok, 0, "split ok");
    let doc = stdout_json(&ok);
    assert_eq!(doc["result"]["audit"]["fraction"], 0.0);

    let too_many = fx.run(&[
        "split",
        "--manifest",
        fx.manifest(),
        "--strategy",
        "per-image",
        "--test-per-class",
        "1000",
        "--seed",
        "2",
    ]);
    assert_exit(&too_many, 1, "split demanding too many test images");

    let usage = fx.run(&[
        "split",
        "--manifest",
        fx.manifest(),
        "--strategy",
        "per-image",
        "--test-per-class",
        "4",
    ]);
    assert_exit(&usage, 2, "split without --seed");
}

#[test]
fn cv_plan_exit_codes() {
    let fx = Fixture::new();
    let ok = fx.run(&[
        "cv-plan",
        "--manifest",
        fx.manifest(),
        "--strategy",
        "per-group",
        "--group-key",
        "volume",
        "--folds",
        "3",
        "--seed",
        "4",
    ]);
    assert_exit(&ok, 0, "cv-plan ok");
    assert_eq!(stdout_json(&ok)["result"]["folds"], 3);

    let too_many = fx.run(&[
        "cv-plan",
        "--manifest",
        fx.manifest(),
        "--strategy",
        "per-group",
        "--group-key",
        "volume",
        "--folds",
        "50",
        "--seed",
        "4",
    ]);
    assert_exit(&too_many, 1, "cv-plan with more folds than groups");

    let usage = fx.run(&[
        "cv-plan",
        "--manifest",
        fx.manifest(),
        "--strategy",
        "per-image",
        "--seed",
        "4",
    ]);
    assert_exit(&usage, 2, "cv-plan without --folds");
}

#[test]
fn evaluate_exit_codes() {
    let fx = Fixture::new();
    std::fs::write(
        fx.path("preds.csv"),
        "image_id,true_label,pred_label\na,0,0\nb,0,1\nc,1,1\n",
    )
    .unwrap();
    let ok = fx.run(&["evaluate", "--predictions", "preds.csv"]);
    assert_exit(&ok, 0, "evaluate ok");
    assert!(stdout_json(&ok)["result"]["metrics"]["mcc"].is_number());

    std::fs::write(fx.path("bad.csv"), "image_id,true_label,pred_label\na,zero,0\n").unwrap();
    let malformed = fx.run(&["evaluate", "--predictions", "bad.csv"]);
    assert_exit(&malformed, 1, "evaluate malformed label");

    let usage = fx.run(&["evaluate"]);
    assert_exit(&usage, 2, "evaluate without --predictions");
}

#[test]
fn null_test_exit_codes() {
    let fx = Fixture::new();
    let ok = fx.run(&[
        "null-test",
        "--n-test",
        "50",
        "--classes",
        "2",
        "--iters",
        "20",
        "--seed",
        "1",
    ]);
    assert_exit(&ok, 0, "null-test ok");
    let doc = stdout_json(&ok);
    assert_eq!(doc["result"]["samples"].as_array().unwrap().len(), 20);

    let bad = fx.run(&[
        "null-test",
        "--n-test",
        "50",
        "--classes",
        "1",
        "--iters",
        "20",
        "--seed",
        "1",
    ]);
    assert_exit(&bad, 1, "null-test with one class");

    let usage = fx.run(&["null-test", "--n-test", "50", "--classes", "2"]);
    assert_exit(&usage, 2, "null-test without --seed");
}

#[test]
fn probe_exit_codes() {
    let fx = Fixture::new();
    let ok = fx.run(&[
        "probe",
        "--observed",
        "0.5",
        "--n-test",
        "100",
        "--classes",
        "2",
        "--iters",
        "200",
        "--seed",
        "3",
    ]);
    assert_exit(&ok, 0, "probe ok");
    let doc = stdout_json(&ok);
    assert_eq!(doc["result"]["probe"]["flagged"], true);

    let no_observation = fx.run(&[
        "probe",
        "--n-test",
        "100",
        "--classes",
        "2",
        "--iters",
        "200",
        "--seed",
        "3",
    ]);
    assert_exit(&no_observation, 1, "probe without an observation");

    let usage = fx.run(&["probe", "--observed", "0.5", "--mode", "sideways"]);
    assert_exit(&usage, 2, "probe with a bad --mode");
}

#[test]
fn synth_exit_codes() {
    let fx = Fixture::new();
    let ok = fx.run(&[
        "synth",
        "--volumes-per-class",
        "2",
        "--slices-per-volume",
        "2",
        "--width",
        "16",
        "--height",
        "16",
        "--seed",
        "5",
        "--out-dir",
        "tiny",
    ]);
    assert_exit(&ok, 0, "synth ok");
    assert!(fx.path("tiny/manifest.jsonl").exists());

    let bad = fx.run(&[
        "synth",
        "--k-classes",
        "1",
        "--seed",
        "5",
        "--out-dir",
        "bad",
    ]);
    assert_exit(&bad, 1, "synth with one class");

    let usage = fx.run(&["synth", "--out-dir", "x"]);
    assert_exit(&usage, 2, "synth without --seed");
}

#[test]
fn experiment_exit_codes() {
    let fx = Fixture::new();
    let ok = fx.run(&[
        "experiment",
        "--volumes-per-class",
        "3",
        "--slices-per-volume",
        "3",
        "--width",
        "16",
        "--height",
        "16",
        "--folds",
        "2",
        "--repeats",
        "1",
        "--knn-k",
        "3",
        "--seed",
        "6",
        "--out",
        "exp.json",
    ]);
    assert_exit(&ok, 0, "experiment ok");
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(fx.path("exp.json")).unwrap()).unwrap();
    assert_eq!(doc["result"]["mcc_per_image"].as_array().unwrap().len(), 2);

    let too_few = fx.run(&[
        "experiment",
        "--volumes-per-class",
        "1",
        "--slices-per-volume",
        "3",
        "--width",
        "16",
        "--height",
        "16",
        "--folds",
        "2",
        "--seed",
        "6",
    ]);
    assert_exit(&too_few, 1, "experiment with one volume per class");

    let usage = fx.run(&["experiment", "--folds", "2"]);
    assert_exit(&usage, 2, "experiment without --seed");
}

#[test]
fn report_exit_codes() {
    let fx = Fixture::new();
    let plan = fx.make_plan("plan.json", "per-group");
    let ok = fx.run(&["report", &plan]);
    assert_exit(&ok, 0, "report ok");
    assert!(String::from_utf8_lossy(&ok.stdout).contains("split plan"));

    let missing = fx.run(&["report", "nope.json"]);
    assert_exit(&missing, 1, "report on a missing file");

    let usage = fx.run(&["report"]);
    assert_exit(&usage, 2, "report without a file");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let fx = Fixture::new();
    let out = fx.run(&["frobnicate"]);
    assert_exit(&out, 2, "unknown subcommand");
}

#[test]
fn envelopes_embed_reproduction_info() {
    let fx = Fixture::new();
    let out = fx.run(&[
        "split",
        "--manifest",
        fx.manifest(),
        "--strategy",
        "per-group",
        "--group-key",
        "volume",
        "--test-per-class",
        "4",
        "--seed",
        "42",
    ]);
    assert_exit(&out, 0, "split for envelope check");
    let doc = stdout_json(&out);
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["subcommand"], "split");
    assert_eq!(doc["flags"]["seed"], 42);
    assert_eq!(doc["flags"]["strategy"], "per-group");
    assert_eq!(doc["result"]["plan"]["seed"], 42);
}

#[test]
fn domain_errors_are_structured_json() {
    let fx = Fixture::new();
    let out = fx.run(&[
        "split",
        "--manifest",
        "missing.jsonl",
        "--strategy",
        "per-image",
        "--test-per-class",
        "4",
        "--seed",
        "1",
    ]);
    assert_exit(&out, 1, "split on a missing manifest");
    let err = stderr_json(&out);
    assert!(err["code"].is_string());
    assert!(err["message"].is_string());
    assert!(err["context"].is_object());
}
