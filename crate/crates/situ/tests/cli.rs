use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn situ(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_situ"))
        .args(args)
        .env_remove("SITU_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = situ(args);
    assert!(
        out.status.success(),
        "situ {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

/// 50 synthetic situations and the questions generated from them.
fn small_run() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-small");
        let _ = std::fs::remove_dir_all(&dir);
        let sits = dir.join("situations.json");
        ok(&["synth", "--count", "50", "--seed", "7", "--out", s(&sits)]);
        ok(&["generate", "--seed", "7", "--in", s(&sits), "--out", s(&dir.join("gen"))]);
        dir
    })
}

#[test]
fn generate_covers_every_question_type() {
    let dir = small_run();
    let items = read(&dir.join("gen/qa.json"));
    let items = items.as_array().unwrap();
    for q in ["interaction", "sequence", "prediction", "feasibility"] {
        let n = items.iter().filter(|i| i["qtype"] == q).count();
        assert!(n > 0, "no {q} items");
    }
    for i in items {
        let options = i["options"].as_array().unwrap();
        assert_eq!(options.len(), 4);
        assert!(i["correct_index"].as_u64().unwrap() < 4);
    }
}

#[test]
fn validate_accepts_clean_output() {
    let out = ok(&["validate", "--in", s(&small_run().join("gen"))]);
    assert_eq!(out.trim(), "ok");
}

#[test]
fn validate_reports_corrupted_answer() {
    let src = small_run().join("gen");
    let dir = tempfile::tempdir().unwrap();
    for f in ["qa.json", "ground_truth.json", "shipped.json"] {
        std::fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    let mut items = read(&dir.path().join("qa.json"));
    let first = &mut items[0];
    let id = first["id"].as_str().unwrap().to_string();
    let wrong = (first["correct_index"].as_u64().unwrap() + 1) % 4;
    first["correct_index"] = wrong.into();
    std::fs::write(dir.path().join("qa.json"), serde_json::to_vec(&items).unwrap()).unwrap();

    let out = situ(&["validate", "--in", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error[invalid]:"), "{stderr}");
    assert!(stderr.contains(&id), "{stderr}");
}

#[test]
fn missing_input_is_a_usage_error() {
    let out = situ(&["validate"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error[usage]:"), "{stderr}");
    assert_eq!(stderr.lines().count(), 1);
}

#[test]
fn missing_template_file_fails_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let out = situ(&[
        "generate",
        "--templates",
        "/nonexistent/templates.json",
        "--in",
        s(&small_run().join("situations.json")),
        "--out",
        s(&dir.path().join("gen")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error[usage]:"), "{stderr}");
    assert!(stderr.contains("templates.json"), "{stderr}");
    assert!(!dir.path().join("gen").exists());
}

#[test]
fn unknown_flag_exits_with_usage_code() {
    let out = situ(&["generate", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[usage]:"));
}

#[test]
fn malformed_situations_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[{\"id\": 3}").unwrap();
    let out = situ(&["generate", "--in", s(&bad), "--out", s(&dir.path().join("gen"))]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error[parse]:") && stderr.contains("bad.json"), "{stderr}");
}

#[test]
fn split_partitions_by_situation() {
    let dir = tempfile::tempdir().unwrap();
    let sits = dir.path().join("situations.json");
    ok(&["synth", "--count", "800", "--out", s(&sits)]);
    ok(&["generate", "--in", s(&sits), "--out", s(&dir.path().join("gen"))]);
    let split = dir.path().join("split.json");
    let out = ok(&[
        "split",
        "--ratios",
        "6,1,1",
        "--in",
        s(&dir.path().join("gen/qa.json")),
        "--out",
        s(&split),
    ]);
    let counts: Vec<u64> = out
        .lines()
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts, [600, 100, 100], "{out}");

    let items = read(&split);
    let mut owner = std::collections::BTreeMap::new();
    for i in items.as_array().unwrap() {
        let base = i["situation_id"].as_str().unwrap().split('@').next().unwrap().to_string();
        let split = i["split"].as_str().unwrap().to_string();
        assert_eq!(owner.entry(base).or_insert_with(|| split.clone()), &split);
    }
}

#[test]
fn random_baseline_is_near_a_quarter() {
    let report = small_run().join("random.json");
    ok(&[
        "eval",
        "--baseline",
        "random",
        "--in",
        s(&small_run().join("gen/qa.json")),
        "--out",
        s(&report),
    ]);
    let acc = read(&report)["overall"]["accuracy"].as_f64().unwrap();
    assert!((acc - 0.25).abs() < 0.04, "{acc}");
}

#[test]
fn executor_baseline_is_exact_on_ground_truth() {
    let report = small_run().join("executor.json");
    ok(&[
        "eval",
        "--baseline",
        "executor",
        "--in",
        s(&small_run().join("gen/qa.json")),
        "--out",
        s(&report),
    ]);
    assert_eq!(read(&report)["overall"]["accuracy"].as_f64(), Some(1.0));
}

#[test]
fn predictions_file_is_scored() {
    let items = read(&small_run().join("gen/qa.json"));
    let preds: Vec<Value> = items
        .as_array()
        .unwrap()
        .iter()
        .map(|i| serde_json::json!({"id": i["id"], "choice": i["correct_index"]}))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("preds.json");
    std::fs::write(&path, serde_json::to_vec(&preds).unwrap()).unwrap();
    let report = dir.path().join("report.json");
    ok(&[
        "eval",
        "--predictions",
        s(&path),
        "--in",
        s(&small_run().join("gen/qa.json")),
        "--out",
        s(&report),
    ]);
    assert_eq!(read(&report)["overall"]["accuracy"].as_f64(), Some(1.0));
}

#[test]
fn debias_lowers_flow_share() {
    let dir = small_run();
    let before = dir.join("stats-before.json");
    let after = dir.join("stats-after.json");
    let balanced = dir.join("balanced.json");
    ok(&["stats", "--in", s(&dir.join("gen/qa.json")), "--out", s(&before)]);
    ok(&["debias", "--in", s(&dir.join("gen/qa.json")), "--out", s(&balanced)]);
    ok(&["stats", "--in", s(&balanced), "--out", s(&after)]);
    let (before, after) = (read(&before), read(&after));
    assert!(after["max_flow_share"].as_f64() < before["max_flow_share"].as_f64());
    for g in after["groups"].as_array().unwrap() {
        assert!(g["max_deviation"].as_f64().unwrap() <= 0.05, "{g}");
    }
}

#[test]
fn seed_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, args: &[&str], env: Option<&str>| {
        let path = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_situ"));
        cmd.args(["synth", "--count", "5", "--out", s(&path)]).args(args);
        match env {
            Some(v) => cmd.env("SITU_SEED", v),
            None => cmd.env_remove("SITU_SEED"),
        };
        assert!(cmd.output().unwrap().status.success());
        std::fs::read(path).unwrap()
    };
    let flag = run("flag.json", &["--seed", "11"], Some("99"));
    let plain = run("plain.json", &["--seed", "11"], None);
    let env = run("env.json", &[], Some("99"));
    assert_eq!(flag, plain);
    assert_ne!(flag, env);
}

#[test]
fn degrade_eval_without_noise_is_exact() {
    let out = ok(&[
        "degrade-eval",
        "--seeds",
        "2",
        "--in",
        s(&small_run().join("gen/qa.json")),
    ]);
    assert!(out.contains("100.00%"), "{out}");
}
