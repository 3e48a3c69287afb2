use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .env_remove("QWALK_THREADS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn walk_z2_z2_second_moment_is_three() {
    let out = qwalk(&["walk", "--x", "Z2", "--y", "Z2", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["agree"], true);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["numerator"], 3);
        assert_eq!(r["denominator"], 1);
        assert_eq!(r["value"], 3.0);
    }
}

#[test]
fn spectral_moment_matches_exact_count() {
    let out = qwalk(&[
        "moments", "--x", "Z2", "--y", "Z2", "--q", "random", "--seed", "7", "--p", "2", "--method", "spectral",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value = json_of(&out)["results"][0]["value"].as_f64().unwrap();
    assert!((value - 3.0).abs() < 1e-6);
}

#[test]
fn asympt_csv_approaches_catalan() {
    let out = qwalk(&[
        "asympt", "--alpha", "1", "--beta", "1", "--k", "2:6", "--p", "3", "--csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let gaps: Vec<f64> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[col("narayana_scaled")].parse::<f64>().unwrap(), 5.0);
            (f[col("scaled")].parse::<f64>().unwrap() - 5.0).abs()
        })
        .collect();
    assert_eq!(gaps.len(), 5);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn csv_moments_have_documented_columns() {
    let out = qwalk(&[
        "mc",
        "--m",
        "2",
        "--n",
        "3",
        "--p",
        "1:2",
        "--samples",
        "500",
        "--seed",
        "3",
        "--csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("p,method,value,uncertainty,seed,time_ms\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn invalid_arguments_exit_two() {
    assert_eq!(
        qwalk(&["walk", "--x", "Zq", "--y", "Z2", "--p", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qwalk(&["walk", "--x", "Z2", "--y", "Z2", "--p", "3:1"]).status.code(),
        Some(2)
    );
    assert_eq!(qwalk(&["walk", "--nonsense"]).status.code(), Some(2));
    assert_eq!(
        qwalk(&["moments", "--x", "Z2", "--p", "1", "--method", "tensor-formula"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn resource_cap_exits_three() {
    let out = qwalk(&["walk", "--x", "Z9", "--y", "Z9", "--p", "9"]);
    assert_eq!(out.status.code(), Some(3));
    let out = qwalk(&["moments", "--x", "Z2", "--y", "Z3", "--p", "4", "--max-rows", "100"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn model_checks_pass_and_dump_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("model.json");
    let out = qwalk(&[
        "model",
        "--x",
        "Z2",
        "--y",
        "Z3",
        "--seed",
        "4",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["index_size"], 6);
    let dumped: Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(dumped["index_size"], 6);
}

#[test]
fn mutated_theta_fails_verification() {
    let out = qwalk(&["verify", "--level", "quick", "--mutate-theta"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["pass"], false);
    let failures: Vec<&str> = v["failures"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert!(failures.iter().any(|f| f.contains("representation")), "{failures:?}");
    assert!(failures.iter().any(|f| f.contains("faithfulness")), "{failures:?}");
}

fn record(dir: &Path, args: &[&str]) -> Value {
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", dir.to_str().unwrap()]);
    let out = qwalk(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["manifest.json", "result.json"] {
        assert!(dir.join(name).exists(), "{name} missing");
    }
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn manifests_replay_exact_and_seeded_runs() {
    let root = tempfile::tempdir().unwrap();
    let exact = root.path().join("walk");
    let manifest = record(&exact, &["walk", "--x", "Z2", "--y", "Z3", "--p", "1:3"]);
    assert_eq!(manifest["command"], "walk");
    assert_eq!(manifest["exit_code"], 0);
    assert!(manifest["versions"]["qwalk-core"].is_string());

    let seeded = root.path().join("mc");
    let manifest = record(
        &seeded,
        &[
            "mc",
            "--m",
            "2",
            "--n",
            "2",
            "--p",
            "2",
            "--samples",
            "3000",
            "--seed",
            "11",
        ],
    );
    assert_eq!(manifest["seeds"][0], 11);

    for dir in [&exact, &seeded] {
        let out = qwalk(&["replay", "--manifest", dir.join("manifest.json").to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(json_of(&out)["matches"], true);
    }
}

#[test]
fn replay_detects_tampered_results() {
    let dir = tempfile::tempdir().unwrap();
    record(dir.path(), &["walk", "--x", "Z2", "--y", "Z2", "--p", "2"]);
    let path = dir.path().join("result.json");
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replacen("\"numerator\": 3", "\"numerator\": 4", 1);
    std::fs::write(&path, text).unwrap();
    let out = qwalk(&[
        "replay",
        "--manifest",
        dir.path().join("manifest.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["matches"], false);
}

#[test]
fn thread_count_does_not_change_monte_carlo() {
    let run = |threads: &str| {
        let out = qwalk(&[
            "--threads",
            threads,
            "mc",
            "--m",
            "3",
            "--n",
            "2",
            "--p",
            "3",
            "--samples",
            "2000",
        ]);
        json_of(&out)["results"][0]["value"].as_f64().unwrap()
    };
    assert_eq!(run("1").to_bits(), run("3").to_bits());
}
