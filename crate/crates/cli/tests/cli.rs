use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn riuent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riuent"))
        .args(args)
        .env_remove("RIUENT_SEED")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn riu_ghz_gives_log_two() {
    let out = riuent(&["riu", "--state", "GHZ", "--q", "2", "--seed", "7", "--restarts", "4", "--steps", "4000"]);
    let v = json_stdout(&out);
    assert!((v["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-3);
    assert_eq!(v["seed"], 7);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed 7"));
}

#[test]
fn riu_accepts_infinite_order() {
    let v = json_stdout(&riuent(&["riu", "--state", "W", "--q", "inf", "--restarts", "4", "--steps", "4000"]));
    assert!((v["value"].as_f64().unwrap() + (4.0f64 / 9.0).ln()).abs() < 1e-3);
    assert_eq!(v["q"], "Infinity");
}

#[test]
fn symmetric_riu_for_dicke() {
    let v = json_stdout(&riuent(&["riu", "--state", "D(4,2)", "--q", "inf", "--symmetric"]));
    assert!((v["value"].as_f64().unwrap() + (3.0f64 / 8.0).ln()).abs() < 1e-6);
}

#[test]
fn moments_exact_prints_fraction() {
    let out = riuent(&["moments", "--k", "1", "--exact"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("8/55"));
    assert!((lines.next().unwrap().parse::<f64>().unwrap() - 8.0 / 55.0).abs() < 1e-15);
}

#[test]
fn moments_json_includes_beta_model() {
    let v = json_stdout(&riuent(&["moments", "--k", "2"]));
    assert_eq!(v["exact"], "128/3003");
    assert_eq!(v["beta_model"], "533/12573");
}

#[test]
fn catalog_lists_states() {
    let out = riuent(&["catalog"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["GHZ", "W", "HD", "L", "HS", "Phi4", "Psi1max"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing");
    }
    assert!(text.contains("[2, 2, 2, 2]"));
}

#[test]
fn catalog_export_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["GHZ", "W", "HS", "Phi1max", "Psi1max", "L"] {
        let path = dir.path().join(format!("{name}.json"));
        let p = path.to_str().unwrap();
        assert!(riuent(&["catalog", "--export", name, "--out", p]).status.success());
        let file = riu_core::StateFile::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
        let back = file.into_tensor(true).unwrap();
        let original = riu_core::catalog::named_state(name).unwrap();
        assert_eq!(back.dims(), original.dims());
        for (a, b) in back.coeffs().iter().zip(original.coeffs()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let v = json_stdout(&riuent(&["entropy", "--state-file", p, "--q", "1"]));
        let w = json_stdout(&riuent(&["entropy", "--state", name, "--q", "1"]));
        assert_eq!(v["value"], w["value"]);
    }
}

#[test]
fn invariants_on_named_states() {
    let v = json_stdout(&riuent(&["tangle", "--state", "GHZ"]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let v = json_stdout(&riuent(&["hyperdet", "--state", "HD"]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["invariant"], "T");
    let v = json_stdout(&riuent(&["schmidt-bound", "--state", "GHZ"]));
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn decompositions_emit_json() {
    let v = json_stdout(&riuent(&["hosvd", "--state", "W"]));
    assert_eq!(v["kmode_singular_values"].as_array().unwrap().len(), 3);
    assert_eq!(v["core"]["dims"], serde_json::json!([2, 2, 2]));
    let v = json_stdout(&riuent(&["parafac", "--state", "GHZ", "--rank", "2", "--seed", "3"]));
    assert!(v["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["weights"].as_array().unwrap().len(), 2);
    let v = json_stdout(&riuent(&["rank", "--state", "W", "--seed", "1"]));
    assert_eq!(v["rank"], 3);
}

#[test]
fn ensemble_rerun_with_seed_reproduces_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (run, threads) in [(0, "1"), (1, "2")] {
        let csv = dir.path().join(format!("hist{run}.csv"));
        let report = dir.path().join(format!("report{run}.json"));
        let out = riuent(&[
            "--threads",
            threads,
            "ensemble",
            "--n",
            "3",
            "--d",
            "2",
            "--stat",
            "tangle",
            "--samples",
            "2000",
            "--seed",
            "1",
            "--out",
            csv.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((fs::read(&csv).unwrap(), fs::read(&report).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("bin_left,bin_right,count,density"));
    let report: Value = serde_json::from_slice(&outputs[0].1).unwrap();
    assert_eq!(report["samples"], 2000);
    assert_eq!(report["seed"], 1);
}

#[test]
fn seed_comes_from_environment() {
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_riuent"))
            .args(["ensemble", "--n", "3", "--d", "2", "--stat", "lambda-max", "--samples", "50"])
            .env("RIUENT_SEED", seed)
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert!(run("11").contains("seed=11"));
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11"), run("12"));
}

#[test]
fn scaling_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scaling.csv");
    let out = riuent(&["scaling", "--dmin", "2", "--dmax", "3", "--samples", "5", "--seed", "2", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().next().unwrap().contains("lambda_lu"));
}

#[test]
fn table_writes_summary_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let out = riuent(&[
        "table", "--samples", "6", "--restarts", "2", "--steps", "200", "--seed", "4", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.starts_with("q,column,samples,mean"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"dims\": [2, 2], \"coeffs\": [[1, 0]]}").unwrap();
    let unnormalized = dir.path().join("unnormalized.json");
    fs::write(&unnormalized, "{\"dims\": [2], \"coeffs\": [[1, 0], [1, 0]]}").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["riu", "--state", "nope", "--q", "1"],
        vec!["riu", "--q", "1"],
        vec!["riu", "--state", "GHZ", "--state-file", "x.json", "--q", "1"],
        vec!["riu", "--state", "GHZ", "--q", "-1"],
        vec!["entropy", "--state-file", bad.to_str().unwrap(), "--q", "1"],
        vec!["entropy", "--state-file", unnormalized.to_str().unwrap(), "--q", "1"],
        vec!["entropy", "--state-file", "/nonexistent/state.json", "--q", "1"],
        vec!["tangle", "--state", "HD"],
        vec!["moments", "--k", "9"],
        vec!["ensemble", "--n", "4", "--d", "2", "--stat", "tangle", "--samples", "5"],
        vec!["ensemble", "--n", "3", "--d", "2", "--stat", "bogus"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = riuent(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
