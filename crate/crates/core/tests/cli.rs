use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mvsmooth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvsmooth")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mvsmooth(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_spec(dir: &Path, n: usize) -> String {
    let path = dir.join("spec.json");
    let spec = format!(
        r#"{{"n": {n}, "v": 2, "g": 3, "d": 5, "separation": 6.0, "p_in": 0.15, "p_out": 0.01, "seed": 4}}"#
    );
    fs::write(&path, spec).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn synth_then_run() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 120);
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    ok(&["synth", "--spec", &spec, "--out", data.to_str().unwrap()]);
    for f in ["manifest.json", "view_0.csv", "view_1.csv", "graph_0.mtx", "graph_1.mtx", "labels.csv"] {
        assert!(data.join(f).exists(), "{f}");
    }
    let stdout = ok(&[
        "run", "--data", data.to_str().unwrap(), "--anchors", "20", "--alpha", "1", "--export-embedding", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("ACC") || stdout.contains("acc"), "{stdout}");
    let labels = fs::read_to_string(out.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 120);
    let metrics: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["acc"].as_f64().unwrap() > 0.9);
    assert!(out.join("report.json").exists());
    assert!(out.join("embedding.csv").exists());
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 90);
    let config = tmp.path().join("config.json");
    fs::write(&config, r#"{"anchors": 15, "alpha": 2.0, "k": 1}"#).unwrap();
    let out = tmp.path().join("out");
    ok(&[
        "run", "--synth", &spec, "--config", config.to_str().unwrap(), "--k", "3", "--out", out.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["k"], 3);
    assert_eq!(report["config"]["anchors"], 15);
    assert_eq!(report["config"]["alpha"], 2.0);
}

#[test]
fn sweep_and_bench_write_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), 90);
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    ok(&["sweep", "--synth", &spec, "--anchors", "15", "--grid-k", "0,2", "--grid-mu", "0.2,0.5", "--out", o]);
    let mut reader = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    assert!(reader.headers().unwrap().iter().any(|h| h == "acc"));
    assert_eq!(reader.records().count(), 4);

    ok(&["bench", "--synth", &spec, "--anchors", "15", "--sizes", "100,200", "--repeats", "1", "--out", o]);
    let mut reader = csv::Reader::from_path(out.join("bench.csv")).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["n", "nnz", "seconds"]);
    assert_eq!(reader.records().count(), 2);
}

#[test]
fn failures_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mvsmooth(&["run", "--data", tmp.path().join("missing").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let spec = write_spec(tmp.path(), 60);
    let out = mvsmooth(&["sweep", "--synth", &spec, "--out", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no sweep parameters"));

    assert!(!mvsmooth(&["run", "--synth", &spec, "--mu", "-1"]).status.success());
    assert!(!mvsmooth(&["bench", "--sizes", "100"]).status.success());
}
