use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn reptile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reptile"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    fs::write(dir.join("mask.json"), r#"{ "bw_u": 0.50, "bw_v": 0.76, "default_level_db": -25.0 }"#).unwrap();
    let config = format!(
        r#"{{
  "grid": {{ "rows": 8, "cols": 12 }},
  "max_order": 2,
  "q_max": 14,
  "mask": "mask.json",
  "reference": {{ "kind": "raised_cosine", "pedestal": 0.3, "exponent": 2.0 }},
  "resolution": 121,
  "snapshot_q": [8, 11]{extra}
}}"#
    );
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn count_prints_exact_and_scientific() {
    let out = reptile(&["count", "4", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["18", "1.80e1"]);
}

#[test]
fn tileability_exit_codes() {
    let out = reptile(&["tileability", "12", "20", "3"]);
    assert_eq!(out.status.code(), Some(3));
    let v = stdout_json(&out);
    assert_eq!(v["reason"], "ThreeByOdd");
    assert_eq!(v["tileable"], false);

    let out = reptile(&["tileability", "8", "12", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["reason"], "DivisibleCase");

    let out = reptile(&["tileability", "3", "8", "1"]);
    assert_eq!(stdout_json(&out)["reason"], "ThreeByEven");

    let out = reptile(&["tileability", "8", "8", "3", "--family", "square"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn enumerate_composition_and_truncation() {
    let out = reptile(&["--workers", "1", "enumerate", "8", "12", "--orders", "1,2", "--composition", "2:6,1:8"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["solutions"], 6248);

    let out = reptile(&["enumerate", "8", "12", "--orders", "1,2", "--max-solutions", "10"]);
    assert_eq!(out.status.code(), Some(4));
    let v = stdout_json(&out);
    assert_eq!(v["solutions"], 10);
    assert_eq!(v["truncated"], true);
}

#[test]
fn enumerate_dump_lists_every_tiling() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("tilings.txt");
    let out = reptile(&["enumerate", "4", "6", "--dump", dump.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().count(), 18);
    assert!(text.lines().all(|l| l.split(' ').count() == 8));

    let out = reptile(&["enumerate", "4", "6", "--dump", dump.to_str().unwrap(), "--dump-limit", "100"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(fs::metadata(&dump).unwrap().len() <= 100);
}

#[test]
fn synthesize_reaches_fourteen_clusters_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = reptile(&["synthesize", "--config", &config, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (stdout_json(&out), out_dir)
    };
    let (summary, a) = run("a");
    assert_eq!(summary["H"], 2);
    assert_eq!(summary["Q"], 14);
    assert_eq!(summary["q_sequence"], serde_json::json!([8, 11, 14]));
    for f in ["trace.json", "pareto.csv", "clustering_final.csv", "clustering_q8.csv", "clustering_q11.csv", "excitations.csv", "pattern.csv", "cut_u.csv", "cut_v.csv", "metrics.json"] {
        assert!(a.join(f).exists(), "{f} missing");
    }

    let (_, b) = run("b");
    for f in ["trace.json", "clustering_final.csv", "excitations.csv", "pareto.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn evaluate_reproduces_synthesized_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let synth = dir.path().join("synth");
    let out = reptile(&["synthesize", "--config", &config, "--out", synth.to_str().unwrap()]);
    assert!(out.status.success());
    let gamma = stdout_json(&out)["gamma"].as_f64().unwrap();

    let eval = dir.path().join("eval");
    let out = reptile(&[
        "evaluate",
        "--config",
        &config,
        "--clustering",
        synth.join("clustering_final.csv").to_str().unwrap(),
        "--excitations",
        synth.join("excitations.csv").to_str().unwrap(),
        "--out",
        eval.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["Q"], 14);
    let m = &v["metrics"];
    assert!((m["gamma"].as_f64().unwrap() - gamma).abs() <= 1e-12 * gamma.max(1.0));
    for key in ["sll_db", "directivity_db", "hpbw_az_deg", "hpbw_el_deg"] {
        assert!(m[key].is_f64(), "{key} missing");
    }
}

#[test]
fn scan_writes_map() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#", "scan": { "theta_max_deg": 6.0, "theta_steps": 2, "phi_steps": 3 }"#);
    let out_dir = dir.path().join("scan");
    let out = reptile(&["scan", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let map = fs::read_to_string(out_dir.join("scan_map.csv")).unwrap();
    assert_eq!(map.lines().count(), 1 + 6);
    assert!(stdout_json(&out)["summary"]["max_sll_db"].is_f64());
}

#[test]
fn config_errors_exit_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#", "bogus": 1"#);
    let out = reptile(&["synthesize", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("bogus"));

    let out = reptile(&["scan", "--config", &write_config(dir.path(), "")]);
    assert_eq!(out.status.code(), Some(2));
}
