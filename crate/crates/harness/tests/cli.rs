use std::fs;
use std::process::Command;

use mcm_harness::output::CSV_HEADER;
use mcm_harness::ExperimentConfig;

fn mcm(threads: &str, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mcm"))
        .args(args)
        .env("MCM_THREADS", threads)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn mcm")
}

#[test]
fn experiment_csv_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("oa.json");
    fs::write(&config, r#"{"experiment": "oa_sweep", "n_min": 2, "n_max": 4, "shots": 2000, "seed": 9, "a_values": [0.0, 0.5]}"#)
        .unwrap();
    let mut outputs = vec![];
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("rows-{threads}.csv"));
        let res = mcm(threads, &["experiment", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        outputs.push(fs::read_to_string(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let mut lines = outputs[0].lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 6);
}

#[test]
fn estimate_reports_json() {
    let res = mcm("2", &["estimate", "--protocol", "biased", "--state", "ghz", "--obs", "ghz", "--n", "3", "--shots", "500"]);
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!((v["mean"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["shots"], 500);
}

#[test]
fn pauli_file_observable() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("obs.txt");
    fs::write(&file, "# two terms\n0.5 ZZI\n-0.25 XIX\n").unwrap();
    let res = mcm("1", &["estimate", "--protocol", "biased", "--state", "zero", "--obs-pauli-file", file.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["n"], 3);
    assert!((v["mean"].as_f64().unwrap() - 0.5).abs() < 0.1);
}

#[test]
fn oracle_subcommand_passes() {
    let res = mcm("2", &["oracle", "--suite", "mub,partition", "--max-n", "3"]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn bad_inputs_fail_cleanly() {
    assert!(!mcm("0", &["oracle"]).status.success());
    assert!(!mcm("1", &["estimate", "--obs", "ghz"]).status.success());
    assert!(!mcm("1", &["synth", "--n", "2", "--index", "99"]).status.success());
}

#[test]
fn config_round_trips_through_json() {
    let cfg = ExperimentConfig::from_json(r#"{"experiment": "local_observable", "k_values": [1, 3]}"#).unwrap();
    let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, back);
}
