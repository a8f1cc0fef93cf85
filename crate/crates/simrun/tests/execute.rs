use std::fs;
use std::path::Path;
use std::process::Command;

use eraser_sim::protocols::{ObservationSchedule, OutcomeHypothesis, SwitchStage, SwitchStrategy};
use eraser_sim::{optimal_interval_set, OpticsConfig, ProtocolConfig, ProtocolKind};
use serde_json::Value;
use simrun::{execute_manifest, serialize_manifest, RunEntry, RunManifest, SUMMARY_FILE};

fn refused_switch_run() -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(ProtocolKind::SwitchParadox).with_pairs(1000);
    cfg.switch_stage = SwitchStage::D;
    cfg.observation_schedule = ObservationSchedule::AtT0;
    cfg.outcome_hypothesis = Some(OutcomeHypothesis::I);
    cfg.strategy = Some(SwitchStrategy::Strategy1 {
        interval_set: optimal_interval_set(&OpticsConfig::default()).unwrap(),
    });
    cfg
}

fn manifest(dir: &Path) -> RunManifest {
    let mut m = RunManifest::new(vec![
        RunEntry {
            name: "ds".into(),
            config: ProtocolConfig::new(ProtocolKind::DoubleSlit).with_pairs(2000),
        },
        RunEntry {
            name: "refused".into(),
            config: refused_switch_run(),
        },
    ]);
    m.output_dir = dir.to_path_buf();
    m.seed = Some(5);
    m
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn artifacts_and_refused_run() {
    let dir = tempfile::tempdir().unwrap();
    let report = execute_manifest(&manifest(dir.path())).unwrap();
    assert_eq!(report.exit_code(), 0);
    let d = dir.path();
    for f in [
        "ds.json",
        "ds.csv",
        "ds.txt",
        "refused.json",
        "refused.csv",
        SUMMARY_FILE,
    ] {
        assert!(d.join(f).exists(), "{f}");
    }
    assert!(!d.join("refused.txt").exists());

    let refused = read_json(&d.join("refused.json"));
    assert_eq!(refused["outcome"], "refused");
    assert_eq!(refused["feasibility"]["feasible_under_outcome_i"], false);
    assert!(
        (refused["feasibility"]["margin"].as_f64().unwrap() - 1.0 / std::f64::consts::PI).abs()
            < 1e-9
    );

    let ds = read_json(&d.join("ds.json"));
    assert_eq!(ds["seed"], 5);
    let csv = fs::read_to_string(d.join("ds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2001);
    let txt = fs::read_to_string(d.join("ds.txt")).unwrap();
    assert!(txt.lines().all(|l| l.chars().count() <= 80));

    let summary = read_json(&d.join(SUMMARY_FILE));
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0]["subsets"]["D0"]["verdict"], "particle");
    assert_eq!(runs[1]["outcome"], "refused");
    assert!(runs[1]["feasibility"].is_object());
}

#[test]
fn rerun_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    execute_manifest(&manifest(a.path())).unwrap();
    execute_manifest(&manifest(b.path())).unwrap();
    for f in ["ds.json", "ds.csv", "ds.txt", "refused.json", SUMMARY_FILE] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn failing_run_is_isolated() {
    let dir = tempfile::tempdir().unwrap();
    // A directory squatting on the report path makes the "ds" run fail.
    fs::create_dir(dir.path().join("ds.json")).unwrap();
    let report = execute_manifest(&manifest(dir.path())).unwrap();
    assert_eq!(report.exit_code(), 1);
    assert_eq!(report.failures(), 1);
    assert!(report.result("refused").is_some());
    let summary = read_json(&dir.path().join(SUMMARY_FILE));
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs[0]["status"], "failed");
    assert!(runs[0]["error"].as_str().unwrap().contains("ds.json"));
    assert_eq!(runs[1]["status"], "ok");
    assert!(dir.path().join("refused.json").exists());
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_simrun");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(
        &path,
        serialize_manifest(&manifest(&dir.path().join("out"))),
    )
    .unwrap();
    let ok = Command::new(bin)
        .args(["run", path.to_str().unwrap(), "--formats", "json"])
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));
    assert!(dir.path().join("out/ds.json").exists());
    assert!(!dir.path().join("out/ds.csv").exists());

    fs::write(
        &path,
        r#"{"runs": [{"name": "ds", "config": {"protocol": "double_slit", "n_pairs": 0}}]}"#,
    )
    .unwrap();
    let bad = Command::new(bin)
        .args(["run", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("n_pairs >= 1"));
}
