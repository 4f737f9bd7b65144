use std::path::Path;
use std::process::{Command, Output};

fn deepvqe(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deepvqe"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn estimate_resources_prints_and_saves() {
    let dir = tempfile::tempdir().unwrap();
    let out = deepvqe(&["estimate-resources", "2", "2", "2", "2", "--out", "r.json"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("physical qubits: 256, largest VQE: 28 qubits"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["physical_qubits"], 256);
}

#[test]
fn stages_chain_through_the_artifact_directory() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("cfg.json"), r#"{"n_blocks": 2, "first_vqe": {"restarts": 3}}"#).unwrap();
    let base = ["--config", "cfg.json", "--resume", "art"];

    let out = deepvqe(&[&["solve-block"][..], &base].concat(), p);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(p.join("art/solve-block.json").exists());

    let out = deepvqe(&[&["build-effective"][..], &base].concat(), p);
    assert!(out.status.success());
    let eff: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("art/build-effective.json")).unwrap()).unwrap();
    assert_eq!(eff["basis"]["k"], 7);

    let out = deepvqe(&[&["pipeline"][..], &base, &["--out", "results.json"]].concat(), p);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("deep VQE energy"), "{text}");
    let results: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("results.json")).unwrap()).unwrap();
    assert!((results["deep_vqe_energy"].as_f64().unwrap() + 14.4641).abs() < 1e-3);
    assert_eq!(results["seeds"]["first_vqe"], 0);
}

#[test]
fn stop_after_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = deepvqe(&["pipeline", "--stage", "solve-block", "--resume", "a"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("stopped after solve-block"));
    assert!(!dir.path().join("a/build-effective.json").exists());
}

#[test]
fn failures_exit_nonzero_with_stage_tag() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();

    let out = deepvqe(&["pipeline", "--stage", "nope", "--no-artifacts"], p);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown stage"));

    std::fs::write(p.join("cfg.json"), r#"{"first_vqe": {"depth": 0}}"#).unwrap();
    let out = deepvqe(&["pipeline", "--config", "cfg.json", "--no-artifacts"], p);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("solve-block"), "{err}");

    std::fs::write(p.join("bad.json"), r#"{"depht": 2}"#).unwrap();
    let out = deepvqe(&["solve-block", "--config", "bad.json"], p);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("parsing bad.json"));
}
