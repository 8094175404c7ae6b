use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqed")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn error_of(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str::<Value>(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))["error"].clone()
}

#[test]
fn list_scenarios_prints_the_catalog() {
    let out = cqed(&["list-scenarios"]);
    assert!(out.status.success());
    let cat: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = cat.as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    for n in ["fig5", "fig7", "fig8", "fig9", "fig11", "fig12", "fig13", "fig17", "fig18"] {
        assert!(names.contains(&n), "{n}");
    }
    let fig13 = cat.as_array().unwrap().iter().find(|p| p["name"] == "fig13").unwrap();
    assert_eq!(fig13["command"], "spectrum");
    assert_eq!(fig13["config"]["params"]["omega12_hz"], 5.75e9);
    assert_eq!(cqed(&["list-scenarios"]).stdout, out.stdout);
}

#[test]
fn show_prints_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqed(&["show", "fig5"]);
    assert!(out.status.success());
    let path = write_config(dir.path(), "fig5.json", &String::from_utf8(out.stdout).unwrap());
    let run = cqed(&["spectrum", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn empty_sweep_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scenario": "fig5", "sweep": {"parameter": "ng", "start": 0.0, "stop": 1.0, "points": 0}}"#;
    let path = write_config(dir.path(), "bad.json", cfg);
    let out = cqed(&["spectrum", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "validation");
    assert!(!dir.path().join("fig5_manifest.json").exists());
}

#[test]
fn config_errors_exit_nonzero_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_key = write_config(dir.path(), "a.json", r#"{"scenario": "fig5", "params": {"plasma": 1.0}}"#);
    let out = cqed(&["spectrum", "--config", &unknown_key]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_of(&out)["message"].as_str().unwrap().contains("plasma"));

    let wrong_command = cqed(&["evolve", "--preset", "fig5"]);
    assert_eq!(wrong_command.status.code(), Some(2));
    assert_eq!(error_of(&wrong_command)["kind"], "validation");

    let unknown = cqed(&["spectrum", "--preset", "fig99"]);
    assert_eq!(error_of(&unknown)["kind"], "unknown_scenario");

    let garbage = write_config(dir.path(), "b.json", "{ not json");
    assert_eq!(error_of(&cqed(&["spectrum", "--config", &garbage]))["kind"], "config");
}

#[test]
fn physics_errors_name_their_module() {
    let dir = tempfile::tempdir().unwrap();
    // A Fock space too small for the squeezed state trips the leakage check.
    let cfg = write_config(dir.path(), "c.json", r#"{"scenario": "fig17", "dims": {"fock": 8}}"#);
    let out = cqed(&["phasespace", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = error_of(&out);
    assert_eq!(err["kind"], "physics");
    assert_eq!(err["module"], "phasespace");
}

#[test]
fn manifest_lists_every_output_with_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cqed(&["spectrum", "--preset", "fig5", "--out", dir.path().to_str().unwrap(), "--threads", "2"]);
    assert!(out.status.success());
    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.path().join("fig5_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["scenario"], "fig5");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let listed: Vec<String> = manifest["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap().to_owned()).collect();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "fig5_manifest.json")
        .collect();
    on_disk.sort();
    let mut sorted = listed.clone();
    sorted.sort();
    assert_eq!(sorted, on_disk);
    for o in manifest["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(dir.path().join(o["path"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"], cqed_cli::output::sha256_hex(&bytes));
    }
    let csv = std::fs::read_to_string(dir.path().join("fig5_levels.csv")).unwrap();
    assert!(csv.starts_with("ej_over_ec,ng,level,frequency_hz\n"));
}

#[test]
fn seed_changes_only_monte_carlo_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, sub: &str| {
        let d = dir.path().join(sub);
        let out = cqed(&["readout", "--preset", "fig7", "--seed", seed, "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
        let m: Value = serde_json::from_slice(&std::fs::read(d.join("fig7_manifest.json")).unwrap()).unwrap();
        (std::fs::read(d.join("fig7_histogram.csv")).unwrap(), std::fs::read(d.join("fig7_snr.csv")).unwrap(), m)
    };
    let (h1, s1, m1) = run("1", "a");
    let (h2, s2, m2) = run("2", "b");
    assert_ne!(h1, h2);
    assert_eq!(s1, s2);
    assert_eq!(m1["seed"], 1);
    assert_ne!(m1["config_hash"], m2["config_hash"]);
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cqed"))
        .args(["code", "--preset", "codes", "--out", dir.path().to_str().unwrap()])
        .env("CQED_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bad = Command::new(env!("CARGO_BIN_EXE_cqed")).args(["list-scenarios"]).env("CQED_THREADS", "many").output().unwrap();
    assert!(!bad.status.success());
}
