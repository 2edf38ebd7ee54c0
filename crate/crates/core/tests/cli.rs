//! Command-line behaviour: output layout, manifests and error handling.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const SMALL: &str = "seed = 5\ntrials = 500\n[latency]\nk_values = [10, 100]\nq_values = [1000]\nber_values = [1e-3]\nr_max_m = [100.0]\n";

fn airfeel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_airfeel")).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("cfg.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn manifest_records_config_seed_and_file_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("lat");
    let run = airfeel(&["latency", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let m = manifest(&out);
    assert_eq!(m["tool"], "airfeel");
    assert_eq!(m["command"], "latency");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["format"], "csv");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    let expected_hash = airfeel::experiment::ExperimentConfig::from_toml(SMALL).unwrap().hash();
    assert_eq!(m["config_sha256"], expected_hash);
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 1);
    let bytes = fs::read(out.join(files[0]["name"].as_str().unwrap())).unwrap();
    let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(files[0]["sha256"], digest);
    // Two K values, one q, one BER, one distance.
    assert_eq!(files[0]["rows"], 5);
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("seed,sweep,k_devices,q_dim,ber,r_max_m,t_analog_s,t_digital_s,gamma,"));
}

#[test]
fn seed_flag_overrides_config_and_changes_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(airfeel(&["tradeoff", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(airfeel(&["tradeoff", "--config", &cfg, "--seed", "9", "--out", b.to_str().unwrap()]).status.success());
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(mb["seed"], 9);
    assert_ne!(ma["config_sha256"], mb["config_sha256"]);
}

#[test]
fn json_tables_carry_schema_and_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("j");
    assert!(airfeel(&["latency", "--config", &cfg, "--format", "json", "--out", out.to_str().unwrap()]).status.success());
    let table: serde_json::Value = serde_json::from_slice(&fs::read(out.join("latency.json")).unwrap()).unwrap();
    assert_eq!(table["schema_version"], airfeel::experiment::SCHEMA_VERSION);
    assert_eq!(table["table"], "latency");
    assert_eq!(table["seed"], 5);
    assert_eq!(table["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn montecarlo_trials_flag_reaches_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[montecarlo]\nk_values = [5]\nratios = [0.5]\nsnr_k_values = [10]\n");
    let out = tmp.path().join("mc");
    assert!(airfeel(&["montecarlo", "--config", &cfg, "--trials", "300", "--out", out.to_str().unwrap()]).status.success());
    assert_eq!(manifest(&out)["trials"], 300);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[system]\np0 = 0.1\n");
    let run = airfeel(&["latency", "--config", &cfg, "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("p0"), "{err}");
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn invalid_ber_is_rejected_before_any_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[system]\nber = 0.3\n");
    let run = airfeel(&["latency", "--config", &cfg, "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("0.2"));
}

#[test]
fn bundled_example_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            airfeel::experiment::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}
