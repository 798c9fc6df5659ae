//! Command-line behaviour: configuration parsing, artifacts and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use critwave::dynamics::DirectionRecord;
use critwave::experiment::{ExperimentSpec, StaticOptions};
use critwave::spectral::ConstantsFile;

fn critwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critwave")).args(args).output().expect("spawn critwave")
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// A short run on a reduced grid: no verdict can be reached by `t_max`.
const SHORT_BUMP: &str = r#"
name = "short"

[recipe]
kind = "bump"
amplitude = 0.05
width = 1.0
centre = 3.0

[evolution]
r_max = 30.0
n = 3000
t_max = 1.0
"#;

#[test]
fn shipped_configs_parse() {
    for name in ["w_plus_rho", "w_velocity", "small_bump", "quadrant"] {
        let spec = ExperimentSpec::load(&repo_file(&format!("configs/{name}.toml"))).unwrap();
        assert_eq!(spec.name, name);
    }
    let text = std::fs::read_to_string(repo_file("configs/static.toml")).unwrap();
    let opts: StaticOptions = toml::from_str(&text).unwrap();
    assert_eq!(opts.coercivity_probes, 100);
}

#[test]
fn config_round_trips_through_toml() {
    let spec = ExperimentSpec::load(&repo_file("configs/w_plus_rho.toml")).unwrap();
    let again = ExperimentSpec::from_toml(&spec.to_toml().unwrap()).unwrap();
    assert_eq!(spec, again);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(ExperimentSpec::from_toml("name = \"x\"\nbogus = 1\n").is_err());
    assert!(ExperimentSpec::from_toml("name = \"x\"\n[evolution]\ncfl = 0.9\n").is_err());
    assert!(ExperimentSpec::from_toml("name = \"x\"\n[sweep]\neps = [0.5]\n").is_err());
    assert!(ExperimentSpec::from_toml("name = \"a/b\"\n").is_err());
}

#[test]
fn evolve_without_config_is_an_error() {
    let out = critwave(&["evolve"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn evolve_rejects_out_of_range_quadrant_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "name = \"big\"\n[recipe]\nkind = \"quadrant\"\na = [1, 0]\neps = 0.2\n");
    let out = critwave(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps"));
}

#[test]
fn undetermined_run_exits_with_code_two_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT_BUMP);
    let out_dir = dir.path().join("out");
    let out = critwave(&["evolve", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["short_forward.csv", "short_backward.csv", "short.json"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let header = std::fs::read_to_string(out_dir.join("short_forward.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), "t,tau,E,K,dW,lambda1,sigma,Eext,Vw,equip");
    let rows = DirectionRecord::read_csv(&out_dir.join("short_forward.csv")).unwrap();
    assert!(rows.len() >= 10);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("short.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 5);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT_BUMP);
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("out{k}"));
        let out = critwave(&["evolve", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--threads", "1"]);
        assert_eq!(out.status.code(), Some(2));
        csvs.push(std::fs::read(out_dir.join("short_forward.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn constants_match_the_stored_file() {
    let dir = tempfile::tempdir().unwrap();
    let stored = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/constants_d3.json");
    let out = critwave(&["constants", "--d", "3", "--out", dir.path().to_str().unwrap(), "--verify", stored.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let fresh = ConstantsFile::read(&dir.path().join("constants_d3.json")).unwrap();
    let saved = ConstantsFile::read(&stored).unwrap();
    assert!((fresh.k / saved.k - 1.0).abs() < 1e-10);
    assert!((fresh.k - 1.100167216847821).abs() < 1e-9);
}

#[test]
fn tampered_constants_fail_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let stored = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/constants_d3.json");
    let mut file = ConstantsFile::read(&stored).unwrap();
    file.k *= 1.0 + 1e-6;
    let path = dir.path().join("bad.json");
    file.write(&path).unwrap();
    let out = critwave(&["constants", "--verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
