use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL_MONTECARLO: &str = r#"
schema_version = 1
[montecarlo]
segment_len = 1024
segments = 16
seed = 7
[montecarlo.detection]
trials = 40
multiples = [0.0, 2.0]
"#;

fn bae(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bae"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# bae "));
    assert!(lines.next().unwrap().starts_with("# config: {"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_writes_table_sidecar_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "schema_version = 1\n[spectrum]\npoints = 40\nsvg = true\n");
    let out = bae(dir.path(), &["--config", &cfg, "--check", "spectrum"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows[0][0], "omega");
    assert_eq!(rows.len(), 41);
    let side = json(&dir.path().join("spectrum.json"));
    assert_eq!(side["config"]["spectrum"]["points"], 40);
    assert_eq!(side["columns"][0], "omega");
    assert!(fs::read_to_string(dir.path().join("spectrum.svg")).unwrap().contains("<polyline"));
}

#[test]
fn sweep_and_regimes_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(bae(dir.path(), &["--check", "sweep"]).status.success());
    let optima = data_rows(&dir.path().join("optima.csv"));
    assert_eq!(optima.len(), 5);
    assert!(data_rows(&dir.path().join("sweep.csv")).len() > 100);

    assert!(bae(dir.path(), &["regimes"]).status.success());
    let regimes = data_rows(&dir.path().join("regimes.csv"));
    assert_eq!(regimes[0][3], "regime");
    assert!(regimes.len() > 4);
}

#[test]
fn stability_check_passes_tuned_and_fails_detuned() {
    let dir = tempfile::tempdir().unwrap();
    let out = bae(dir.path(), &["--check", "stability"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("stability.json"))["report"]["stable"], true);

    let cfg = write_config(dir.path(), "d.toml", "schema_version = 1\n[params]\ndelta_plus = 0.03\ndelta_minus = -0.01\n");
    let out = bae(dir.path(), &["--config", &cfg, "--check", "stability"]);
    assert_eq!(out.status.code(), Some(4));
    let out = bae(dir.path(), &["--config", &cfg, "stability"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn qmfs_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bae(dir.path(), &["--check", "qmfs-check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = &json(&dir.path().join("qmfs.json"))["report"];
    assert_eq!(report["hamiltonian_drift_exact"], true);
    assert!(report["symplectic_defect"].as_f64().unwrap() < 1e-10);
}

#[test]
fn config_errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "schema_version = 1\n[params]\ngama = 1.0\n");
    let out = bae(dir.path(), &["--config", &bad, "spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gama"));

    let missing = dir.path().join("absent.toml");
    let out = bae(dir.path(), &["--config", missing.to_str().unwrap(), "spectrum"]);
    assert_eq!(out.status.code(), Some(2));

    let version = write_config(dir.path(), "v.toml", "schema_version = 9\n");
    assert_eq!(bae(dir.path(), &["--config", &version, "spectrum"]).status.code(), Some(2));
}

#[test]
fn montecarlo_reruns_are_bit_identical() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), "mc.toml", SMALL_MONTECARLO);
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    for dir in [&a, &b] {
        let out = bae(dir, &["--config", &cfg, "montecarlo"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["psd.csv", "bands.csv", "detection.csv", "montecarlo.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert_eq!(data_rows(&a.join("detection.csv")).len(), 3);
}

#[test]
fn seed_flag_overrides_config() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), "mc.toml", SMALL_MONTECARLO);
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    assert!(bae(&a, &["--config", &cfg, "montecarlo"]).status.success());
    assert!(bae(&b, &["--config", &cfg, "--seed", "8", "montecarlo"]).status.success());
    assert_ne!(fs::read(a.join("psd.csv")).unwrap(), fs::read(b.join("psd.csv")).unwrap());
    assert_eq!(json(&b.join("montecarlo.json"))["config"]["montecarlo"]["seed"], 8);
}
