use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = "[problem]\nkind = \"synthetic\"\nn = 12\nm = 4\n\n[oracle]\nkind = \"gaussian\"\neps_n = 0.01\n\n\
                      [harness]\nseeds = [0, 1]\neps_n_values = [0.0, 0.01]\noutput_dir = \"unused\"\n";

fn sisqo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sisqo"))
        .args(args)
        .current_dir(dir)
        .env("SISQO_OUTPUT_DIR", dir.join("out"))
        .output()
        .unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.toml"), CONFIG).unwrap();
    dir
}

fn data_rows(path: &Path) -> usize {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader.records().count()
}

#[test]
fn run_writes_one_seed() {
    let dir = setup();
    let out = sisqo(dir.path(), &["run", "-c", "exp.toml", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/run.json")).unwrap()).unwrap();
    let records = json["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["seed"], 1);
    assert!(dir.path().join("out/run_config.toml").exists());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn sweep_and_compare_cover_the_grid() {
    let dir = setup();
    let out = sisqo(dir.path(), &["sweep", "-c", "exp.toml", "--stem", "grid"]);
    assert!(out.status.success());
    assert_eq!(data_rows(&dir.path().join("out/grid_summary.csv")), 2);

    let out = sisqo(dir.path(), &["sweep", "-c", "exp.toml", "--compare"]);
    assert!(out.status.success());
    assert_eq!(data_rows(&dir.path().join("out/sweep_summary.csv")), 4);

    let out = sisqo(dir.path(), &["compare", "-c", "exp.toml", "--set", "harness.formats=[\"csv\"]"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("sisqo_exact"), "{stdout}");
    assert_eq!(data_rows(&dir.path().join("out/compare_summary.csv")), 2);
    assert!(!dir.path().join("out/compare.json").exists());
}

#[test]
fn validate_reports_derivatives_and_rejects_bad_configs() {
    let dir = setup();
    let out = sisqo(dir.path(), &["validate", "-c", "exp.toml", "--print"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[algorithm]") && stdout.contains("gradient"), "{stdout}");

    let out = sisqo(dir.path(), &["validate", "-c", "exp.toml", "--set", "problem.m=20"]);
    assert!(!out.status.success());
    let out = sisqo(dir.path(), &["run", "-c", "missing.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));
}
