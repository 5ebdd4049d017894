use sisqo::harness::{run_sweep, write_outputs, ExperimentConfig, OUTPUT_DIR_ENV};

// Kept in its own test binary: it mutates the process environment.
#[test]
fn env_var_overrides_output_dir() {
    let configured = tempfile::tempdir().unwrap();
    let env_dir = tempfile::tempdir().unwrap();
    let text = format!(
        "[problem]\nkind = \"circle\"\n[oracle]\nkind = \"exact\"\n[harness]\noutput_dir = {:?}\nformats = [\"csv\"]\n",
        configured.path().display().to_string()
    );
    let cfg = ExperimentConfig::from_toml_str(&text, &[]).unwrap();
    std::env::set_var(OUTPUT_DIR_ENV, env_dir.path());
    assert_eq!(cfg.output_dir(), env_dir.path());
    let outcome = run_sweep(&cfg, false).unwrap();
    let written = write_outputs(&outcome, &cfg, "run").unwrap();
    assert!(written.iter().all(|p| p.starts_with(env_dir.path())));
    assert!(env_dir.path().join("run.csv").exists());
    assert!(!configured.path().join("run.csv").exists());

    std::env::set_var(OUTPUT_DIR_ENV, "");
    assert_eq!(cfg.output_dir(), configured.path());
    std::env::remove_var(OUTPUT_DIR_ENV);
    assert_eq!(cfg.output_dir(), configured.path());
}
