use sisqo::engine::SolverConfig;
use sisqo::harness::{
    aggregate, emit_csv, kkt_metrics, read_csv, run_budget_matched_pair, run_single, run_sweep, run_with,
    select_exact_iterate, write_outputs, write_records_csv, ExperimentConfig, HarnessError, IterateMetrics, RunOptions,
    RunRecord, RunStatus, CSV_COLUMNS, STRATEGY_EXACT, STRATEGY_INEXACT,
};
use sisqo::library::{SyntheticQp, SyntheticQpSpec};
use sisqo::problem::OracleKind;

fn record(problem: &str, strategy: &str, eps_n: f64, seed: u64, feas: f64, stat: f64) -> RunRecord {
    RunRecord {
        problem: problem.into(),
        strategy: strategy.into(),
        config_hash: "h".into(),
        seed,
        eps_n,
        status: RunStatus::Converged,
        message: None,
        rows: Vec::new(),
        x_final: Vec::new(),
        y_ls: Vec::new(),
        feasibility_error: feas,
        stationarity_error: stat,
        minres_iters: 10 * seed as usize,
        outer_iters: seed as usize,
        selected_iterate: None,
        wall_time_s: 0.0,
    }
}

fn metrics(k: usize, feas: f64, stat: f64) -> IterateMetrics {
    IterateMetrics { k, feas_err: feas, stat_err: stat }
}

#[test]
fn iterate_selection_by_hand() {
    let h = [metrics(0, 1e-7, 1e-2), metrics(1, 1e-3, 1e-9), metrics(2, 5e-7, 1e-4)];
    // iterate 1 is infeasible; among the rest the smaller stationarity wins
    assert_eq!(select_exact_iterate(&h, 1e-6), Some(2));
    // nothing within tolerance: smallest feasibility error
    assert_eq!(select_exact_iterate(&h, 1e-8), Some(0));
    // ties go to the earliest
    let t = [metrics(0, 0.0, 1.0), metrics(1, 0.0, 1.0)];
    assert_eq!(select_exact_iterate(&t, 1e-6), Some(0));
    assert_eq!(select_exact_iterate(&[], 1e-6), None);
}

#[test]
fn aggregate_single_and_pair() {
    let one = aggregate(&[record("p", "sisqo", 0.1, 1, 2e-7, 3e-3)]).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].runs, 1);
    assert_eq!(one[0].mean_feas_err, 2e-7);
    assert_eq!(one[0].stat_err_median, 3e-3);

    let two =
        aggregate(&[record("p", "sisqo", 0.1, 1, 1e-7, 1e-3), record("p", "sisqo", 0.1, 3, 3e-7, 3e-3)]).unwrap();
    assert_eq!(two.len(), 1);
    assert!((two[0].mean_feas_err - 2e-7).abs() < 1e-22);
    assert!((two[0].mean_stat_err - 2e-3).abs() < 1e-18);
    assert_eq!(two[0].mean_minres_iters, 20.0);
    assert_eq!((two[0].stat_err_min, two[0].stat_err_max), (1e-3, 3e-3));
    assert!((two[0].stat_err_median - 2e-3).abs() < 1e-18);
}

#[test]
fn aggregate_groups_and_rejects_bad_input() {
    let rows = aggregate(&[
        record("p", "sisqo", 0.1, 1, 1.0, 1.0),
        record("p", "sisqo_exact", 0.1, 1, 1.0, 1.0),
        record("p", "sisqo", 0.01, 1, 1.0, 1.0),
    ])
    .unwrap();
    assert_eq!(rows.len(), 3);
    assert!(matches!(aggregate(&[]), Err(HarnessError::Aggregate(_))));
    let mixed = [record("p", "sisqo", 0.1, 1, 1.0, 1.0), record("q", "sisqo", 0.1, 2, 1.0, 1.0)];
    assert!(matches!(aggregate(&mixed), Err(HarnessError::Aggregate(_))));
}

#[test]
fn csv_header_only_for_empty_input() {
    let mut buf = Vec::new();
    write_records_csv(&[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
}

#[test]
fn csv_round_trip_preserves_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/out.csv");
    let recs: Vec<RunRecord> =
        (0..10).map(|s| record("p", "sisqo", 0.1, s, 1.0 / (3.0 + s as f64), std::f64::consts::PI * 1e-5)).collect();
    emit_csv(&recs, &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back.len(), 10);
    for (r, b) in recs.iter().zip(&back) {
        assert_eq!(b.feas_err, r.feasibility_error);
        assert_eq!(b.stat_err, r.stationarity_error);
        assert_eq!(b.eps_n, r.eps_n);
        assert_eq!((b.seed, b.minres_iters, b.outer_iters), (r.seed, r.minres_iters, r.outer_iters));
        assert_eq!(b.status, "converged");
    }
    // re-aggregating the CSV matches aggregating in memory
    let direct = aggregate(&recs).unwrap();
    let mean_feas = back.iter().map(|b| b.feas_err).sum::<f64>() / 10.0;
    let mean_stat = back.iter().map(|b| b.stat_err).sum::<f64>() / 10.0;
    assert_eq!(direct[0].mean_feas_err, mean_feas);
    assert_eq!(direct[0].mean_stat_err, mean_stat);
}

fn small_qp() -> SyntheticQp {
    SyntheticQp::new(&SyntheticQpSpec::new(16, 6, 2)).unwrap()
}

#[test]
fn zero_iteration_cap_reports_initial_point() {
    let p = small_qp();
    let mut cfg = SolverConfig::general();
    cfg.solver.max_outer_iterations = 0;
    let rec = run_single(&p, &cfg, OracleKind::Exact, 0);
    assert_eq!(rec.status, RunStatus::MaxIterations);
    assert_eq!(rec.outer_iters, 0);
    assert!(rec.rows.is_empty());
    let (feas, stat, _) = kkt_metrics(&p, &sisqo::problem::Problem::initial_point(&p), cfg.solver.lsq_tol);
    assert_eq!((rec.feasibility_error, rec.stationarity_error), (feas, stat));
}

#[test]
fn reported_metrics_match_recomputation() {
    let p = small_qp();
    let rec = run_single(&p, &SolverConfig::general(), OracleKind::Gaussian { eps_n: 0.01 }, 4);
    assert!(!rec.status.is_failure());
    let (feas, stat, y) = kkt_metrics(&p, &rec.x_final, 1e-12);
    assert!((rec.feasibility_error - feas).abs() <= 1e-12);
    assert!((rec.stationarity_error - stat).abs() <= 1e-12);
    assert_eq!(rec.y_ls, y);
    assert_eq!(rec.invariant_violation_count(), 0);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let p = small_qp();
    let run = || {
        let mut r = run_single(&p, &SolverConfig::general(), OracleKind::Gaussian { eps_n: 0.1 }, 9);
        r.wall_time_s = 0.0;
        serde_json::to_string(&r).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn zero_budget_stops_immediately() {
    let p = small_qp();
    let opts = RunOptions { minres_budget: Some(0), ..RunOptions::default() };
    let rec = run_with(&p, &SolverConfig::general(), OracleKind::Exact, 0, &opts);
    assert_eq!(rec.status, RunStatus::BudgetReached);
    assert_eq!(rec.outer_iters, 0);
    assert_eq!(rec.selected_iterate, Some(0));
}

#[test]
fn budget_is_met_with_at_most_one_iteration_of_overshoot() {
    let p = small_qp();
    let cfg = SolverConfig::general();
    let cmp = run_budget_matched_pair(&p, &cfg, &cfg.clone().with_kappa(1e-7), OracleKind::Exact, 1, &RunOptions::default())
        .unwrap();
    assert_eq!(cmp.inexact.strategy, STRATEGY_INEXACT);
    assert_eq!(cmp.exact.strategy, STRATEGY_EXACT);
    assert_eq!(cmp.budget, cmp.inexact.minres_iters);
    let exact = &cmp.exact;
    if exact.status == RunStatus::BudgetReached {
        assert!(exact.minres_iters >= cmp.budget);
        let last = exact.rows.last().map_or(0, |r| r.minres_iters);
        assert!(exact.minres_iters - last < cmp.budget);
    }
}

#[test]
fn equal_kappa_pair_coincides() {
    let p = small_qp();
    let cfg = SolverConfig::general();
    let cmp =
        run_budget_matched_pair(&p, &cfg, &cfg, OracleKind::Gaussian { eps_n: 0.01 }, 3, &RunOptions::default()).unwrap();
    let (a, b) = (&cmp.inexact, &cmp.exact);
    assert_eq!(a.minres_iters, b.minres_iters);
    let n = a.rows.len();
    assert_eq!(b.rows[..n.min(b.rows.len())], a.rows[..n.min(b.rows.len())]);
    // both runs visit the same iterates, so the selected one is at least as good
    assert!(b.stationarity_error <= a.stationarity_error || b.feasibility_error <= a.feasibility_error);
}

const SWEEP_TOML: &str = r#"
[problem]
kind = "synthetic"
n = 14
m = 5
seed = 1

[oracle]
kind = "gaussian"
eps_n = 0.01

[harness]
seeds = [0, 1, 2]
eps_n_values = [0.0, 0.01]
"#;

#[test]
fn sweep_preserves_order_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml_str(SWEEP_TOML, &[]).unwrap();
    cfg.harness.output_dir = dir.path().to_path_buf();
    let outcome = run_sweep(&cfg, true).unwrap();
    assert_eq!(outcome.failures(), 0);
    assert_eq!(outcome.records.len(), 12);
    assert_eq!(outcome.comparisons.len(), 6);
    let order: Vec<(f64, u64, &str)> =
        outcome.records.iter().map(|r| (r.eps_n, r.seed, r.strategy.as_str())).collect();
    assert_eq!(order[0], (0.0, 0, STRATEGY_INEXACT));
    assert_eq!(order[1], (0.0, 0, STRATEGY_EXACT));
    assert_eq!(order[11], (0.01, 2, STRATEGY_EXACT));
    assert_eq!(outcome.summary.len(), 4);

    if std::env::var_os(sisqo::harness::OUTPUT_DIR_ENV).is_none() {
        let written = write_outputs(&outcome, &cfg, "sweep").unwrap();
        assert_eq!(written.len(), 4);
        assert!(written.iter().all(|p| p.exists()));
        let rows = read_csv(&dir.path().join("sweep.csv")).unwrap();
        assert_eq!(rows.len(), 12);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
        assert_eq!(json["records"].as_array().unwrap().len(), 12);
        let saved = std::fs::read_to_string(dir.path().join("sweep_config.toml")).unwrap();
        let reloaded = ExperimentConfig::from_toml_str(&saved, &[]).unwrap();
        assert_eq!(reloaded.config_hash(), cfg.config_hash());
    }
}

#[test]
fn config_overrides_and_rejections() {
    let cfg = ExperimentConfig::from_toml_str(SWEEP_TOML, &["algorithm.kappa=0.05".into(), "harness.seeds=[4]".into()])
        .unwrap();
    assert_eq!(cfg.solver.algorithm.kappa, 0.05);
    assert_eq!(cfg.harness.seeds, vec![4]);
    assert_ne!(cfg.config_hash(), ExperimentConfig::from_toml_str(SWEEP_TOML, &[]).unwrap().config_hash());
    assert!(ExperimentConfig::from_toml_str(SWEEP_TOML, &["algorithm.kappa=2.0".into()]).is_err());
    assert!(ExperimentConfig::from_toml_str(SWEEP_TOML, &["bogus.key=1".into()]).is_err());
    assert!(ExperimentConfig::from_toml_str(SWEEP_TOML, &["algorithm.not_a_field=1".into()]).is_err());
    assert!(ExperimentConfig::from_toml_str(&SWEEP_TOML.replace("m = 5", "m = 20"), &[]).is_err());
}
