use super::config::{ExperimentConfig, OutputFormat};
use super::output::{emit_csv, emit_json, emit_summary_csv};
use super::run::{aggregate, run_budget_matched_pair, run_with, ComparisonRecord, RunOptions, RunRecord, SummaryRow};
use super::HarnessError;
use crate::problem::Problem;
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub config_hash: String,
    /// Every run, in (noise level, seed, strategy) order.
    pub records: Vec<RunRecord>,
    pub comparisons: Vec<ComparisonRecord>,
    pub summary: Vec<SummaryRow>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.status.is_failure()).count()
    }
}

/// Runs every (noise level, seed) combination in parallel, as single runs
/// or as budget-matched pairs.
pub fn run_sweep(cfg: &ExperimentConfig, compare: bool) -> Result<SweepOutcome, HarnessError> {
    let hash = cfg.config_hash();
    let problems: Vec<(f64, Arc<dyn Problem>)> =
        cfg.noise_levels().into_iter().map(|e| Ok((e, cfg.build_problem(e)?))).collect::<Result<_, HarnessError>>()?;
    let jobs: Vec<(usize, u64)> =
        (0..problems.len()).flat_map(|p| cfg.harness.seeds.iter().map(move |&s| (p, s))).collect();
    let exact_cfg = cfg.exact_solver();

    let results: Vec<(Vec<RunRecord>, Option<ComparisonRecord>)> = jobs
        .par_iter()
        .map(|&(p, seed)| {
            let (eps_n, problem) = &problems[p];
            let opts = RunOptions { config_hash: hash.clone(), eps_n: *eps_n, ..RunOptions::default() };
            let oracle = cfg.oracle_kind(*eps_n);
            if compare {
                match run_budget_matched_pair(problem.as_ref(), &cfg.solver, &exact_cfg, oracle, seed, &opts) {
                    Ok(cmp) => (vec![cmp.inexact.clone(), cmp.exact.clone()], Some(cmp)),
                    Err(HarnessError::InexactRunFailed(rec)) => (vec![*rec], None),
                    Err(e) => unreachable!("budget-matched pair only fails through the inexact run: {e}"),
                }
            } else {
                (vec![run_with(problem.as_ref(), &cfg.solver, oracle, seed, &opts)], None)
            }
        })
        .collect();

    let mut records = Vec::new();
    let mut comparisons = Vec::new();
    for (recs, cmp) in results {
        records.extend(recs);
        comparisons.extend(cmp);
    }
    let summary = aggregate(&records)?;
    Ok(SweepOutcome { config_hash: hash, records, comparisons, summary })
}

/// Writes `<stem>.csv`, `<stem>.json`, `<stem>_summary.csv` and the resolved
/// config into the output directory. Returns the paths written.
pub fn write_outputs(outcome: &SweepOutcome, cfg: &ExperimentConfig, stem: &str) -> Result<Vec<PathBuf>, HarnessError> {
    let dir = cfg.output_dir();
    let mut written = Vec::new();
    for format in &cfg.harness.formats {
        match format {
            OutputFormat::Csv => {
                let path = dir.join(format!("{stem}.csv"));
                emit_csv(&outcome.records, &path)?;
                written.push(path);
                let path = dir.join(format!("{stem}_summary.csv"));
                emit_summary_csv(&outcome.summary, &path)?;
                written.push(path);
            }
            OutputFormat::Json => {
                let path = dir.join(format!("{stem}.json"));
                emit_json(outcome, &path)?;
                written.push(path);
            }
        }
    }
    let path = dir.join(format!("{stem}_config.toml"));
    std::fs::write(&path, cfg.to_toml_string()).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    written.push(path);
    Ok(written)
}
