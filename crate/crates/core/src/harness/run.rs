use super::HarnessError;
use crate::engine::{sqp_iterate, AcceptedTest, IterateState, Iteration, SolverConfig};
use crate::linalg::{least_squares_multipliers, norm_inf, LinalgError};
use crate::problem::{GradientOracle, OracleKind, Problem};
use crate::rng::{stream_rng, Stream};
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const STRATEGY_INEXACT: &str = "sisqo";
pub const STRATEGY_EXACT: &str = "sisqo_exact";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Both stopping tolerances met.
    Converged,
    /// The MINRES budget of a budget-matched run was spent.
    BudgetReached,
    MaxIterations,
    /// `c = 0` and the sampled gradient lies in `Range(Jᵀ)`.
    Stationary,
    Failed,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::BudgetReached => "budget_reached",
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::Stationary => "stationary",
            RunStatus::Failed => "failed",
        }
    }

    pub fn is_failure(&self) -> bool {
        *self == RunStatus::Failed
    }
}

/// One outer iteration. `feas_err` and `stat_err` are measured at `x_k`,
/// the remaining fields describe the step taken from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub k: usize,
    pub feas_err: f64,
    pub stat_err: f64,
    pub tau: f64,
    pub xi: f64,
    pub beta: f64,
    pub alpha: f64,
    pub accepted_test: String,
    pub model_reduction: f64,
    pub minres_iters: usize,
    pub cg_iters: usize,
    pub hessian_rung: usize,
    pub invariant_violations: Vec<String>,
    pub merit_bound_held: bool,
}

/// Metrics of one iterate, for iterate selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterateMetrics {
    pub k: usize,
    pub feas_err: f64,
    pub stat_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub strategy: String,
    pub config_hash: String,
    pub seed: u64,
    pub eps_n: f64,
    pub status: RunStatus,
    pub message: Option<String>,
    pub rows: Vec<IterationRow>,
    pub x_final: Vec<f64>,
    pub y_ls: Vec<f64>,
    pub feasibility_error: f64,
    pub stationarity_error: f64,
    pub minres_iters: usize,
    pub outer_iters: usize,
    /// Index of the reported iterate when it is not the last one.
    pub selected_iterate: Option<usize>,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn invariant_violation_count(&self) -> usize {
        self.rows.iter().map(|r| r.invariant_violations.len()).sum()
    }
}

/// `(‖c(x)‖∞, ‖∇f(x) + J(x)ᵀy_ls‖∞, y_ls)` from the true oracles.
pub fn kkt_metrics(problem: &dyn Problem, x: &[f64], lsq_tol: f64) -> (f64, f64, Vec<f64>) {
    let c = problem.constraints(x);
    let g = problem.gradient(x);
    let j = problem.jacobian(x);
    let y_ls = match least_squares_multipliers(&j, &g, lsq_tol) {
        Ok(out) => out.solution,
        Err(LinalgError::NotConverged { best, .. }) => best,
        Err(_) => vec![0.0; j.rows()],
    };
    let mut r = g;
    j.apply_transpose_add(&y_ls, &mut r);
    (norm_inf(&c), norm_inf(&r), y_ls)
}

/// Iterate selection for budget-limited runs: among iterates within
/// `feas_tol`, the smallest stationarity error; otherwise the smallest
/// feasibility error. Ties go to the earliest iterate.
pub fn select_exact_iterate(history: &[IterateMetrics], feas_tol: f64) -> Option<usize> {
    let better = |a: f64, b: f64| a < b;
    let pick = |key: &dyn Fn(&IterateMetrics) -> f64, filter: &dyn Fn(&IterateMetrics) -> bool| {
        let mut best: Option<usize> = None;
        for (i, h) in history.iter().enumerate() {
            if !filter(h) {
                continue;
            }
            match best {
                Some(b) if !better(key(h), key(&history[b])) => {}
                _ => best = Some(i),
            }
        }
        best
    };
    pick(&|h| h.stat_err, &|h| h.feas_err <= feas_tol).or_else(|| pick(&|h| h.feas_err, &|_| true))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub strategy: Option<String>,
    pub config_hash: String,
    pub eps_n: f64,
    /// Stop once the MINRES total reaches this, and skip the tolerance test.
    pub minres_budget: Option<usize>,
}

/// Runs to the stopping tolerances (or the iteration cap).
pub fn run_single(problem: &dyn Problem, cfg: &SolverConfig, oracle: OracleKind, seed: u64) -> RunRecord {
    run_with(problem, cfg, oracle, seed, &RunOptions::default())
}

pub fn run_with(problem: &dyn Problem, cfg: &SolverConfig, oracle: OracleKind, seed: u64, opts: &RunOptions) -> RunRecord {
    let start = Instant::now();
    let strategy = opts.strategy.clone().unwrap_or_else(|| STRATEGY_INEXACT.to_string());
    let mut record = RunRecord {
        problem: problem.name().to_string(),
        strategy,
        config_hash: opts.config_hash.clone(),
        seed,
        eps_n: opts.eps_n,
        status: RunStatus::Failed,
        message: None,
        rows: Vec::new(),
        x_final: Vec::new(),
        y_ls: Vec::new(),
        feasibility_error: f64::NAN,
        stationarity_error: f64::NAN,
        minres_iters: 0,
        outer_iters: 0,
        selected_iterate: None,
        wall_time_s: 0.0,
    };
    let s = &cfg.solver;
    let finish = |mut record: RunRecord, x: Vec<f64>| {
        let (feas, stat, y_ls) = kkt_metrics(problem, &x, s.lsq_tol);
        record.feasibility_error = feas;
        record.stationarity_error = stat;
        record.y_ls = y_ls;
        record.x_final = x;
        record.wall_time_s = start.elapsed().as_secs_f64();
        record
    };
    if let Err(e) = cfg.validate() {
        record.message = Some(e.to_string());
        return finish(record, problem.initial_point());
    }
    let mut oracle = match GradientOracle::new(oracle, problem, stream_rng(seed, Stream::Oracle)) {
        Ok(o) => o,
        Err(e) => {
            record.message = Some(e.to_string());
            return finish(record, problem.initial_point());
        }
    };
    let mut probe_rng = stream_rng(seed, Stream::LipschitzProbe);
    let mut state = IterateState::initial(problem, cfg);
    let budget_mode = opts.minres_budget.is_some();
    let mut history: Vec<IterateMetrics> = Vec::new();
    let mut iterates: Vec<Vec<f64>> = Vec::new();

    let status = loop {
        let (feas, stat, _) = kkt_metrics(problem, &state.x, s.lsq_tol);
        history.push(IterateMetrics { k: state.k, feas_err: feas, stat_err: stat });
        if budget_mode {
            iterates.push(state.x.clone());
        }
        match opts.minres_budget {
            Some(b) if record.minres_iters >= b => break RunStatus::BudgetReached,
            None if feas <= s.feas_tol && stat <= s.stat_tol => break RunStatus::Converged,
            _ => {}
        }
        if state.k >= s.max_outer_iterations {
            break RunStatus::MaxIterations;
        }
        match sqp_iterate(&state, problem, &mut oracle, &mut probe_rng, cfg) {
            Ok(Iteration::Step { next, step }) => {
                record.minres_iters += step.minres_iters;
                record.rows.push(IterationRow {
                    k: step.k,
                    feas_err: feas,
                    stat_err: stat,
                    tau: step.tau,
                    xi: step.xi,
                    beta: step.beta,
                    alpha: step.alpha,
                    accepted_test: match step.accepted_test {
                        AcceptedTest::Tt1 => "TT1".into(),
                        AcceptedTest::Tt2 => "TT2".into(),
                    },
                    model_reduction: step.model_reduction,
                    minres_iters: step.minres_iters,
                    cg_iters: step.cg_iters,
                    hessian_rung: step.hessian_rung,
                    invariant_violations: step.invariant_violations,
                    merit_bound_held: step.merit_bound_held,
                });
                state = next;
            }
            Ok(Iteration::Stationary { .. }) => break RunStatus::Stationary,
            Err(e) => {
                record.message = Some(e.to_string());
                break RunStatus::Failed;
            }
        }
    };
    record.status = status;
    record.outer_iters = state.k;
    let x = if budget_mode {
        let sel = select_exact_iterate(&history, s.feas_tol).unwrap_or(history.len() - 1);
        record.selected_iterate = Some(history[sel].k);
        iterates.swap_remove(sel)
    } else {
        state.x
    };
    finish(record, x)
}

/// A budget-matched pair of runs on the same problem and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub inexact: RunRecord,
    pub exact: RunRecord,
    pub budget: usize,
}

/// Runs the inexact variant to termination, then the exact variant until it
/// has used at least as many MINRES iterations. The budget is checked
/// between outer iterations, so the exact variant may overshoot within its
/// last iteration.
pub fn run_budget_matched_pair(
    problem: &dyn Problem,
    cfg_inexact: &SolverConfig,
    cfg_exact: &SolverConfig,
    oracle: OracleKind,
    seed: u64,
    opts: &RunOptions,
) -> Result<ComparisonRecord, HarnessError> {
    let inexact = run_with(
        problem,
        cfg_inexact,
        oracle,
        seed,
        &RunOptions { strategy: Some(STRATEGY_INEXACT.into()), minres_budget: None, ..opts.clone() },
    );
    if inexact.status.is_failure() {
        return Err(HarnessError::InexactRunFailed(Box::new(inexact)));
    }
    let budget = inexact.minres_iters;
    let exact = run_with(
        problem,
        cfg_exact,
        oracle,
        seed,
        &RunOptions { strategy: Some(STRATEGY_EXACT.into()), minres_budget: Some(budget), ..opts.clone() },
    );
    Ok(ComparisonRecord { inexact, exact, budget })
}

/// Per-(strategy, ε_N) statistics over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: String,
    pub strategy: String,
    pub eps_n: f64,
    pub runs: usize,
    pub failed: usize,
    pub mean_feas_err: f64,
    pub mean_stat_err: f64,
    pub mean_minres_iters: f64,
    pub mean_outer_iters: f64,
    pub feas_err_min: f64,
    pub feas_err_median: f64,
    pub feas_err_max: f64,
    pub stat_err_min: f64,
    pub stat_err_median: f64,
    pub stat_err_max: f64,
}

fn min_median_max(mut v: Vec<f64>) -> (f64, f64, f64) {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    (v[0], median, v[n - 1])
}

/// Groups records by strategy and noise level, in first-seen order.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<SummaryRow>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Aggregate("no records".into()));
    }
    let mut groups: Vec<((String, u64), Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let key = (r.strategy.clone(), r.eps_n.to_bits());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|((strategy, bits), group)| {
            let problem = &group[0].problem;
            if let Some(other) = group.iter().find(|r| &r.problem != problem) {
                return Err(HarnessError::Aggregate(format!(
                    "group ({strategy}, {}) mixes problems '{problem}' and '{}'",
                    f64::from_bits(bits),
                    other.problem
                )));
            }
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&RunRecord) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            let (fmin, fmed, fmax) = min_median_max(group.iter().map(|r| r.feasibility_error).collect());
            let (smin, smed, smax) = min_median_max(group.iter().map(|r| r.stationarity_error).collect());
            Ok(SummaryRow {
                problem: problem.clone(),
                strategy,
                eps_n: f64::from_bits(bits),
                runs: group.len(),
                failed: group.iter().filter(|r| r.status.is_failure()).count(),
                mean_feas_err: mean(&|r| r.feasibility_error),
                mean_stat_err: mean(&|r| r.stationarity_error),
                mean_minres_iters: mean(&|r| r.minres_iters as f64),
                mean_outer_iters: mean(&|r| r.outer_iters as f64),
                feas_err_min: fmin,
                feas_err_median: fmed,
                feas_err_max: fmax,
                stat_err_min: smin,
                stat_err_median: smed,
                stat_err_max: smax,
            })
        })
        .collect()
}
