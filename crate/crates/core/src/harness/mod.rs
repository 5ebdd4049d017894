//! Seeded runs, budget-matched comparisons, aggregation and result files.

mod config;
mod output;
mod run;
mod sweep;

pub use config::{ExperimentConfig, HarnessParams, OracleChoice, OracleConfig, OutputFormat, ProblemConfig, OUTPUT_DIR_ENV};
pub use output::{emit_csv, emit_json, emit_summary_csv, fmt_float, read_csv, write_records_csv, CsvRow, CSV_COLUMNS};
pub use run::{
    aggregate, kkt_metrics, run_budget_matched_pair, run_single, run_with, select_exact_iterate, ComparisonRecord,
    IterateMetrics, IterationRow, RunOptions, RunRecord, RunStatus, SummaryRow, STRATEGY_EXACT, STRATEGY_INEXACT,
};
pub use sweep::{run_sweep, write_outputs, SweepOutcome};

use crate::problem::ProblemError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("aggregation: {0}")]
    Aggregate(String),
    #[error("inexact run failed (seed {}): {}", .0.seed, .0.message.as_deref().unwrap_or("unknown error"))]
    InexactRunFailed(Box<RunRecord>),
}
