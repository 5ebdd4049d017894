use super::run::{RunRecord, SummaryRow};
use super::HarnessError;
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const CSV_COLUMNS: [&str; 9] =
    ["problem", "strategy", "eps_n", "seed", "feas_err", "stat_err", "minres_iters", "outer_iters", "status"];

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io { path: path.to_path_buf(), source: std::io::Error::other(e) }
}

fn create(path: &Path) -> Result<File, HarnessError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    File::create(path).map_err(io_err(path))
}

pub fn write_records_csv<W: Write>(records: &[RunRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            r.problem.clone(),
            r.strategy.clone(),
            fmt_float(r.eps_n),
            r.seed.to_string(),
            fmt_float(r.feasibility_error),
            fmt_float(r.stationarity_error),
            r.minres_iters.to_string(),
            r.outer_iters.to_string(),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    let file = create(path)?;
    write_records_csv(records, BufWriter::new(file)).map_err(csv_err(path))
}

pub fn emit_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<(), HarnessError> {
    let file = create(path)?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: std::io::Error::other(e) })?;
    w.flush().map_err(io_err(path))
}

pub fn emit_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<(), HarnessError> {
    let file = create(path)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let write = |w: &mut csv::Writer<_>| -> csv::Result<()> {
        w.write_record([
            "problem",
            "strategy",
            "eps_n",
            "runs",
            "failed",
            "mean_feas_err",
            "mean_stat_err",
            "mean_minres_iters",
            "mean_outer_iters",
            "feas_err_min",
            "feas_err_median",
            "feas_err_max",
            "stat_err_min",
            "stat_err_median",
            "stat_err_max",
        ])?;
        for r in rows {
            let mut rec = vec![r.problem.clone(), r.strategy.clone(), fmt_float(r.eps_n), r.runs.to_string(), r.failed.to_string()];
            rec.extend(
                [
                    r.mean_feas_err,
                    r.mean_stat_err,
                    r.mean_minres_iters,
                    r.mean_outer_iters,
                    r.feas_err_min,
                    r.feas_err_median,
                    r.feas_err_max,
                    r.stat_err_min,
                    r.stat_err_median,
                    r.stat_err_max,
                ]
                .map(fmt_float),
            );
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(csv_err(path))
}

/// One row of the results CSV, as read back.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct CsvRow {
    pub problem: String,
    pub strategy: String,
    pub eps_n: f64,
    pub seed: u64,
    pub feas_err: f64,
    pub stat_err: f64,
    pub minres_iters: usize,
    pub outer_iters: usize,
    pub status: String,
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<Vec<CsvRow>, _>>().map_err(csv_err(path))
}
