//! CSV renderings of the experiment tables.
//!
//! Floats use Rust's shortest round-trip formatting, so equal inputs give
//! byte-identical files. Cells with nothing to average hold `NA`.

use serde::Serialize;

use super::sweeps::{BenchRow, HistRow, SweepRow};
use super::ValidationRecord;
use crate::error::{Error, Result};

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// `method,gamma_db,value,n_trials`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let flat = rows.iter().map(|r| {
        (&r.method, r.gamma_db, r.value.map_or_else(|| "NA".to_string(), |v| v.to_string()), r.n_trials)
    });
    to_csv(flat, &["method", "gamma_db", "value", "n_trials"])
}

/// `method,bin_lo,bin_hi,count`.
pub fn histogram_csv(rows: &[HistRow]) -> Result<String> {
    to_csv(rows, &["method", "bin_lo", "bin_hi", "count"])
}

/// `trial,user,p_hat,radius,pass`.
pub fn validation_csv(rows: &[ValidationRecord]) -> Result<String> {
    to_csv(rows, &["trial", "user", "p_hat", "radius", "pass"])
}

/// One row per `(method, size)` with timing statistics and program shape.
pub fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    to_csv(
        rows,
        &[
            "method",
            "n_t",
            "k",
            "runs",
            "median_seconds",
            "iqr_seconds",
            "num_vars",
            "num_rows",
            "zero_blocks",
            "nonneg_blocks",
            "soc_blocks",
            "psd_blocks",
        ],
    )
}
