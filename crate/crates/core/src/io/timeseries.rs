//! Per-step CSV time series.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::stepper::StepRecord;

pub const HEADER: &str =
    "step,t,tau,F_total,F_splay,F_twist,F_bend,linf_length_err,newton_iters,krylov_iters,fevals,converged";

/// Rows are flushed to disk at least this often.
pub const FLUSH_INTERVAL: usize = 100;

/// One CSV row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSeriesRow {
    pub step: usize,
    pub t: f64,
    pub tau: f64,
    pub energy: EnergyBreakdown,
    pub linf_length_err: f64,
    pub newton_iters: usize,
    pub krylov_iters: usize,
    pub fevals: usize,
    pub converged: bool,
}

impl TimeSeriesRow {
    /// Floats use 17 significant digits, enough to round-trip exactly.
    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{}",
            self.step,
            self.t,
            self.tau,
            self.energy.total,
            self.energy.splay,
            self.energy.twist,
            self.energy.bend,
            self.linf_length_err,
            self.newton_iters,
            self.krylov_iters,
            self.fevals,
            u8::from(self.converged)
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 12 {
            return Err(Error::Format(format!("expected 12 columns, got {}", fields.len())));
        }
        let float = |i: usize| {
            fields[i]
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("column {i}: bad number `{}`", fields[i])))
        };
        let int = |i: usize| {
            fields[i]
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("column {i}: bad integer `{}`", fields[i])))
        };
        Ok(TimeSeriesRow {
            step: int(0)?,
            t: float(1)?,
            tau: float(2)?,
            energy: EnergyBreakdown {
                total: float(3)?,
                splay: float(4)?,
                twist: float(5)?,
                bend: float(6)?,
            },
            linf_length_err: float(7)?,
            newton_iters: int(8)?,
            krylov_iters: int(9)?,
            fevals: int(10)?,
            converged: match fields[11] {
                "1" => true,
                "0" => false,
                other => return Err(Error::Format(format!("column 11: bad flag `{other}`"))),
            },
        })
    }
}

impl From<&StepRecord> for TimeSeriesRow {
    fn from(r: &StepRecord) -> Self {
        TimeSeriesRow {
            step: r.step,
            t: r.t,
            tau: r.tau,
            energy: r.energy,
            linf_length_err: r.linf_length_error,
            newton_iters: r.stats.newton_iters,
            krylov_iters: r.stats.krylov_iters_total,
            fevals: r.stats.function_evals,
            converged: r.stats.converged,
        }
    }
}

/// Streams rows to a CSV file.
pub struct TimeSeriesWriter {
    path: PathBuf,
    out: BufWriter<File>,
    unflushed: usize,
}

impl TimeSeriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = TimeSeriesWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            unflushed: 0,
        };
        writeln!(w.out, "{HEADER}").map_err(|e| Error::io(path, e))?;
        Ok(w)
    }

    pub fn write(&mut self, row: &TimeSeriesRow) -> Result<()> {
        writeln!(self.out, "{}", row.to_csv()).map_err(|e| Error::io(&self.path, e))?;
        self.unflushed += 1;
        if self.unflushed >= FLUSH_INTERVAL {
            self.flush()?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.unflushed = 0;
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes one row per record.
pub fn write_timeseries(path: &Path, records: &[StepRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no step records to write".into()));
    }
    let mut w = TimeSeriesWriter::create(path)?;
    for r in records {
        w.write(&TimeSeriesRow::from(r))?;
    }
    w.flush()
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeSeriesRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty time series".into()))?
        .map_err(|e| Error::io(path, e))?;
    if header.trim() != HEADER {
        return Err(Error::Format(format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            rows.push(TimeSeriesRow::parse(&line)?);
        }
    }
    Ok(rows)
}
