//! Configuration input and run output.

pub mod config;
pub mod snapshot;
pub mod timeseries;
pub mod vtk;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::DirectorField;
use crate::manufactured::ConvergenceReport;
use crate::stepper::{RunObserver, StepRecord};

pub use config::{load_config, parse_config, InitialCondition, OutputConfig, RunConfig};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use timeseries::{read_timeseries, write_timeseries, TimeSeriesRow, TimeSeriesWriter};
pub use vtk::write_vtk;

/// Creates `dir` if needed and checks that files can be written into it.
pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".rdg-write-test");
    File::create(&probe).map_err(|e| Error::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Writes `timeseries.csv` (one row per accepted step) and numbered snapshots
/// into an output directory.
pub struct FileSink {
    dir: PathBuf,
    series: TimeSeriesWriter,
    vtk: bool,
    snapshots: usize,
}

impl FileSink {
    pub fn create(dir: &Path, vtk: bool) -> Result<Self> {
        prepare_output_dir(dir)?;
        Ok(FileSink {
            dir: dir.to_path_buf(),
            series: TimeSeriesWriter::create(&dir.join("timeseries.csv"))?,
            vtk,
            snapshots: 0,
        })
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshots
    }
}

impl RunObserver for FileSink {
    fn on_step(&mut self, record: &StepRecord, _n: &DirectorField) -> Result<()> {
        self.series.write(&TimeSeriesRow::from(record))
    }

    fn on_snapshot(&mut self, t: f64, n: &DirectorField) -> Result<()> {
        let stem = format!("snap_{:05}", self.snapshots);
        write_snapshot(&self.dir.join(format!("{stem}.rdg")), t, n)?;
        if self.vtk {
            write_vtk(&self.dir.join(format!("{stem}.vtk")), t, n)?;
        }
        self.snapshots += 1;
        Ok(())
    }

    fn on_finish(&mut self) -> Result<()> {
        self.series.flush()
    }
}

/// One row per refinement level with errors and observed orders per component.
pub fn write_convergence_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "{},err_n1,err_n2,err_n3,order_n1,order_n2,order_n3,mean_fevals\n",
        report.parameter_name
    ));
    let orders = report.observed_orders();
    for (i, row) in report.rows.iter().enumerate() {
        let ord = |c: usize| i.checked_sub(1).map_or(String::new(), |j| format!("{:.6}", orders[j][c]));
        out.push_str(&format!(
            "{:e},{:.16e},{:.16e},{:.16e},{},{},{},{:.4}\n",
            row.parameter,
            row.errors[0],
            row.errors[1],
            row.errors[2],
            ord(0),
            ord(1),
            ord(2),
            row.mean_fevals
        ));
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
