use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fit::{FitPoint, FitResult};
use super::spec::ExperimentSpec;
use super::sweep::{CellSummary, SweepResult};
use crate::engine::LeaderMode;
use crate::error::Error;

pub const CELLS_FILE: &str = "cells.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "plot.csv";

/// One row of `cells.csv`. Field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub protocol: String,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub k: Option<usize>,
    pub c_phase: Option<f64>,
    pub leader_mode: LeaderMode,
    pub trials: usize,
    pub completed: usize,
    pub mean_interactions: Option<f64>,
    pub std_interactions: Option<f64>,
    pub stderr: Option<f64>,
    pub median: Option<f64>,
    pub p95: Option<f64>,
    pub max: Option<f64>,
    pub census_max: Option<usize>,
    pub validity_failures: usize,
    pub safety_violations: usize,
}

impl From<&CellSummary> for CellRow {
    fn from(c: &CellSummary) -> Self {
        let s = c.interactions;
        Self {
            protocol: c.protocol.clone(),
            n: c.n,
            epsilon: c.epsilon,
            k: c.k,
            c_phase: c.c_phase,
            leader_mode: c.leader_mode,
            trials: c.trials,
            completed: c.completed,
            mean_interactions: s.map(|s| s.mean),
            std_interactions: s.map(|s| s.std),
            stderr: s.map(|s| s.stderr),
            median: s.map(|s| s.median),
            p95: s.map(|s| s.p95),
            max: s.map(|s| s.max),
            census_max: c.census_max,
            validity_failures: c.validity_failures,
            safety_violations: c.safety_violations,
        }
    }
}

impl CellRow {
    pub fn fit_point(&self) -> Option<FitPoint> {
        self.mean_interactions.map(|mean| FitPoint {
            n: self.n,
            epsilon: self.epsilon,
            mean,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub model: String,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub predictor: f64,
    pub measured_mean: f64,
    pub fitted: f64,
}

/// Structured sweep report, written as `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ExperimentSpec>,
    pub interrupted: bool,
    pub cells: Vec<CellSummary>,
    #[serde(default)]
    pub fits: Vec<FitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<Vec<crate::engine::RunRecord>>>,
}

impl Report {
    pub fn new(spec: Option<&ExperimentSpec>, result: SweepResult, fits: Vec<FitResult>) -> Self {
        Self {
            spec: spec.cloned(),
            interrupted: result.interrupted,
            cells: result.cells,
            fits,
            records: result.records,
        }
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Paths of the files [`emit`] wrote.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Emitted {
    pub cells: PathBuf,
    pub report: PathBuf,
    pub plot: PathBuf,
}

pub fn plot_rows(fits: &[FitResult]) -> Vec<PlotRow> {
    fits.iter()
        .flat_map(|f| {
            f.residuals.iter().map(move |r| PlotRow {
                model: f.model.name().to_string(),
                n: r.n,
                epsilon: r.epsilon,
                predictor: r.predictor,
                measured_mean: r.measured,
                fitted: r.fitted,
            })
        })
        .collect()
}

pub fn write_cells_csv(path: &Path, cells: &[CellSummary]) -> Result<(), Error> {
    write_csv(path, cells.iter().map(CellRow::from), CELL_COLUMNS)
}

pub fn write_plot_csv(path: &Path, fits: &[FitResult]) -> Result<(), Error> {
    write_csv(path, plot_rows(fits).into_iter(), PLOT_COLUMNS)
}

pub const CELL_COLUMNS: &[&str] = &[
    "protocol",
    "n",
    "epsilon",
    "k",
    "c_phase",
    "leader_mode",
    "trials",
    "completed",
    "mean_interactions",
    "std_interactions",
    "stderr",
    "median",
    "p95",
    "max",
    "census_max",
    "validity_failures",
    "safety_violations",
];

const PLOT_COLUMNS: &[&str] = &["model", "n", "epsilon", "predictor", "measured_mean", "fitted"];

fn write_csv<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>, header: &[&str]) -> Result<(), Error> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    // Header written by hand so empty tables still carry it.
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_cells_csv(path: &Path) -> Result<Vec<CellRow>, Error> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Writes `cells.csv`, `report.json` and `plot.csv` into `dir`, creating it.
pub fn emit(dir: &Path, report: &Report) -> Result<Emitted, Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let out = Emitted {
        cells: dir.join(CELLS_FILE),
        report: dir.join(REPORT_FILE),
        plot: dir.join(PLOT_FILE),
    };
    write_cells_csv(&out.cells, &report.cells)?;
    let json = serde_json::to_string_pretty(report).map_err(|source| Error::Json {
        path: out.report.clone(),
        source,
    })?;
    fs::write(&out.report, json + "\n").map_err(|e| Error::io(&out.report, e))?;
    write_plot_csv(&out.plot, &report.fits)?;
    Ok(out)
}
