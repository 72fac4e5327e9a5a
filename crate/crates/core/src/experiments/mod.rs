//! Declarative sweeps, aggregation, model fitting and report files.

pub mod calibrate;
mod consistency;
mod emit;
mod fit;
mod spec;
pub mod stats;
mod sweep;

pub use calibrate::{calibrate, Calibration, Primitive};
pub use consistency::{check_cell, check_cells, CellCheck};
pub use emit::{
    emit, plot_rows, read_cells_csv, write_cells_csv, write_plot_csv, CellRow, Emitted, PlotRow, Report,
    CELLS_FILE, CELL_COLUMNS, PLOT_FILE, REPORT_FILE,
};
pub use fit::{fit, fit_points, loglog_slope, FitPoint, FitResult, Model, Residual};
pub use spec::{Cell, ExperimentSpec, Grid, LimitsSpec};
pub use sweep::{default_jobs, sweep, CellSummary, SweepOptions, SweepResult, JOBS_ENV};
