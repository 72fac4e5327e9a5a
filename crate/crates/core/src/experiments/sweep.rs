use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{Cell, ExperimentSpec};
use super::stats::Summary;
use crate::engine::{LeaderMode, RunRecord};
use crate::error::Error;
use crate::labeling::{run_config, ProtocolConfig, ProtocolKind};
use crate::primitives::DEFAULT_C_PHASE;

/// Environment variable giving the default worker count.
pub const JOBS_ENV: &str = "POPLABEL_JOBS";

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` reads [`JOBS_ENV`], falling back to all cores.
    pub jobs: Option<usize>,
    /// Raised to stop starting new trials; finished trials are kept.
    pub cancel: Option<Arc<AtomicBool>>,
}

/// Aggregate of one grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub protocol: String,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub k: Option<usize>,
    /// Effective phase constant for the interval protocols.
    pub c_phase: Option<f64>,
    pub leader_mode: LeaderMode,
    #[serde(default)]
    pub generalized: bool,
    /// Trials actually run.
    pub trials: usize,
    pub requested_trials: usize,
    pub completed: usize,
    /// Interaction statistics over completed trials.
    pub interactions: Option<Summary>,
    pub census_min: Option<usize>,
    pub census_max: Option<usize>,
    pub max_label: Option<u64>,
    pub validity_failures: usize,
    /// Trials with at least one safety violation.
    pub safety_violations: usize,
    /// Trials whose final configuration failed exhaustive certification.
    pub certification_failures: usize,
    /// Set when the sweep was interrupted before this cell finished.
    pub incomplete: bool,
}

impl CellSummary {
    pub fn completion_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.completed as f64 / self.trials as f64
        }
    }

    pub fn config(&self) -> Result<ProtocolConfig, Error> {
        let kind: ProtocolKind = self.protocol.parse()?;
        let c_phase = match kind {
            ProtocolKind::Interval2n | ProtocolKind::IntervalEps => self.c_phase,
            _ => None,
        };
        Ok(ProtocolConfig {
            kind,
            n: self.n,
            epsilon: self.epsilon,
            k: self.k,
            c_phase,
            leader: self.leader_mode,
            generalized: self.generalized,
        })
    }

    pub fn from_records(config: &ProtocolConfig, requested: usize, records: &[RunRecord]) -> Self {
        let done: Vec<f64> = records
            .iter()
            .filter(|r| r.completed)
            .map(|r| r.interactions_used as f64)
            .collect();
        let c_phase = match config.kind {
            ProtocolKind::Interval2n | ProtocolKind::IntervalEps => {
                Some(config.c_phase.unwrap_or(DEFAULT_C_PHASE))
            }
            _ => None,
        };
        Self {
            protocol: config.kind.name().to_string(),
            n: config.n,
            epsilon: config.epsilon,
            k: config.k,
            c_phase,
            leader_mode: config.leader,
            generalized: config.generalized,
            trials: records.len(),
            requested_trials: requested,
            completed: done.len(),
            interactions: Summary::from_values(&done),
            census_min: records.iter().map(|r| r.census).min(),
            census_max: records.iter().map(|r| r.census).max(),
            max_label: records
                .iter()
                .flat_map(|r| r.final_labels.iter().flatten())
                .map(|l| l.0)
                .max(),
            validity_failures: records.iter().filter(|r| r.validity.is_failure()).count(),
            safety_violations: records.iter().filter(|r| !r.safety.is_ok()).count(),
            certification_failures: records
                .iter()
                .filter(|r| r.silence_certified == Some(false))
                .count(),
            incomplete: records.len() < requested,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cells: Vec<CellSummary>,
    /// Per-cell trial records, when the spec asks to retain them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<Vec<RunRecord>>>,
    pub interrupted: bool,
}

pub fn default_jobs() -> usize {
    std::env::var(JOBS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub(crate) fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Error> {
    let jobs = jobs.unwrap_or_else(default_jobs).max(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {jobs} workers: {e}")))
}

/// Runs every trial of every cell. Summaries follow grid order whatever
/// order the trials finish in.
pub fn sweep(spec: &ExperimentSpec, opts: &SweepOptions) -> Result<SweepResult, Error> {
    spec.validate()?;
    if spec.trials == 0 {
        return Ok(SweepResult {
            cells: Vec::new(),
            records: spec.retain_records.then(Vec::new),
            interrupted: false,
        });
    }
    let cells = spec.cells();
    let tasks: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..spec.trials as u64).map(move |j| (c, j)))
        .collect();
    let pool = thread_pool(opts.jobs)?;
    let cancelled = || opts.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed));
    let run_one = |&(c, j): &(usize, u64)| -> Option<Result<RunRecord, Error>> {
        if cancelled() {
            return None;
        }
        let cell: &Cell = &cells[c];
        let limits = spec.limits_for(&cell.config);
        Some(run_config(&cell.config, &limits, cell.trial_seed(spec.master_seed, j)))
    };
    let outcomes: Vec<Option<Result<RunRecord, Error>>> =
        pool.install(|| tasks.par_iter().map(run_one).collect());

    let mut per_cell: Vec<Vec<RunRecord>> = vec![Vec::new(); cells.len()];
    let mut interrupted = false;
    for ((c, _), out) in tasks.iter().zip(outcomes) {
        match out {
            Some(r) => per_cell[*c].push(r?),
            None => interrupted = true,
        }
    }
    let summaries = cells
        .iter()
        .zip(&per_cell)
        .map(|(cell, recs)| CellSummary::from_records(&cell.config, spec.trials, recs))
        .collect();
    Ok(SweepResult {
        cells: summaries,
        records: spec.retain_records.then_some(per_cell),
        interrupted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> ExperimentSpec {
        ExperimentSpec::from_json(json).unwrap()
    }

    #[test]
    fn zero_trials_is_empty() {
        let s = spec(r#"{"protocol":"single-cycle","grid":{"n":[4]},"trials":0,"master_seed":1}"#);
        let r = sweep(&s, &SweepOptions::default()).unwrap();
        assert!(r.cells.is_empty());
    }

    #[test]
    fn single_cycle_small_grid() {
        let s = spec(r#"{"protocol":"single-cycle","grid":{"n":[4,16]},"trials":10,"master_seed":1}"#);
        let r = sweep(&s, &SweepOptions { jobs: Some(2), cancel: None }).unwrap();
        assert_eq!(r.cells.len(), 2);
        for c in &r.cells {
            assert_eq!(c.completion_rate(), 1.0);
            assert_eq!(c.validity_failures, 0);
            assert_eq!(c.safety_violations, 0);
        }
        assert_eq!(r.cells[0].n, 4);
        assert_eq!(r.cells[1].n, 16);
    }

    #[test]
    fn jobs_do_not_change_results() {
        let s = spec(r#"{"protocol":"interval-2n","grid":{"n":[32,64]},"trials":6,"master_seed":3}"#);
        let a = sweep(&s, &SweepOptions { jobs: Some(1), cancel: None }).unwrap();
        let b = sweep(&s, &SweepOptions { jobs: Some(3), cancel: None }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cancelled_sweep_is_flagged() {
        let s = spec(r#"{"protocol":"dispenser","grid":{"n":[8]},"trials":5,"master_seed":3}"#);
        let flag = Arc::new(AtomicBool::new(true));
        let r = sweep(&s, &SweepOptions { jobs: Some(1), cancel: Some(flag) }).unwrap();
        assert!(r.interrupted);
        assert!(r.cells[0].incomplete);
        assert_eq!(r.cells[0].trials, 0);
    }
}
