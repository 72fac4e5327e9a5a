//! Calibration of the primitives' constants, stored as versioned JSON
//! fixtures.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::Summary;
use super::sweep::thread_pool;
use crate::engine::{mix_seed, run, LeaderMode, Protocol, RunLimits, Simulation};
use crate::error::Error;
use crate::labeling::{IntervalSplit, IntervalState};
use crate::primitives::{count_leaders, Broadcast, ElectionParams, LeaderElection};

pub const FIXTURE_VERSION: u32 = 1;

/// Candidate election round multipliers, smallest first.
pub const ELECTION_GRID: &[f64] = &[0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];
/// Candidate phase multipliers, smallest first.
pub const PHASE_GRID: &[f64] = &[0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0];
/// Share of runs that must meet the target for a grid value to qualify.
pub const PHASE_SUCCESS_RATE: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Primitive {
    Broadcast,
    Election,
    Phase,
}

impl Primitive {
    pub fn name(self) -> &'static str {
        match self {
            Primitive::Broadcast => "broadcast",
            Primitive::Election => "election",
            Primitive::Phase => "phase",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Primitive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [Primitive::Broadcast, Primitive::Election, Primitive::Phase]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown primitive `{s}` (broadcast, election, phase)")))
    }
}

/// Outcome for one candidate constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub constant: f64,
    pub successes: usize,
    pub trials: usize,
    /// Mean interactions over `n ln n`.
    pub mean_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub primitive: Primitive,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// `None` when no grid value met the target.
    pub constant: Option<f64>,
    /// How `constant` was derived.
    pub statistic: String,
    /// Completion interactions over `n ln n` (broadcast only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Summary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<GridPoint>,
}

impl Calibration {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: Calibration = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if c.version != FIXTURE_VERSION {
            return Err(Error::InvalidParameter(format!(
                "{}: fixture version {} is not {FIXTURE_VERSION}",
                path.display(),
                c.version
            )));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let json = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}

fn n_ln_n(n: usize) -> f64 {
    let n = n as f64;
    n * n.ln()
}

fn trial_seed(seed: u64, tag: u64, j: usize) -> u64 {
    mix_seed(seed, &[tag, j as u64])
}

pub fn calibrate(
    primitive: Primitive,
    n: usize,
    trials: usize,
    seed: u64,
    jobs: Option<usize>,
) -> Result<Calibration, Error> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("calibration needs n >= 2, got {n}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("calibration needs at least one trial".into()));
    }
    let pool = thread_pool(jobs)?;
    let mut out = Calibration {
        version: FIXTURE_VERSION,
        primitive,
        n,
        trials,
        seed,
        constant: None,
        statistic: String::new(),
        ratios: None,
        grid: Vec::new(),
    };
    match primitive {
        Primitive::Broadcast => {
            let ratios = pool.install(|| broadcast_ratios(n, trials, seed))?;
            out.ratios = Summary::from_values(&ratios);
            out.constant = out.ratios.map(|s| s.max);
            out.statistic = "max of completion interactions / (n ln n)".into();
        }
        Primitive::Election => {
            for (g, &c) in ELECTION_GRID.iter().enumerate() {
                let point = pool.install(|| election_point(n, trials, seed, g as u64, c))?;
                let ok = point.successes == point.trials;
                out.grid.push(point);
                if ok {
                    out.constant = Some(c);
                    break;
                }
            }
            out.statistic = "smallest c_elect with a unique leader in every run".into();
        }
        Primitive::Phase => {
            for (g, &c) in PHASE_GRID.iter().enumerate() {
                let point = pool.install(|| phase_point(n, trials, seed, g as u64, c))?;
                let ok = point.successes as f64 >= PHASE_SUCCESS_RATE * point.trials as f64;
                out.grid.push(point);
                if ok {
                    out.constant = Some(c);
                    break;
                }
            }
            out.statistic = "smallest c_phase with fewer than n/4 unlabeled at the leader's latch in 99% of runs".into();
        }
    }
    Ok(out)
}

/// Completion interactions of a single-source broadcast, over `n ln n`.
pub fn broadcast_ratios(n: usize, trials: usize, seed: u64) -> Result<Vec<f64>, Error> {
    let proto = Broadcast::new(n);
    let limits = RunLimits::new(u64::MAX).with_certify_limit(0);
    (0..trials)
        .into_par_iter()
        .map(|j| {
            let out = run(&proto, &limits, trial_seed(seed, 0, j))?;
            Ok(out.record.interactions_used as f64 / n_ln_n(n))
        })
        .collect()
}

fn election_point(n: usize, trials: usize, seed: u64, tag: u64, c: f64) -> Result<GridPoint, Error> {
    let proto = LeaderElection::new(n, ElectionParams::for_population(n, c), LeaderMode::Elected);
    let limits = RunLimits::new(u64::MAX).with_certify_limit(0);
    let runs: Vec<(bool, u64)> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let out = run(&proto, &limits, trial_seed(seed, 1 + tag, j))?;
            let unique = count_leaders(out.final_config.states()) == 1;
            Ok((unique, out.record.interactions_used))
        })
        .collect::<Result<_, Error>>()?;
    Ok(grid_point(c, n, &runs))
}

fn phase_point(n: usize, trials: usize, seed: u64, tag: u64, c: f64) -> Result<GridPoint, Error> {
    let proto = IntervalSplit::two_n(n, c)?;
    let runs: Vec<(bool, u64)> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let (unlabeled, at) = unlabeled_at_latch(&proto, trial_seed(seed, 100 + tag, j))?;
            Ok((unlabeled * 4 < n, at))
        })
        .collect::<Result<_, Error>>()?;
    Ok(grid_point(c, n, &runs))
}

fn grid_point(c: f64, n: usize, runs: &[(bool, u64)]) -> GridPoint {
    let total: f64 = runs.iter().map(|r| r.1 as f64).sum();
    GridPoint {
        constant: c,
        successes: runs.iter().filter(|r| r.0).count(),
        trials: runs.len(),
        mean_ratio: total / runs.len() as f64 / n_ln_n(n),
    }
}

/// Runs the interval protocol until the leader's counter latches and
/// returns the unlabeled count at that moment and the interaction index.
pub fn unlabeled_at_latch(proto: &IntervalSplit, seed: u64) -> Result<(usize, u64), Error> {
    let n = proto.population();
    let mut sim = Simulation::new(proto, seed)?;
    let latched = |s: &IntervalState| {
        matches!(
            s,
            IntervalState::Holder { leader: Some(c), .. } | IntervalState::Leaf { leader: Some(c), .. }
                if c.is_latched()
        )
    };
    // Generous cap; the counter ticks on every leader interaction.
    let cap = 1000 * n as u64 * (proto.threshold() as u64 + 1);
    while sim.steps() < cap {
        let step = sim.step(&mut []);
        if !step.changed {
            continue;
        }
        let (i, j) = step.pair;
        let states = sim.config().states();
        let (a, b) = (&states[i], &states[j]);
        if latched(a) || latched(b) {
            let unlabeled = states.iter().filter(|s| matches!(s, IntervalState::Unlabeled)).count();
            return Ok((unlabeled, sim.steps()));
        }
    }
    Err(Error::InvalidParameter(format!("leader counter did not latch within {cap} interactions")))
}
