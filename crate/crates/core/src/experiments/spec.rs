use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fit::Model;
use crate::engine::{mix_seed, LeaderMode, RunLimits};
use crate::error::Error;
use crate::labeling::{ProtocolConfig, ProtocolKind};

/// Declarative sweep: one protocol over a parameter grid.
///
/// ```json
/// {
///   "protocol": "interval-2n",
///   "grid": { "n": [128, 256], "leader": ["elected"] },
///   "trials": 200,
///   "master_seed": 1,
///   "fits": ["n-ln-n"]
/// }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub protocol: ProtocolKind,
    pub grid: Grid,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub limits: LimitsSpec,
    /// Single-cycle for non-square `n`.
    #[serde(default)]
    pub generalized: bool,
    /// Keep every per-trial record in the report.
    #[serde(default)]
    pub retain_records: bool,
    #[serde(default)]
    pub fits: Vec<Model>,
}

/// Parameter lists; the cells are their cartesian product in the order
/// `n`, `epsilon`, `k`, `c_phase`, `leader`. An empty list leaves the
/// parameter unset (its default).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n: Vec<usize>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub c_phase: Vec<f64>,
    #[serde(default)]
    pub leader: Vec<LeaderMode>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    /// Defaults to the protocol's own generous cap.
    #[serde(default)]
    pub max_interactions: Option<u64>,
    #[serde(default)]
    pub silence_check_period: Option<u64>,
    #[serde(default)]
    pub certify_limit: Option<usize>,
}

/// One grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub config: ProtocolConfig,
    /// Hash of the cell's parameters; seeds derive from it, so reordering
    /// or adding cells leaves other cells' trials untouched.
    pub key: u64,
}

impl Cell {
    pub fn new(config: ProtocolConfig) -> Self {
        let key = fnv1a(canonical(&config).as_bytes());
        Self { config, key }
    }

    pub fn trial_seed(&self, master: u64, trial: u64) -> u64 {
        mix_seed(master, &[self.key, trial])
    }
}

fn canonical(c: &ProtocolConfig) -> String {
    let opt_f = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    format!(
        "protocol={};n={};epsilon={};k={};c_phase={};leader={};generalized={}",
        c.kind,
        c.n,
        opt_f(c.epsilon),
        c.k.map(|k| k.to_string()).unwrap_or_default(),
        opt_f(c.c_phase),
        c.leader,
        c.generalized
    )
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn cells(&self) -> Vec<Cell> {
        fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let leaders = if self.grid.leader.is_empty() {
            vec![LeaderMode::Oracle]
        } else {
            self.grid.leader.clone()
        };
        let mut cells = Vec::new();
        for &n in &self.grid.n {
            for eps in axis(&self.grid.epsilon) {
                for k in axis(&self.grid.k) {
                    for c_phase in axis(&self.grid.c_phase) {
                        for &leader in &leaders {
                            let config = ProtocolConfig {
                                kind: self.protocol,
                                n,
                                epsilon: eps,
                                k,
                                c_phase,
                                leader,
                                generalized: self.generalized,
                            };
                            cells.push(Cell::new(config));
                        }
                    }
                }
            }
        }
        cells
    }

    /// Rejects unknown parameter combinations before any simulation.
    pub fn validate(&self) -> Result<(), Error> {
        if self.grid.n.is_empty() {
            return Err(Error::InvalidParameter("grid.n must list at least one population size".into()));
        }
        if self.limits.max_interactions == Some(0) {
            return Err(Error::InvalidParameter("max_interactions must be at least 1".into()));
        }
        self.cells().iter().try_for_each(|c| c.config.validate())
    }

    pub fn limits_for(&self, config: &ProtocolConfig) -> RunLimits {
        let mut l = RunLimits::new(
            self.limits
                .max_interactions
                .unwrap_or_else(|| config.default_max_interactions()),
        );
        if let Some(p) = self.limits.silence_check_period {
            l = l.with_check_period(p);
        }
        if let Some(c) = self.limits.certify_limit {
            l = l.with_certify_limit(c);
        }
        l
    }
}
