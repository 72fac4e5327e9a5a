//! The labeling protocols and the registry that builds them from a
//! parameter record.

mod cycle;
mod diagonal;
mod dispenser;
mod interval;
mod k_cycle;
mod naive;
mod randomized;
mod single_cycle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cycle::{ceil_sqrt, is_square, Await, Geometry, Next, Role};
pub use diagonal::{cantor, next_pair, Diagonal, DiagonalState};
pub use dispenser::{Dispenser, DispenserState};
pub use interval::{low_labels, IntervalSplit, IntervalState};
pub use k_cycle::{KCycle, KCycleState};
pub use naive::{Naive, NaiveState};
pub use randomized::{collision_probability, CubeState, RandomizedCube};
pub use single_cycle::{SingleCycle, SingleCycleState};

use crate::engine::{run, LeaderMode, Protocol, ProtocolTraits, RunLimits, RunRecord, TraceSink};
use crate::error::Error;
use crate::primitives::{Elected, ElectionParams, DEFAULT_C_ELECT, DEFAULT_C_PHASE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Naive,
    Dispenser,
    RandomizedCube,
    #[serde(rename = "interval-2n")]
    Interval2n,
    IntervalEps,
    SingleCycle,
    SingleCycleDiagonal,
    KCycle,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 8] = [
        ProtocolKind::Naive,
        ProtocolKind::Dispenser,
        ProtocolKind::RandomizedCube,
        ProtocolKind::Interval2n,
        ProtocolKind::IntervalEps,
        ProtocolKind::SingleCycle,
        ProtocolKind::SingleCycleDiagonal,
        ProtocolKind::KCycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Naive => "naive",
            ProtocolKind::Dispenser => "dispenser",
            ProtocolKind::RandomizedCube => "randomized-cube",
            ProtocolKind::Interval2n => "interval-2n",
            ProtocolKind::IntervalEps => "interval-eps",
            ProtocolKind::SingleCycle => "single-cycle",
            ProtocolKind::SingleCycleDiagonal => "single-cycle-diagonal",
            ProtocolKind::KCycle => "k-cycle",
        }
    }

    /// Parameters the protocol reads besides `n` and the leader mode.
    pub fn parameters(self) -> &'static [&'static str] {
        match self {
            ProtocolKind::Interval2n => &["c_phase"],
            ProtocolKind::IntervalEps => &["epsilon", "c_phase"],
            ProtocolKind::SingleCycle => &["generalized"],
            ProtocolKind::KCycle => &["k"],
            _ => &[],
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ProtocolKind::Naive => "equal labels: responder increments; silent, not safe",
            ProtocolKind::Dispenser => "leader hands out n..2 then takes 1",
            ProtocolKind::RandomizedCube => "informed agents draw uniformly from [1, n^3]",
            ProtocolKind::Interval2n => "interval splitting plus phase two, range [1, 2n]",
            ProtocolKind::IntervalEps => "interval splitting, range [1, (1+eps)n]",
            ProtocolKind::SingleCycle => "two dispensers, range [1, n], n + O(sqrt n) states",
            ProtocolKind::SingleCycleDiagonal => "diagonal dispensing without knowing n",
            ProtocolKind::KCycle => "k dispenser pairs over n/k sub-ranges",
        }
    }

    /// Whether the protocol relies on a unique leader.
    pub fn needs_leader(self) -> bool {
        self != ProtocolKind::Naive
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownProtocol(s.to_string()))
    }
}

/// Names of all registered protocols.
pub fn registry() -> Vec<&'static str> {
    ProtocolKind::ALL.iter().map(|k| k.name()).collect()
}

/// Everything needed to build one protocol instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_phase: Option<f64>,
    #[serde(default)]
    pub leader: LeaderMode,
    /// Single-cycle for non-square `n`.
    #[serde(default)]
    pub generalized: bool,
}

impl ProtocolConfig {
    pub fn new(kind: ProtocolKind, n: usize) -> Self {
        Self {
            kind,
            n,
            epsilon: None,
            k: None,
            c_phase: None,
            leader: LeaderMode::Oracle,
            generalized: false,
        }
    }

    pub fn with_epsilon(mut self, e: f64) -> Self {
        self.epsilon = Some(e);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_c_phase(mut self, c: f64) -> Self {
        self.c_phase = Some(c);
        self
    }

    pub fn with_leader(mut self, leader: LeaderMode) -> Self {
        self.leader = leader;
        self
    }

    pub fn generalized(mut self, on: bool) -> Self {
        self.generalized = on;
        self
    }

    pub fn c_phase_or_default(&self) -> f64 {
        self.c_phase.unwrap_or(DEFAULT_C_PHASE)
    }

    /// Checks the parameters by building the protocol once.
    pub fn validate(&self) -> Result<(), Error> {
        self.dispatch(Describe).map(|_| ())
    }

    pub fn traits(&self) -> Result<ProtocolTraits, Error> {
        self.dispatch(Describe).map(|d| d.traits)
    }

    pub fn declared_range(&self) -> Result<Option<u64>, Error> {
        self.dispatch(Describe).map(|d| d.range)
    }

    /// Generous interaction cap derived from the protocol's expected cost.
    pub fn default_max_interactions(&self) -> u64 {
        let n = self.n.max(2) as f64;
        let nln = n * n.ln().max(1.0);
        let eps = self.epsilon.unwrap_or(1.0).max(1e-6);
        let base = match self.kind {
            ProtocolKind::Naive => 50.0 * n * n * n,
            ProtocolKind::Dispenser => 50.0 * n * nln,
            ProtocolKind::RandomizedCube => 100.0 * nln,
            ProtocolKind::Interval2n => 400.0 * nln,
            ProtocolKind::IntervalEps => 400.0 * nln / eps,
            ProtocolKind::SingleCycle | ProtocolKind::SingleCycleDiagonal | ProtocolKind::KCycle => {
                20.0 * n * n * n
            }
        };
        let election = match self.leader {
            LeaderMode::Elected => 200.0 * nln,
            LeaderMode::Oracle => 0.0,
        };
        (base + election + 10_000.0).min(u64::MAX as f64 / 2.0) as u64
    }

    /// Builds the protocol, wraps it in leader election if requested, and
    /// hands it to `v`.
    pub fn dispatch<V: ProtocolVisitor>(&self, v: V) -> Result<V::Output, Error> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let unused = |name: &str, present: bool| -> Result<(), Error> {
            if present {
                Err(Error::InvalidParameter(format!("{} does not take {name}", self.kind)))
            } else {
                Ok(())
            }
        };
        if !matches!(self.kind, ProtocolKind::IntervalEps) {
            unused("epsilon", self.epsilon.is_some())?;
        }
        if !matches!(self.kind, ProtocolKind::KCycle) {
            unused("k", self.k.is_some())?;
        }
        if !matches!(self.kind, ProtocolKind::Interval2n | ProtocolKind::IntervalEps) {
            unused("c_phase", self.c_phase.is_some())?;
        }
        if !matches!(self.kind, ProtocolKind::SingleCycle) {
            unused("generalized", self.generalized)?;
        }
        match self.kind {
            ProtocolKind::Naive => {
                if self.leader == LeaderMode::Elected {
                    return Err(Error::InvalidParameter("naive has no leader to elect".into()));
                }
                Ok(v.visit(&Naive::new(n)))
            }
            ProtocolKind::Dispenser => self.with_leader_mode(Dispenser::new(n), v),
            ProtocolKind::RandomizedCube => self.with_leader_mode(RandomizedCube::new(n), v),
            ProtocolKind::Interval2n => {
                self.with_leader_mode(IntervalSplit::two_n(n, self.c_phase_or_default())?, v)
            }
            ProtocolKind::IntervalEps => {
                let e = self
                    .epsilon
                    .ok_or_else(|| Error::InvalidParameter("interval-eps needs epsilon".into()))?;
                self.with_leader_mode(IntervalSplit::epsilon(n, e, self.c_phase_or_default())?, v)
            }
            ProtocolKind::SingleCycle => {
                let p = if self.generalized {
                    SingleCycle::generalized(n)?
                } else {
                    SingleCycle::new(n)?
                };
                self.with_leader_mode(p, v)
            }
            ProtocolKind::SingleCycleDiagonal => self.with_leader_mode(Diagonal::new(n), v),
            ProtocolKind::KCycle => {
                let k = self.k.unwrap_or(1);
                self.with_leader_mode(KCycle::new(n, k)?, v)
            }
        }
    }

    fn with_leader_mode<P: Protocol, V: ProtocolVisitor>(&self, p: P, v: V) -> Result<V::Output, Error> {
        Ok(match self.leader {
            LeaderMode::Oracle => v.visit(&p),
            LeaderMode::Elected => {
                let params = ElectionParams::for_population(self.n, DEFAULT_C_ELECT);
                v.visit(&Elected::new(p, params))
            }
        })
    }
}

/// Generic operation over whichever concrete protocol a config builds.
pub trait ProtocolVisitor {
    type Output;
    fn visit<P: Protocol>(self, proto: &P) -> Self::Output;
}

struct Describe;

struct Description {
    traits: ProtocolTraits,
    range: Option<u64>,
}

impl ProtocolVisitor for Describe {
    type Output = Description;

    fn visit<P: Protocol>(self, proto: &P) -> Description {
        Description {
            traits: proto.traits(),
            range: proto.declared_range(),
        }
    }
}

struct RunVisitor<'a> {
    limits: &'a RunLimits,
    seed: u64,
    trace: Option<TraceSink>,
}

impl ProtocolVisitor for RunVisitor<'_> {
    type Output = Result<RunRecord, Error>;

    fn visit<P: Protocol>(self, proto: &P) -> Self::Output {
        match self.trace {
            None => run(proto, self.limits, self.seed).map(|o| o.record),
            Some(sink) if proto.population() >= 2 => {
                let mut sim = crate::engine::Simulation::new(proto, self.seed)?.with_trace(sink);
                let completed = sim.run_until(self.limits, &mut []);
                Ok(sim.finish(completed, self.limits).record)
            }
            Some(_) => run(proto, self.limits, self.seed).map(|o| o.record),
        }
    }
}

/// Runs one simulation of the configured protocol.
pub fn run_config(cfg: &ProtocolConfig, limits: &RunLimits, seed: u64) -> Result<RunRecord, Error> {
    cfg.dispatch(RunVisitor { limits, seed, trace: None })?
}

/// [`run_config`] writing every state change to `trace`.
pub fn run_config_traced(
    cfg: &ProtocolConfig,
    limits: &RunLimits,
    seed: u64,
    trace: TraceSink,
) -> Result<RunRecord, Error> {
    cfg.dispatch(RunVisitor { limits, seed, trace: Some(trace) })?
}
