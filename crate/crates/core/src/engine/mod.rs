//! The execution model: a population of anonymous agents, a uniformly random
//! ordered-pair scheduler, and a protocol's joint transition function.
//!
//! Every protocol in this crate implements [`Protocol`]. The engine never
//! exposes agent indices to the transition function; indices exist only so
//! that monitors, traces and tests can follow individual agents.

mod counts;
mod scheduler;
mod sim;
mod trace;

use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

pub use counts::{is_silent_among, is_silent_exhaustive, StateCounts};
pub use scheduler::{mix_seed, AuxRandom, Scheduler};
pub use sim::{
    run, run_monitored, Monitor, RunLimits, RunOutcome, RunRecord, Simulation, StepOutcome,
};
pub use trace::TraceSink;

/// An output label. Labels are positive integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u64);

impl Label {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How the unique leader a protocol needs comes to exist.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeaderMode {
    /// Agent 0 starts in the leader state.
    #[default]
    Oracle,
    /// All agents start identically and run leader election first.
    Elected,
}

impl LeaderMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LeaderMode::Oracle => "oracle",
            LeaderMode::Elected => "elected",
        }
    }
}

impl fmt::Display for LeaderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LeaderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(LeaderMode::Oracle),
            "elected" => Ok(LeaderMode::Elected),
            other => Err(format!("unknown leader mode '{other}' (expected oracle or elected)")),
        }
    }
}

/// Static guarantees a protocol claims; the verify module decides which
/// lower bounds apply from these.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolTraits {
    /// The protocol assigns labels at all (broadcast and election do not).
    pub labeling: bool,
    /// Every run eventually reaches a terminal configuration.
    pub silent: bool,
    /// An assigned label is never changed.
    pub safe: bool,
    /// Labels are handed out from pairwise disjoint pools.
    pub pool: bool,
    /// Validity holds with probability one given a unique leader.
    pub certain_validity: bool,
}

impl ProtocolTraits {
    /// Whether the silent+safe state lower bound is meaningful for this
    /// protocol.
    pub fn state_bound_applies(&self) -> bool {
        self.labeling && self.silent && self.safe && self.certain_validity
    }
}

/// A population protocol with the population size embedded in its
/// parameters.
///
/// `delta` must be a pure function of the two states and of whatever it
/// draws from the auxiliary random channel. Randomized protocols draw lazily,
/// so deterministic protocols never consume auxiliary randomness.
pub trait Protocol: Sync {
    type State: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync;

    fn name(&self) -> &'static str;

    /// Number of agents `n`.
    fn population(&self) -> usize;

    /// Common initial state of the non-leader agents (all agents in
    /// uniform mode).
    fn initial_state(&self) -> Self::State;

    /// Pre-assigned leader state for oracle-leader mode.
    fn leader_state(&self) -> Option<Self::State> {
        None
    }

    fn delta(
        &self,
        initiator: &Self::State,
        responder: &Self::State,
        aux: &mut AuxRandom,
    ) -> (Self::State, Self::State);

    fn output(&self, state: &Self::State) -> Option<Label>;

    /// Upper end `R` of the label range `[1, R]`; `None` for protocols that
    /// do not label.
    fn declared_range(&self) -> Option<u64>;

    fn traits(&self) -> ProtocolTraits;

    /// Stable textual encoding used in trace dumps.
    fn encode(&self, state: &Self::State) -> String {
        format!("{state:?}")
    }

    /// Protocol-specific terminality test over the multiset of present
    /// states. Must agree with [`is_silent_exhaustive`]; returning `None`
    /// falls back to the exhaustive check.
    fn quick_silent(&self, _present: &StateCounts<Self::State>) -> Option<bool> {
        None
    }

    /// Label reported for a population of one agent.
    fn singleton_label(&self) -> Option<Label> {
        self.declared_range().map(|_| Label(1))
    }
}

/// The vector of agent states, indexed by simulation position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration<S> {
    states: Vec<S>,
}

impl<S: Clone> Configuration<S> {
    /// All agents in `initial`, except agent 0 which holds `leader` if given.
    pub fn uniform(n: usize, initial: S, leader: Option<S>) -> Self {
        let mut states = vec![initial; n];
        if let (Some(l), Some(first)) = (leader, states.first_mut()) {
            *first = l;
        }
        Self { states }
    }

    pub fn from_states(states: Vec<S>) -> Self {
        Self { states }
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn get(&self, agent: usize) -> &S {
        &self.states[agent]
    }

    pub(crate) fn set(&mut self, agent: usize, state: S) {
        self.states[agent] = state;
    }

    pub fn into_states(self) -> Vec<S> {
        self.states
    }
}

/// Initial configuration of `proto` in its own leader mode.
pub fn initial_configuration<P: Protocol>(proto: &P) -> Configuration<P::State> {
    Configuration::uniform(
        proto.population(),
        proto.initial_state(),
        proto.leader_state(),
    )
}
