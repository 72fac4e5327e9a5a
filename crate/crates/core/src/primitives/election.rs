//! Leader election from a uniform start, plus a wrapper that runs it as a
//! preprocessing stage in front of any leader-driven protocol.
//!
//! Contenders carry a key `(round, level, id)`. The level is a capped run of
//! fair coin flips drawn at an agent's first interaction, which forms a small
//! junta at the top level; the id breaks ties inside the junta. Keys spread
//! epidemically through followers, and a contender that learns of a larger
//! key retires. Surviving contenders redraw their id at every round boundary
//! of their own interaction count, and the contender still standing after
//! the last round latches as leader. Two contenders holding equal keys that
//! meet directly resolve by a fair coin.

use serde::{Deserialize, Serialize};

use crate::engine::{AuxRandom, Label, LeaderMode, Protocol, ProtocolTraits, StateCounts};

/// Pinned default for the per-round length multiplier:
/// `round_len = ceil(c_elect * log2 n)` own interactions.
pub const DEFAULT_C_ELECT: f64 = 4.0;
pub const ELECTION_ROUNDS: u8 = 3;
const MIN_ID_SPACE: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionParams {
    pub level_cap: u8,
    pub id_space: u32,
    pub rounds: u8,
    pub round_len: u16,
}

impl ElectionParams {
    /// Level cap `ceil(log2 log2 n) + 4`, id space `max(64, ceil(sqrt n))`.
    pub fn for_population(n: usize, c_elect: f64) -> Self {
        let log = (n.max(2) as f64).log2();
        let level_cap = log.log2().max(0.0).ceil() as u8 + 4;
        let id_space = ((n as f64).sqrt().ceil() as u32).max(MIN_ID_SPACE);
        let round_len = (c_elect * log).ceil().clamp(1.0, 4096.0) as u16;
        Self {
            level_cap,
            id_space,
            rounds: ELECTION_ROUNDS,
            round_len,
        }
    }

    fn latch_at(&self) -> u16 {
        self.rounds as u16 * self.round_len
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Key {
    pub round: u8,
    pub level: u8,
    pub id: u32,
}

/// What an agent knows about the strongest contender; ordered by strength.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Knowledge {
    Nothing,
    Key(Key),
    LeaderExists,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Contender,
    Follower,
    Leader,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElectionState {
    /// Not yet interacted; every agent starts here in elected mode.
    Fresh,
    Contender { key: Key, count: u16 },
    Follower { known: Knowledge },
    Leader,
}

impl ElectionState {
    pub const FOLLOWER: Self = ElectionState::Follower {
        known: Knowledge::Nothing,
    };

    pub fn role(&self) -> Role {
        match self {
            ElectionState::Fresh | ElectionState::Contender { .. } => Role::Contender,
            ElectionState::Follower { .. } => Role::Follower,
            ElectionState::Leader => Role::Leader,
        }
    }

    pub fn level(&self) -> Option<u8> {
        match self {
            ElectionState::Contender { key, .. } => Some(key.level),
            _ => None,
        }
    }

    fn knowledge(&self) -> Knowledge {
        match *self {
            ElectionState::Fresh => Knowledge::Nothing,
            ElectionState::Contender { key, .. } => Knowledge::Key(key),
            ElectionState::Follower { known } => known,
            ElectionState::Leader => Knowledge::LeaderExists,
        }
    }
}

fn draw_contender(params: &ElectionParams, aux: &mut AuxRandom) -> ElectionState {
    let level = aux.heads_run(params.level_cap as u32) as u8;
    let id = aux.below(params.id_space as u64) as u32;
    ElectionState::Contender {
        key: Key { round: 0, level, id },
        count: 0,
    }
}

fn absorb(me: ElectionState, partner: Knowledge) -> ElectionState {
    match me {
        ElectionState::Contender { key, .. } if partner > Knowledge::Key(key) => {
            ElectionState::Follower { known: partner }
        }
        ElectionState::Follower { known } if partner > known => {
            ElectionState::Follower { known: partner }
        }
        other => other,
    }
}

fn tick(me: ElectionState, params: &ElectionParams, aux: &mut AuxRandom) -> ElectionState {
    match me {
        ElectionState::Contender { mut key, count } => {
            let count = count + 1;
            if count >= params.latch_at() {
                return ElectionState::Leader;
            }
            if count % params.round_len == 0 && key.round + 1 < params.rounds {
                key.round += 1;
                key.id = aux.below(params.id_space as u64) as u32;
            }
            ElectionState::Contender { key, count }
        }
        other => other,
    }
}

/// Joint transition of the election.
pub fn elect_leader_delta(
    a: &ElectionState,
    b: &ElectionState,
    params: &ElectionParams,
    aux: &mut AuxRandom,
) -> (ElectionState, ElectionState) {
    let mut a = *a;
    let mut b = *b;
    if a == ElectionState::Fresh {
        a = draw_contender(params, aux);
    }
    if b == ElectionState::Fresh {
        b = draw_contender(params, aux);
    }
    let (ka, kb) = (a.knowledge(), b.knowledge());
    let tied = matches!((a, b), (ElectionState::Contender { key: x, .. }, ElectionState::Contender { key: y, .. }) if x == y);
    if tied {
        if aux.coin() {
            b = ElectionState::Follower { known: kb };
        } else {
            a = ElectionState::Follower { known: ka };
        }
    } else {
        a = absorb(a, kb);
        b = absorb(b, ka);
    }
    (tick(a, params, aux), tick(b, params, aux))
}

/// Standalone election, for calibration and for its own statistics.
#[derive(Clone, Debug)]
pub struct LeaderElection {
    n: usize,
    params: ElectionParams,
    mode: LeaderMode,
}

impl LeaderElection {
    pub fn new(n: usize, params: ElectionParams, mode: LeaderMode) -> Self {
        Self { n, params, mode }
    }

    pub fn params(&self) -> &ElectionParams {
        &self.params
    }
}

impl Protocol for LeaderElection {
    type State = ElectionState;

    fn name(&self) -> &'static str {
        "election"
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> ElectionState {
        match self.mode {
            LeaderMode::Oracle => ElectionState::FOLLOWER,
            LeaderMode::Elected => ElectionState::Fresh,
        }
    }

    fn leader_state(&self) -> Option<ElectionState> {
        (self.mode == LeaderMode::Oracle).then_some(ElectionState::Leader)
    }

    fn delta(
        &self,
        a: &ElectionState,
        b: &ElectionState,
        aux: &mut AuxRandom,
    ) -> (ElectionState, ElectionState) {
        elect_leader_delta(a, b, &self.params, aux)
    }

    fn output(&self, _state: &ElectionState) -> Option<Label> {
        None
    }

    fn declared_range(&self) -> Option<u64> {
        None
    }

    fn traits(&self) -> ProtocolTraits {
        ProtocolTraits {
            silent: true,
            safe: true,
            ..Default::default()
        }
    }

    fn quick_silent(&self, present: &StateCounts<ElectionState>) -> Option<bool> {
        Some(election_quiet(present.states()))
    }
}

/// No pending transition among election states: no fresh agents or
/// contenders, followers agree, and none lags behind a present leader.
fn election_quiet<'a>(states: impl Iterator<Item = &'a ElectionState>) -> bool {
    let mut known: Option<Knowledge> = None;
    let mut leader = false;
    for s in states {
        match *s {
            ElectionState::Fresh | ElectionState::Contender { .. } => return false,
            ElectionState::Leader => leader = true,
            ElectionState::Follower { known: k } => match known {
                Some(prev) if prev != k => return false,
                _ => known = Some(k),
            },
        }
    }
    !(leader && known.is_some_and(|k| k != Knowledge::LeaderExists))
}

pub fn count_leaders<'a>(states: impl IntoIterator<Item = &'a ElectionState>) -> usize {
    states
        .into_iter()
        .filter(|s| **s == ElectionState::Leader)
        .count()
}

/// State of an agent in a protocol preceded by leader election.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElectedState<S> {
    Electing(ElectionState),
    Running(S),
}

/// Runs the election from a uniform start; the latched leader enters the
/// inner protocol's leader state and every other agent joins as a follower
/// as soon as it meets an agent already running the inner protocol.
#[derive(Clone, Debug)]
pub struct Elected<P> {
    inner: P,
    params: ElectionParams,
}

impl<P: Protocol> Elected<P> {
    /// Panics if `inner` has no leader state.
    pub fn new(inner: P, params: ElectionParams) -> Self {
        assert!(
            inner.leader_state().is_some(),
            "elected mode needs a leader-driven protocol"
        );
        Self { inner, params }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    fn enter(&self, s: ElectionState) -> ElectedState<P::State> {
        match s {
            ElectionState::Leader => ElectedState::Running(
                self.inner
                    .leader_state()
                    .expect("checked at construction"),
            ),
            other => ElectedState::Electing(other),
        }
    }
}

impl<P: Protocol> Protocol for Elected<P> {
    type State = ElectedState<P::State>;

    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn population(&self) -> usize {
        self.inner.population()
    }

    fn initial_state(&self) -> Self::State {
        ElectedState::Electing(ElectionState::Fresh)
    }

    fn delta(&self, a: &Self::State, b: &Self::State, aux: &mut AuxRandom) -> (Self::State, Self::State) {
        use ElectedState::*;
        match (a, b) {
            (Running(x), Running(y)) => {
                let (x2, y2) = self.inner.delta(x, y, aux);
                (Running(x2), Running(y2))
            }
            (Electing(x), Electing(y)) => {
                let (x2, y2) = elect_leader_delta(x, y, &self.params, aux);
                (self.enter(x2), self.enter(y2))
            }
            (Electing(_), Running(y)) => {
                let (x2, y2) = self.inner.delta(&self.inner.initial_state(), y, aux);
                (Running(x2), Running(y2))
            }
            (Running(x), Electing(_)) => {
                let (x2, y2) = self.inner.delta(x, &self.inner.initial_state(), aux);
                (Running(x2), Running(y2))
            }
        }
    }

    fn output(&self, state: &Self::State) -> Option<Label> {
        match state {
            ElectedState::Running(s) => self.inner.output(s),
            ElectedState::Electing(_) => None,
        }
    }

    fn declared_range(&self) -> Option<u64> {
        self.inner.declared_range()
    }

    fn traits(&self) -> ProtocolTraits {
        self.inner.traits()
    }

    fn encode(&self, state: &Self::State) -> String {
        match state {
            ElectedState::Running(s) => self.inner.encode(s),
            ElectedState::Electing(e) => format!("E:{e:?}"),
        }
    }

    fn quick_silent(&self, present: &StateCounts<Self::State>) -> Option<bool> {
        let mut electing = Vec::new();
        let mut running = StateCounts::default();
        for (s, c) in present.iter() {
            match s {
                ElectedState::Electing(e) => electing.push(*e),
                ElectedState::Running(r) => {
                    for _ in 0..c {
                        running.add(r);
                    }
                }
            }
        }
        if !election_quiet(electing.iter()) {
            return Some(false);
        }
        if !electing.is_empty() && running.distinct() > 0 {
            return Some(false);
        }
        Some(
            self.inner
                .quick_silent(&running)
                .unwrap_or_else(|| crate::engine::is_silent_exhaustive(&self.inner, &running)),
        )
    }

    fn singleton_label(&self) -> Option<Label> {
        self.inner.singleton_label()
    }
}
