use std::collections::BTreeSet;

use super::cycle::{ceil_sqrt, is_square, Geometry, Next, Role};
use crate::engine::{is_silent_among, AuxRandom, Label, Protocol, ProtocolTraits, StateCounts};
use crate::error::Error;
use crate::verify::PoolView;

/// Ranking with `[1, n]` and `n + O(sqrt n)` states: the leader becomes
/// dispenser A, nominates the first free agent it meets as dispenser B, and
/// the two label everyone else in one sequential cycle.
#[derive(Clone, Debug)]
pub struct SingleCycle {
    n: usize,
    geom: Geometry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SingleCycleState {
    /// The leader before its first interaction with a free agent.
    Init,
    Free,
    Cycle(Role),
    Final(u32),
}

use SingleCycleState::*;

impl SingleCycle {
    /// Requires `n` to be a perfect square of at least 4.
    pub fn new(n: usize) -> Result<Self, Error> {
        if n < 4 || n > u32::MAX as usize || !is_square(n as u32) {
            return Err(Error::InvalidParameter(format!(
                "single-cycle needs a perfect square n >= 4 (got {n}); use the generalized mode otherwise"
            )));
        }
        Ok(Self::build(n))
    }

    /// Any `n >= 3`, with side `ceil(sqrt n)`.
    pub fn generalized(n: usize) -> Result<Self, Error> {
        if !(3..=u32::MAX as usize).contains(&n) {
            return Err(Error::InvalidParameter(format!("generalized single-cycle needs n >= 3, got {n}")));
        }
        Ok(Self::build(n))
    }

    fn build(n: usize) -> Self {
        let side = ceil_sqrt(n as u32);
        Self {
            n,
            geom: Geometry::new(n as u32, side, 0),
        }
    }

    pub fn side(&self) -> u16 {
        self.geom.side
    }

    /// State-count budget `n + 5 sqrt(n) + 4`.
    pub fn state_budget(&self) -> usize {
        self.n + 5 * self.geom.side as usize + 4
    }

    fn ordered(&self, x: SingleCycleState, y: SingleCycleState) -> Option<(SingleCycleState, SingleCycleState)> {
        let lift = |s: Next| match s {
            Next::Role(r) => Cycle(r),
            Next::Final(l) => Final(l),
        };
        match (x, y) {
            (Init, Free) => Some((Cycle(self.geom.start_a()), Cycle(self.geom.start_b()))),
            (Cycle(r), Free) => self.geom.with_free(r).map(|(r2, f2)| (Cycle(r2), Cycle(f2))),
            (Cycle(r), Cycle(q)) => self.geom.pair(r, q).map(|(r2, q2)| (lift(r2), lift(q2))),
            _ => None,
        }
    }
}

impl Protocol for SingleCycle {
    type State = SingleCycleState;

    fn name(&self) -> &'static str {
        "single-cycle"
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> SingleCycleState {
        Free
    }

    fn leader_state(&self) -> Option<SingleCycleState> {
        Some(Init)
    }

    fn delta(
        &self,
        a: &SingleCycleState,
        b: &SingleCycleState,
        _aux: &mut AuxRandom,
    ) -> (SingleCycleState, SingleCycleState) {
        if let Some(r) = self.ordered(*a, *b) {
            return r;
        }
        if let Some((y, x)) = self.ordered(*b, *a) {
            return (x, y);
        }
        (*a, *b)
    }

    fn output(&self, s: &SingleCycleState) -> Option<Label> {
        match s {
            Final(l) => Some(Label(*l as u64)),
            _ => None,
        }
    }

    fn declared_range(&self) -> Option<u64> {
        Some(self.n as u64)
    }

    fn traits(&self) -> ProtocolTraits {
        ProtocolTraits {
            labeling: true,
            silent: true,
            safe: true,
            pool: true,
            certain_validity: true,
        }
    }

    fn encode(&self, s: &SingleCycleState) -> String {
        encode_cycle_state(s)
    }

    fn quick_silent(&self, present: &StateCounts<SingleCycleState>) -> Option<bool> {
        Some(is_silent_among(self, present, |s| matches!(s, Final(_))))
    }
}

pub(crate) fn encode_role(r: &Role) -> String {
    use super::cycle::Await;
    let w = |w: &Await| match w {
        Await::Free => "F",
        Await::Partner => "P",
    };
    match r {
        Role::A { a, wait } => format!("A[{a};{}]", w(wait)),
        Role::B { b, wait } => format!("B[{b};{}]", w(wait)),
        Role::Partial { a } => format!("F[{a}]"),
    }
}

fn encode_cycle_state(s: &SingleCycleState) -> String {
    match s {
        Init => "A.init".into(),
        Free => "F.init".into(),
        Cycle(r) => encode_role(r),
        Final(l) => format!("={l}"),
    }
}

impl PoolView for SingleCycle {
    fn pools(&self, config: &[SingleCycleState]) -> Vec<BTreeSet<u64>> {
        let mut a = None;
        let mut b = None;
        for s in config {
            match s {
                Cycle(r @ Role::A { .. }) => a = Some(*r),
                Cycle(r @ Role::B { .. }) => b = Some(*r),
                _ => {}
            }
        }
        let (a_pool, b_pool, in_flight) = self.geom.remaining(a, b);
        let set = |v: &[u32]| v.iter().map(|&x| x as u64).collect::<BTreeSet<u64>>();
        config
            .iter()
            .map(|s| match s {
                Init => (1..=self.n as u64).collect(),
                Cycle(Role::A { .. }) => set(&a_pool),
                Cycle(Role::B { .. }) => set(&b_pool),
                Cycle(Role::Partial { .. }) => in_flight.map(|v| v as u64).into_iter().collect(),
                _ => BTreeSet::new(),
            })
            .collect()
    }
}
