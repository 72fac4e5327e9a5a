use crate::engine::{AuxRandom, Label, Protocol, ProtocolTraits, StateCounts};

/// The leader broadcasts that labeling may start; each agent picks a label
/// uniformly in `[1, n^3]` the moment it is informed. Labels collide with
/// small but positive probability.
#[derive(Clone, Debug)]
pub struct RandomizedCube {
    n: usize,
    range: u64,
}

impl RandomizedCube {
    pub fn new(n: usize) -> Self {
        let m = n as u64;
        Self {
            n,
            range: m.saturating_mul(m).saturating_mul(m).max(1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CubeState {
    Uninformed,
    /// Informed but not yet labeled; only the leader starts here.
    Informed,
    Labeled(u64),
}

use CubeState::*;

impl RandomizedCube {
    fn settle(&self, s: CubeState, aux: &mut AuxRandom) -> CubeState {
        match s {
            Labeled(_) => s,
            _ => Labeled(aux.between(1, self.range)),
        }
    }
}

impl Protocol for RandomizedCube {
    type State = CubeState;

    fn name(&self) -> &'static str {
        "randomized-cube"
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> CubeState {
        Uninformed
    }

    fn leader_state(&self) -> Option<CubeState> {
        Some(Informed)
    }

    fn delta(&self, a: &CubeState, b: &CubeState, aux: &mut AuxRandom) -> (CubeState, CubeState) {
        if *a == Uninformed && *b == Uninformed {
            return (*a, *b);
        }
        (self.settle(*a, aux), self.settle(*b, aux))
    }

    fn output(&self, s: &CubeState) -> Option<Label> {
        match s {
            Labeled(l) => Some(Label(*l)),
            _ => None,
        }
    }

    fn declared_range(&self) -> Option<u64> {
        Some(self.range)
    }

    fn traits(&self) -> ProtocolTraits {
        ProtocolTraits {
            labeling: true,
            silent: true,
            safe: true,
            pool: false,
            certain_validity: false,
        }
    }

    fn quick_silent(&self, present: &StateCounts<CubeState>) -> Option<bool> {
        let informed = present.count(&Informed) > 0;
        let mixed = present.count(&Uninformed) > 0 && present.any(|s| matches!(s, Labeled(_)));
        Some(!informed && !mixed)
    }
}

/// Probability that `n` independent uniform draws from `[1, range]` are not
/// all distinct.
pub fn collision_probability(n: usize, range: u64) -> f64 {
    let r = range as f64;
    1.0 - (0..n).map(|i| 1.0 - i as f64 / r).product::<f64>()
}
