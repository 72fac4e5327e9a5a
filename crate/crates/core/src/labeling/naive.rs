use crate::engine::{AuxRandom, Label, Protocol, ProtocolTraits, StateCounts};

/// Every agent starts with label 1; when two agents with the same label
/// `i < n` meet, the responder moves to `i + 1`.
///
/// Silent, and always ends in a permutation of `[1, n]`, but an agent's label
/// changes every time it is bumped, so the protocol is not safe.
#[derive(Clone, Debug)]
pub struct Naive {
    n: usize,
}

impl Naive {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NaiveState(pub u32);

impl Protocol for Naive {
    type State = NaiveState;

    fn name(&self) -> &'static str {
        "naive"
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> NaiveState {
        NaiveState(1)
    }

    fn delta(&self, a: &NaiveState, b: &NaiveState, _aux: &mut AuxRandom) -> (NaiveState, NaiveState) {
        if a == b && (a.0 as usize) < self.n {
            (*a, NaiveState(b.0 + 1))
        } else {
            (*a, *b)
        }
    }

    fn output(&self, s: &NaiveState) -> Option<Label> {
        Some(Label(s.0 as u64))
    }

    fn declared_range(&self) -> Option<u64> {
        Some(self.n as u64)
    }

    fn traits(&self) -> ProtocolTraits {
        ProtocolTraits {
            labeling: true,
            silent: true,
            safe: false,
            pool: false,
            certain_validity: true,
        }
    }

    fn encode(&self, s: &NaiveState) -> String {
        s.0.to_string()
    }

    fn quick_silent(&self, present: &StateCounts<NaiveState>) -> Option<bool> {
        Some(!present.iter().any(|(s, c)| c >= 2 && (s.0 as usize) < self.n))
    }
}
