use std::collections::BTreeSet;

use crate::engine::{AuxRandom, Label, Protocol, ProtocolTraits, StateCounts};
use crate::verify::PoolView;

/// The leader hands out `n, n-1, ..., 2` one at a time to unlabeled agents,
/// then takes label 1 itself and stops.
#[derive(Clone, Debug)]
pub struct Dispenser {
    n: usize,
}

impl Dispenser {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DispenserState {
    Unlabeled,
    /// Leader about to give away `next`.
    Leader { next: u32 },
    Labeled(u32),
}

use DispenserState::*;

impl Dispenser {
    fn give(&self, next: u32) -> (DispenserState, DispenserState) {
        let leader = if next <= 2 { Labeled(1) } else { Leader { next: next - 1 } };
        (leader, Labeled(next))
    }
}

impl Protocol for Dispenser {
    type State = DispenserState;

    fn name(&self) -> &'static str {
        "dispenser"
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> DispenserState {
        Unlabeled
    }

    fn leader_state(&self) -> Option<DispenserState> {
        Some(Leader { next: self.n as u32 })
    }

    fn delta(
        &self,
        a: &DispenserState,
        b: &DispenserState,
        _aux: &mut AuxRandom,
    ) -> (DispenserState, DispenserState) {
        match (*a, *b) {
            (Leader { next }, Unlabeled) => self.give(next),
            (Unlabeled, Leader { next }) => {
                let (l, f) = self.give(next);
                (f, l)
            }
            other => other,
        }
    }

    fn output(&self, s: &DispenserState) -> Option<Label> {
        match s {
            Labeled(l) => Some(Label(*l as u64)),
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

    fn quick_silent(&self, present: &StateCounts<DispenserState>) -> Option<bool> {
        let leader = present.any(|s| matches!(s, Leader { .. }));
        Some(!(leader && present.count(&Unlabeled) > 0))
    }
}

impl PoolView for Dispenser {
    fn pools(&self, config: &[DispenserState]) -> Vec<BTreeSet<u64>> {
        config
            .iter()
            .map(|s| match s {
                Leader { next } => (1..=*next as u64).collect(),
                _ => BTreeSet::new(),
            })
            .collect()
    }
}
