use crate::engine::{AuxRandom, Label, Protocol, ProtocolTraits, StateCounts};

/// One-way epidemic: an agent either has the message or not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BroadcastState {
    pub informed: bool,
}

impl BroadcastState {
    pub const INFORMED: Self = Self { informed: true };
    pub const UNINFORMED: Self = Self { informed: false };
}

/// Whenever an informed agent meets an uninformed one, the latter becomes
/// informed, regardless of roles.
pub fn broadcast_delta(a: BroadcastState, b: BroadcastState) -> (BroadcastState, BroadcastState) {
    if a.informed || b.informed {
        (BroadcastState::INFORMED, BroadcastState::INFORMED)
    } else {
        (a, b)
    }
}

/// Standalone broadcast from a single initially informed agent.
#[derive(Clone, Debug)]
pub struct Broadcast {
    n: usize,
}

impl Broadcast {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Protocol for Broadcast {
    type State = BroadcastState;

    fn name(&self) -> &'static str {
        "broadcast"
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> BroadcastState {
        BroadcastState::UNINFORMED
    }

    fn leader_state(&self) -> Option<BroadcastState> {
        Some(BroadcastState::INFORMED)
    }

    fn delta(
        &self,
        a: &BroadcastState,
        b: &BroadcastState,
        _aux: &mut AuxRandom,
    ) -> (BroadcastState, BroadcastState) {
        broadcast_delta(*a, *b)
    }

    fn output(&self, _state: &BroadcastState) -> Option<Label> {
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

    fn encode(&self, s: &BroadcastState) -> String {
        if s.informed { "M" } else { "-M" }.to_string()
    }

    fn quick_silent(&self, present: &StateCounts<BroadcastState>) -> Option<bool> {
        Some(present.count(&BroadcastState::INFORMED) == 0 || present.count(&BroadcastState::UNINFORMED) == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, RunLimits};

    const M: BroadcastState = BroadcastState::INFORMED;
    const NOT_M: BroadcastState = BroadcastState::UNINFORMED;

    #[test]
    fn informed_meets_uninformed() {
        assert_eq!(broadcast_delta(M, NOT_M), (M, M));
        assert_eq!(broadcast_delta(NOT_M, M), (M, M));
    }

    #[test]
    fn no_source_no_change() {
        assert_eq!(broadcast_delta(NOT_M, NOT_M), (NOT_M, NOT_M));
        assert_eq!(broadcast_delta(M, M), (M, M));
    }

    #[test]
    fn two_agents_complete_in_one_interaction() {
        let out = run(&Broadcast::new(2), &RunLimits::new(10), 5).unwrap();
        assert!(out.record.completed);
        assert_eq!(out.record.interactions_used, 1);
        assert_eq!(out.record.census, 2);
    }

    #[test]
    fn census_is_two_for_any_n() {
        for n in [3, 17, 100] {
            let out = run(&Broadcast::new(n), &RunLimits::new(1_000_000), n as u64).unwrap();
            assert!(out.record.completed);
            assert_eq!(out.record.census, 2);
            assert!(out.final_config.states().iter().all(|s| s.informed));
        }
    }
}
