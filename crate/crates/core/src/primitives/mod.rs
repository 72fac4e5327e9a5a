//! Sub-protocols shared by the labeling protocols: epidemic broadcast,
//! leader election and the leader's phase counter.

mod broadcast;
mod election;
mod phase;

pub use broadcast::{broadcast_delta, Broadcast, BroadcastState};
pub use election::{
    count_leaders, elect_leader_delta, Elected, ElectedState, ElectionParams, ElectionState,
    Key, Knowledge, LeaderElection, Role, DEFAULT_C_ELECT, ELECTION_ROUNDS,
};
pub use phase::{phase_threshold, tick_phase, PhaseCounter, DEFAULT_C_PHASE};
