//! Run monitors and bound calculators.

mod bounds;
mod pool;
mod safety;
mod validity;

pub use bounds::{
    check_bounds, pool_bound, silent_safe_interaction_bound, state_lower_bound, BoundInput,
    BoundReport, BoundVerdicts, InteractionBatch, Verdict, STDERR_TOLERANCE,
};
pub use pool::{PoolMonitor, PoolView};
pub use safety::{SafetyLedger, SafetyVerdict, Violation};
pub use validity::{check_validity, ValidityVerdict};
