use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::engine::Label;

/// Outcome of checking a final labeling against `[1, R]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ValidityVerdict {
    Ok,
    /// The run hit its interaction cap.
    Incomplete,
    /// The protocol does not assign labels.
    NotApplicable,
    Missing { agent: usize },
    OutOfRange { agent: usize, label: Label },
    Duplicate { label: Label },
}

impl ValidityVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidityVerdict::Ok)
    }

    /// A definite failure, as opposed to ok, incomplete or not applicable.
    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            ValidityVerdict::Missing { .. }
                | ValidityVerdict::OutOfRange { .. }
                | ValidityVerdict::Duplicate { .. }
        )
    }
}

/// All labels defined, within `[1, range]`, and pairwise distinct. Reports the
/// first failing category in that order.
pub fn check_validity(labels: &[Option<Label>], range: u64) -> ValidityVerdict {
    if let Some(agent) = labels.iter().position(Option::is_none) {
        return ValidityVerdict::Missing { agent };
    }
    let defined = labels.iter().flatten().copied();
    for (agent, label) in defined.clone().enumerate() {
        if label.0 < 1 || label.0 > range {
            return ValidityVerdict::OutOfRange { agent, label };
        }
    }
    let mut seen = HashSet::with_capacity(labels.len());
    for label in defined {
        if !seen.insert(label) {
            return ValidityVerdict::Duplicate { label };
        }
    }
    ValidityVerdict::Ok
}
