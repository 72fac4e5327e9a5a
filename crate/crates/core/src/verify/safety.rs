use serde::{Deserialize, Serialize};

use crate::engine::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub step: u64,
    pub agent: usize,
    pub old: Label,
    pub new: Option<Label>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SafetyVerdict {
    Ok,
    Violation { first: Violation, count: usize },
}

impl SafetyVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, SafetyVerdict::Ok)
    }

    pub fn violations(&self) -> usize {
        match self {
            SafetyVerdict::Ok => 0,
            SafetyVerdict::Violation { count, .. } => *count,
        }
    }
}

/// Tracks each agent's last output label. A violation is a defined label
/// turning into a different label or into no label.
#[derive(Clone, Debug, Default)]
pub struct SafetyLedger {
    last: Vec<Option<Label>>,
    violations: Vec<Violation>,
}

impl SafetyLedger {
    pub fn new(initial: Vec<Option<Label>>) -> Self {
        Self {
            last: initial,
            violations: Vec::new(),
        }
    }

    pub fn observe(&mut self, step: u64, agent: usize, output: Option<Label>) {
        let slot = &mut self.last[agent];
        if let Some(old) = *slot {
            if output != Some(old) {
                self.violations.push(Violation {
                    step,
                    agent,
                    old,
                    new: output,
                });
            }
        }
        *slot = output;
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn verdict(&self) -> SafetyVerdict {
        match self.violations.first() {
            None => SafetyVerdict::Ok,
            Some(&first) => SafetyVerdict::Violation {
                first,
                count: self.violations.len(),
            },
        }
    }
}
