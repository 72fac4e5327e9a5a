use serde::{Deserialize, Serialize};

/// Pinned default multiplier for the leader's phase threshold
/// `ceil(c_phase * log2 n)`. Calibrated at n = 4096 so that fewer than n/4
/// agents are unlabeled at the latch in at least 99 of 100 runs; see
/// `poplabel calibrate --primitive phase`.
pub const DEFAULT_C_PHASE: f64 = 2.5;

pub fn phase_threshold(n: usize, c_phase: f64) -> u16 {
    let log = (n.max(2) as f64).log2();
    (c_phase * log).ceil().clamp(1.0, u16::MAX as f64) as u16
}

/// A leader's count of its own interactions, latching at the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhaseCounter {
    count: u16,
    threshold: u16,
}

impl PhaseCounter {
    pub fn new(threshold: u16) -> Self {
        Self {
            count: 0,
            threshold: threshold.max(1),
        }
    }

    pub fn count(&self) -> u16 {
        self.count
    }

    pub fn threshold(&self) -> u16 {
        self.threshold
    }

    pub fn is_latched(&self) -> bool {
        self.count >= self.threshold
    }

    /// One more own interaction. A latched counter stays latched.
    #[must_use]
    pub fn tick(self) -> Self {
        if self.is_latched() {
            self
        } else {
            Self {
                count: self.count + 1,
                ..self
            }
        }
    }
}

/// Advances `counter` by one interaction.
pub fn tick_phase(counter: PhaseCounter) -> PhaseCounter {
    counter.tick()
}
