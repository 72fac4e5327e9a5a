//! Lower-bound calculators and consistency verdicts.
//!
//! Bounds on expected interactions are compared against sample means with a
//! standard-error allowance; state-count bounds are exact comparisons.

use serde::{Deserialize, Serialize};

use crate::engine::{ProtocolTraits, RunRecord};
use crate::experiments::stats::Summary;

/// Allowance, in standard errors, before a sample mean below a lower bound
/// counts as inconsistent.
pub const STDERR_TOLERANCE: f64 = 3.0;

/// Expected interactions of any pool protocol with range `[1, n + r]`.
pub fn pool_bound(n: usize, r: u64) -> f64 {
    let n = n as f64;
    n * n / (r as f64 + 1.0)
}

/// States required by a silent protocol that is safe and valid.
pub fn state_lower_bound(n: usize) -> f64 {
    let n = n as f64;
    n + ((n - 1.0) / 2.0).sqrt() - 1.0
}

/// Expected interactions of a silent, safe protocol using `n + t` states;
/// only defined for `t < n`.
pub fn silent_safe_interaction_bound(n: usize, t: usize) -> Option<f64> {
    (t < n).then(|| {
        let n = n as f64;
        n * n / (t as f64 + 1.0)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    /// Sample mean below the bound but within the standard-error allowance.
    WithinNoise,
    Inconsistent,
    NotApplicable,
}

impl Verdict {
    fn lower(measured: f64, stderr: f64, bound: f64) -> Self {
        if measured >= bound {
            Verdict::Consistent
        } else if measured + STDERR_TOLERANCE * stderr >= bound {
            Verdict::WithinNoise
        } else {
            Verdict::Inconsistent
        }
    }
}

/// Mean and standard error of interactions over a batch of completed runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionBatch {
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
}

impl InteractionBatch {
    pub fn from_records(records: &[RunRecord]) -> Option<Self> {
        let values: Vec<f64> = records
            .iter()
            .filter(|r| r.completed)
            .map(|r| r.interactions_used as f64)
            .collect();
        let s = Summary::from_values(&values)?;
        Some(Self {
            trials: values.len(),
            mean: s.mean,
            stderr: s.stderr,
        })
    }
}

/// What a bound check needs to know about a protocol instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInput {
    pub n: usize,
    /// Upper end of the declared label range.
    pub range: u64,
    pub traits: ProtocolTraits,
    /// Distinct states used; the smallest census over a batch is the
    /// conservative choice for both state-based checks.
    pub census: usize,
    pub batch: Option<InteractionBatch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdicts {
    pub pool: Verdict,
    pub states: Verdict,
    pub silent_safe_interactions: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    /// `r` in the range `[1, n + r]`.
    pub range_slack: u64,
    /// `t = census - n`.
    pub state_slack: usize,
    pub pool_bound: f64,
    pub state_lower_bound: f64,
    pub interaction_lower_bound_silent_safe: Option<f64>,
    pub census: usize,
    pub measured_mean: Option<f64>,
    pub measured_stderr: Option<f64>,
    pub verdicts: BoundVerdicts,
}

impl BoundReport {
    pub fn is_consistent(&self) -> bool {
        let v = &self.verdicts;
        ![v.pool, v.states, v.silent_safe_interactions].contains(&Verdict::Inconsistent)
    }
}

pub fn check_bounds(input: &BoundInput) -> BoundReport {
    let n = input.n;
    let range_slack = input.range.saturating_sub(n as u64);
    let state_slack = input.census.saturating_sub(n);
    let pool = pool_bound(n, range_slack);
    let states = state_lower_bound(n);
    let ss_bound = silent_safe_interaction_bound(n, state_slack);
    let traits = input.traits;

    let pool_verdict = match (traits.pool, input.batch) {
        (true, Some(b)) => Verdict::lower(b.mean, b.stderr, pool),
        _ => Verdict::NotApplicable,
    };
    let state_verdict = if traits.state_bound_applies() {
        if input.census as f64 >= states {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        }
    } else {
        Verdict::NotApplicable
    };
    let ss_verdict = match (traits.state_bound_applies(), ss_bound, input.batch) {
        (true, Some(bound), Some(b)) => Verdict::lower(b.mean, b.stderr, bound),
        _ => Verdict::NotApplicable,
    };

    BoundReport {
        n,
        range_slack,
        state_slack,
        pool_bound: pool,
        state_lower_bound: states,
        interaction_lower_bound_silent_safe: ss_bound,
        census: input.census,
        measured_mean: input.batch.map(|b| b.mean),
        measured_stderr: input.batch.map(|b| b.stderr),
        verdicts: BoundVerdicts {
            pool: pool_verdict,
            states: state_verdict,
            silent_safe_interactions: ss_verdict,
        },
    }
}
