use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{
    initial_configuration, is_silent_exhaustive, AuxRandom, Configuration, Label, Protocol,
    Scheduler, StateCounts, TraceSink,
};
use crate::error::Error;
use crate::verify::{check_validity, SafetyLedger, SafetyVerdict, ValidityVerdict};

/// Stopping rules for a single run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLimits {
    pub max_interactions: u64,
    /// Interactions between terminality probes; `None` means `n`.
    #[serde(default)]
    pub silence_check_period: Option<u64>,
    /// Exhaustive silence certification is skipped when the final
    /// configuration has more distinct states than this.
    #[serde(default = "default_certify_limit")]
    pub certify_limit: usize,
}

fn default_certify_limit() -> usize {
    512
}

impl RunLimits {
    pub fn new(max_interactions: u64) -> Self {
        Self {
            max_interactions: max_interactions.max(1),
            silence_check_period: None,
            certify_limit: default_certify_limit(),
        }
    }

    pub fn with_check_period(mut self, period: u64) -> Self {
        self.silence_check_period = Some(period.max(1));
        self
    }

    pub fn with_certify_limit(mut self, limit: usize) -> Self {
        self.certify_limit = limit;
        self
    }
}

/// Outcome of one run, independent of the protocol's state type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub protocol: String,
    pub n: usize,
    pub seed: u64,
    /// Stabilization time when completed: index of the last state-changing
    /// interaction. Otherwise the interaction cap.
    pub interactions_used: u64,
    pub completed: bool,
    pub final_labels: Vec<Option<Label>>,
    pub safety: SafetyVerdict,
    pub validity: ValidityVerdict,
    /// Number of distinct states any agent occupied during the run.
    pub census: usize,
    /// Exhaustive terminality check of the final configuration; `None` when
    /// skipped (incomplete run or too many distinct states).
    pub silence_certified: Option<bool>,
}

/// A run record together with the final configuration and the set of
/// states seen.
#[derive(Clone, Debug)]
pub struct RunOutcome<S> {
    pub record: RunRecord,
    pub final_config: Configuration<S>,
    pub seen: HashSet<S>,
}

/// Observer invoked after every state-changing interaction.
pub trait Monitor<S> {
    fn on_change(&mut self, step: u64, pair: (usize, usize), before: (&S, &S), config: &[S]);
}

impl<S, F> Monitor<S> for F
where
    F: FnMut(u64, (usize, usize), (&S, &S), &[S]),
{
    fn on_change(&mut self, step: u64, pair: (usize, usize), before: (&S, &S), config: &[S]) {
        self(step, pair, before, config)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub pair: (usize, usize),
    pub changed: bool,
}

/// A live run: configuration, scheduler, counters and the safety ledger.
pub struct Simulation<'p, P: Protocol> {
    proto: &'p P,
    config: Configuration<P::State>,
    scheduler: Scheduler,
    aux: AuxRandom,
    present: StateCounts<P::State>,
    seen: HashSet<P::State>,
    safety: SafetyLedger,
    seed: u64,
    steps: u64,
    last_change: u64,
    trace: Option<TraceSink>,
}

impl<'p, P: Protocol> Simulation<'p, P> {
    pub fn new(proto: &'p P, seed: u64) -> Result<Self, Error> {
        Self::from_config(proto, initial_configuration(proto), seed)
    }

    /// Starts from an arbitrary configuration of at least two agents.
    pub fn from_config(
        proto: &'p P,
        config: Configuration<P::State>,
        seed: u64,
    ) -> Result<Self, Error> {
        if config.n() < 2 {
            return Err(Error::InvalidParameter(format!(
                "population of {} agents cannot interact",
                config.n()
            )));
        }
        let present = StateCounts::from_states(config.states());
        let seen = config.states().iter().cloned().collect();
        let outputs: Vec<Option<Label>> = config.states().iter().map(|s| proto.output(s)).collect();
        Ok(Self {
            proto,
            scheduler: Scheduler::new(config.n(), seed),
            aux: AuxRandom::new(seed),
            present,
            seen,
            safety: SafetyLedger::new(outputs),
            config,
            seed,
            steps: 0,
            last_change: 0,
            trace: None,
        })
    }

    pub fn with_trace(mut self, sink: TraceSink) -> Self {
        self.trace = Some(sink);
        self
    }

    pub fn config(&self) -> &Configuration<P::State> {
        &self.config
    }

    pub fn present(&self) -> &StateCounts<P::State> {
        &self.present
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn census(&self) -> usize {
        self.seen.len()
    }

    pub fn safety(&self) -> &SafetyLedger {
        &self.safety
    }

    /// One scheduler draw followed by the transition.
    pub fn step(&mut self, monitors: &mut [&mut dyn Monitor<P::State>]) -> StepOutcome {
        let pair = self.scheduler.draw();
        let changed = self.apply(pair.0, pair.1, monitors);
        StepOutcome { pair, changed }
    }

    /// Applies the transition to an explicitly chosen ordered pair, counting
    /// it as one interaction.
    pub fn apply(
        &mut self,
        initiator: usize,
        responder: usize,
        monitors: &mut [&mut dyn Monitor<P::State>],
    ) -> bool {
        self.steps += 1;
        let a = self.config.get(initiator);
        let b = self.config.get(responder);
        let (a2, b2) = self.proto.delta(a, b, &mut self.aux);
        if &a2 == a && &b2 == b {
            return false;
        }
        let step = self.steps;
        let a_before = a.clone();
        let b_before = b.clone();
        self.present.remove(&a_before);
        self.present.remove(&b_before);
        self.present.add(&a2);
        self.present.add(&b2);
        if !self.seen.contains(&a2) {
            self.seen.insert(a2.clone());
        }
        if !self.seen.contains(&b2) {
            self.seen.insert(b2.clone());
        }
        if let Some(t) = self.trace.as_mut() {
            // Trace output is best effort; a failing sink must not change the run.
            let _ = t.record(
                step,
                initiator,
                responder,
                &self.proto.encode(&a_before),
                &self.proto.encode(&b_before),
                &self.proto.encode(&a2),
                &self.proto.encode(&b2),
            );
        }
        self.safety.observe(step, initiator, self.proto.output(&a2));
        self.safety.observe(step, responder, self.proto.output(&b2));
        self.config.set(initiator, a2);
        self.config.set(responder, b2);
        self.last_change = step;
        for m in monitors.iter_mut() {
            m.on_change(
                step,
                (initiator, responder),
                (&a_before, &b_before),
                self.config.states(),
            );
        }
        true
    }

    /// Terminality of the current configuration.
    pub fn is_silent(&self) -> bool {
        self.proto
            .quick_silent(&self.present)
            .unwrap_or_else(|| is_silent_exhaustive(self.proto, &self.present))
    }

    /// Runs until silence or the interaction cap.
    pub fn run_until(
        &mut self,
        limits: &RunLimits,
        monitors: &mut [&mut dyn Monitor<P::State>],
    ) -> bool {
        let period = limits
            .silence_check_period
            .unwrap_or(self.config.n() as u64)
            .max(1);
        if self.is_silent() {
            return true;
        }
        let mut dirty = false;
        let mut next_probe = self.steps + period;
        while self.steps < limits.max_interactions {
            if self.step(monitors).changed {
                dirty = true;
            }
            if self.steps >= next_probe {
                next_probe = self.steps + period;
                if dirty {
                    dirty = false;
                    if self.is_silent() {
                        return true;
                    }
                }
            }
        }
        dirty && self.is_silent()
    }

    pub fn finish(mut self, completed: bool, limits: &RunLimits) -> RunOutcome<P::State> {
        if let Some(t) = self.trace.as_mut() {
            let _ = t.flush();
        }
        let final_labels: Vec<Option<Label>> = self
            .config
            .states()
            .iter()
            .map(|s| self.proto.output(s))
            .collect();
        let validity = match self.proto.declared_range() {
            None => ValidityVerdict::NotApplicable,
            Some(_) if !completed => ValidityVerdict::Incomplete,
            Some(r) => check_validity(&final_labels, r),
        };
        let silence_certified = if completed && self.present.distinct() <= limits.certify_limit {
            Some(is_silent_exhaustive(self.proto, &self.present))
        } else {
            None
        };
        let record = RunRecord {
            protocol: self.proto.name().to_string(),
            n: self.config.n(),
            seed: self.seed,
            interactions_used: if completed {
                self.last_change
            } else {
                self.steps
            },
            completed,
            final_labels,
            safety: self.safety.verdict(),
            validity,
            census: self.seen.len(),
            silence_certified,
        };
        RunOutcome {
            record,
            final_config: self.config,
            seen: self.seen,
        }
    }
}

/// Runs `proto` from its initial configuration.
pub fn run<P: Protocol>(
    proto: &P,
    limits: &RunLimits,
    seed: u64,
) -> Result<RunOutcome<P::State>, Error> {
    run_monitored(proto, limits, seed, &mut [])
}

/// [`run`] with monitors observing every state change.
pub fn run_monitored<P: Protocol>(
    proto: &P,
    limits: &RunLimits,
    seed: u64,
    monitors: &mut [&mut dyn Monitor<P::State>],
) -> Result<RunOutcome<P::State>, Error> {
    match proto.population() {
        0 => Err(Error::InvalidParameter("population must be non-empty".into())),
        1 => Ok(degenerate(proto, seed)),
        _ => {
            let mut sim = Simulation::new(proto, seed)?;
            let completed = sim.run_until(limits, monitors);
            Ok(sim.finish(completed, limits))
        }
    }
}

fn degenerate<P: Protocol>(proto: &P, seed: u64) -> RunOutcome<P::State> {
    let state = proto.leader_state().unwrap_or_else(|| proto.initial_state());
    let label = proto.singleton_label();
    let validity = match proto.declared_range() {
        None => ValidityVerdict::NotApplicable,
        Some(r) => check_validity(&[label], r),
    };
    RunOutcome {
        record: RunRecord {
            protocol: proto.name().to_string(),
            n: 1,
            seed,
            interactions_used: 0,
            completed: true,
            final_labels: vec![label],
            safety: SafetyVerdict::Ok,
            validity,
            census: 1,
            silence_certified: Some(true),
        },
        final_config: Configuration::from_states(vec![state.clone()]),
        seen: std::iter::once(state).collect(),
    }
}
