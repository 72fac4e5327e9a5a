use std::collections::BTreeSet;

use crate::engine::{Monitor, Protocol};

/// Protocols whose agents own explicit or implicit pools of labels.
pub trait PoolView: Protocol {
    /// Labels each agent owns but has not yet assigned, derived from the
    /// whole configuration.
    fn pools(&self, config: &[Self::State]) -> Vec<BTreeSet<u64>>;
}

/// Checks the pool axioms after every interaction: pools and assigned labels
/// are pairwise disjoint and inside the range, a new label comes from the
/// interacting pair's pools, and bystanders' pools never change.
pub struct PoolMonitor<'p, P: PoolView> {
    proto: &'p P,
    range: u64,
    pools: Vec<BTreeSet<u64>>,
    failures: Vec<String>,
}

impl<'p, P: PoolView> PoolMonitor<'p, P> {
    pub fn new(proto: &'p P, initial: &[P::State]) -> Self {
        let mut m = Self {
            proto,
            range: proto.declared_range().unwrap_or(u64::MAX),
            pools: proto.pools(initial),
            failures: Vec::new(),
        };
        m.check_partition(0, initial);
        m
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    fn check_partition(&mut self, step: u64, config: &[P::State]) {
        let mut owned = BTreeSet::new();
        for (agent, state) in config.iter().enumerate() {
            let assigned = self.proto.output(state).map(|l| l.0);
            for label in self.pools[agent].iter().copied().chain(assigned) {
                if label < 1 || label > self.range {
                    self.failures
                        .push(format!("step {step}: agent {agent} holds {label} outside range"));
                }
                if !owned.insert(label) {
                    self.failures
                        .push(format!("step {step}: label {label} owned twice"));
                }
            }
        }
    }
}

impl<P: PoolView> Monitor<P::State> for PoolMonitor<'_, P> {
    fn on_change(
        &mut self,
        step: u64,
        (i, j): (usize, usize),
        (a, b): (&P::State, &P::State),
        config: &[P::State],
    ) {
        let next = self.proto.pools(config);
        for agent in 0..config.len() {
            if agent != i && agent != j && next[agent] != self.pools[agent] {
                self.failures
                    .push(format!("step {step}: bystander {agent} pool changed"));
            }
        }
        let donors: BTreeSet<u64> = self.pools[i].union(&self.pools[j]).copied().collect();
        for (agent, before) in [(i, a), (j, b)] {
            let old = self.proto.output(before);
            let new = self.proto.output(&config[agent]);
            if let (None, Some(l)) = (old, new) {
                if !donors.contains(&l.0) {
                    self.failures.push(format!(
                        "step {step}: agent {agent} got {l} from outside the pair's pools"
                    ));
                }
            }
        }
        self.pools = next;
        self.check_partition(step, config);
    }
}
