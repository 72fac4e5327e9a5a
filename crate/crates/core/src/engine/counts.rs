use std::collections::HashMap;
use std::hash::Hash;

use super::{AuxRandom, Protocol};

/// Multiset of the states currently present in a configuration.
#[derive(Clone, Debug)]
pub struct StateCounts<S> {
    counts: HashMap<S, usize>,
}

impl<S: Clone + Eq + Hash> Default for StateCounts<S> {
    fn default() -> Self {
        Self {
            counts: HashMap::new(),
        }
    }
}

impl<S: Clone + Eq + Hash> StateCounts<S> {
    pub fn from_states<'a, I>(states: I) -> Self
    where
        I: IntoIterator<Item = &'a S>,
        S: 'a,
    {
        let mut c = Self::default();
        for s in states {
            c.add(s);
        }
        c
    }

    pub fn add(&mut self, s: &S) {
        match self.counts.get_mut(s) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(s.clone(), 1);
            }
        }
    }

    pub fn remove(&mut self, s: &S) {
        if let Some(c) = self.counts.get_mut(s) {
            *c -= 1;
            if *c == 0 {
                self.counts.remove(s);
            }
        }
    }

    pub fn count(&self, s: &S) -> usize {
        self.counts.get(s).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, usize)> {
        self.counts.iter().map(|(s, &c)| (s, c))
    }

    pub fn states(&self) -> impl Iterator<Item = &S> {
        self.counts.keys()
    }

    /// Number of agents whose state satisfies `pred`.
    pub fn count_where(&self, mut pred: impl FnMut(&S) -> bool) -> usize {
        self.counts
            .iter()
            .filter(|(s, _)| pred(s))
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn any(&self, mut pred: impl FnMut(&S) -> bool) -> bool {
        self.counts.keys().any(|s| pred(s))
    }
}

const PROBE_SEEDS: [u64; 3] = [0x5EED_0001, 0x5EED_0002, 0x5EED_0003];

/// Terminality by definition: every ordered pair of present states (a state
/// paired with itself only when at least two agents hold it) maps to itself.
///
/// Randomized transitions are probed with a few fixed auxiliary streams.
pub fn is_silent_exhaustive<P: Protocol>(proto: &P, present: &StateCounts<P::State>) -> bool {
    is_silent_among(proto, present, |_| false)
}

/// [`is_silent_exhaustive`] restricted to the present states that are not
/// `inert`. Exact whenever inert states map to themselves with any partner.
pub fn is_silent_among<P: Protocol>(
    proto: &P,
    present: &StateCounts<P::State>,
    inert: impl Fn(&P::State) -> bool,
) -> bool {
    let mut states: Vec<(&P::State, usize)> = present.iter().filter(|(s, _)| !inert(s)).collect();
    states.sort_by(|a, b| a.0.cmp(b.0));
    let mut probes: Vec<AuxRandom> = PROBE_SEEDS.iter().map(|&s| AuxRandom::new(s)).collect();
    for (a, ca) in &states {
        for (b, _) in &states {
            if a == b && *ca < 2 {
                continue;
            }
            for aux in probes.iter_mut() {
                let (a2, b2) = proto.delta(a, b, aux);
                if &a2 != *a || &b2 != *b {
                    return false;
                }
            }
        }
    }
    true
}
