//! Interval splitting with a second phase that hands out `i + n`.
//!
//! The leader starts with label 1 and the interval `[2, n]`. An agent
//! holding `[q, r]` always carries label `q - 1`. Meeting an unlabeled agent,
//! it keeps `[q, m]` with `m = (q + r) / 2` and gives away label `m + 1`
//! together with `[m + 2, r]` when that is non-empty; a holder of `[q, q]`
//! gives away `q` and becomes a leaf. The leader counts its own interactions
//! and, once its counter latches, starts broadcasting the phase-two message.
//! An informed leaf with label `i <= E` then gives `i + n` to the first
//! unlabeled agent it meets.
//!
//! With `E = n` this is the `[1, 2n]` protocol. The epsilon variant uses
//! `E = ceil(n * eps)`: only agents labeled in `[1, E]` take part in the
//! broadcast, and the leader counts only interactions with such agents.

use std::collections::BTreeSet;

use crate::engine::{AuxRandom, Label, Protocol, ProtocolTraits, StateCounts};
use crate::error::Error;
use crate::primitives::{phase_threshold, PhaseCounter};
use crate::verify::PoolView;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntervalState {
    Unlabeled,
    /// Holds `[label + 1, hi]`.
    Holder {
        label: u32,
        hi: u32,
        informed: bool,
        leader: Option<PhaseCounter>,
    },
    Leaf {
        label: u32,
        informed: bool,
        spent: bool,
        leader: Option<PhaseCounter>,
    },
    /// Label in `(n, n + E]`, received in phase two.
    High(u32),
}

use IntervalState::*;

impl IntervalState {
    pub fn label(&self) -> Option<u32> {
        match *self {
            Unlabeled => None,
            Holder { label, .. } | Leaf { label, .. } | High(label) => Some(label),
        }
    }

    /// The interval `[lo, hi]` this agent holds, if any.
    pub fn interval(&self) -> Option<(u32, u32)> {
        match *self {
            Holder { label, hi, .. } => Some((label + 1, hi)),
            _ => None,
        }
    }

    fn informed(&self) -> bool {
        matches!(self, Holder { informed: true, .. } | Leaf { informed: true, .. })
    }

    fn set_informed(self) -> Self {
        match self {
            Holder { label, hi, leader, .. } => Holder { label, hi, informed: true, leader },
            Leaf { label, spent, leader, .. } => Leaf { label, informed: true, spent, leader },
            other => other,
        }
    }

    fn counter(&self) -> Option<PhaseCounter> {
        match *self {
            Holder { leader, .. } | Leaf { leader, .. } => leader,
            _ => None,
        }
    }

    fn with_counter(self, c: PhaseCounter) -> Self {
        match self {
            Holder { label, hi, informed, .. } => Holder { label, hi, informed, leader: Some(c) },
            Leaf { label, informed, spent, .. } => Leaf { label, informed, spent, leader: Some(c) },
            other => other,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntervalSplit {
    n: usize,
    /// Labels `[1, low]` take part in phase two.
    low: u32,
    epsilon: Option<f64>,
    threshold: u16,
}

impl IntervalSplit {
    /// The `[1, 2n]` protocol.
    pub fn two_n(n: usize, c_phase: f64) -> Result<Self, Error> {
        check_common(n, c_phase)?;
        Ok(Self {
            n,
            low: n as u32,
            epsilon: None,
            threshold: phase_threshold(n, c_phase),
        })
    }

    /// The `[1, (1 + eps) n]` protocol; needs `0 < eps <= 1` and `n * eps >= 1`.
    pub fn epsilon(n: usize, epsilon: f64, c_phase: f64) -> Result<Self, Error> {
        check_common(n, c_phase)?;
        if !(epsilon > 0.0 && epsilon <= 1.0) || (n as f64) * epsilon < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1] with n * epsilon >= 1, got epsilon = {epsilon}, n = {n}"
            )));
        }
        Ok(Self {
            n,
            low: low_labels(n, epsilon),
            epsilon: Some(epsilon),
            threshold: phase_threshold(n, c_phase),
        })
    }

    pub fn low_labels(&self) -> u32 {
        self.low
    }

    pub fn threshold(&self) -> u16 {
        self.threshold
    }

    fn is_low(&self, s: &IntervalState) -> bool {
        matches!(s, Holder { label, .. } | Leaf { label, .. } if *label <= self.low)
    }

    /// `giver` meets an unlabeled agent.
    fn give(&self, giver: IntervalState) -> Option<(IntervalState, IntervalState)> {
        match giver {
            Holder { label, hi, informed, leader } => {
                let q = label + 1;
                if hi > q {
                    let m = (q + hi) / 2;
                    let got = if m + 2 <= hi {
                        Holder { label: m + 1, hi, informed: false, leader: None }
                    } else {
                        Leaf { label: m + 1, informed: false, spent: false, leader: None }
                    };
                    let got = if informed && m + 1 <= self.low { got.set_informed() } else { got };
                    Some((Holder { label, hi: m, informed, leader }, got))
                } else {
                    let mut got = Leaf { label: q, informed: false, spent: false, leader: None };
                    if informed && q <= self.low {
                        got = got.set_informed();
                    }
                    Some((Leaf { label, informed, spent: false, leader }, got))
                }
            }
            Leaf { label, informed: true, spent: false, leader } if label <= self.low => Some((
                Leaf { label, informed: true, spent: true, leader },
                High(label + self.n as u32),
            )),
            _ => None,
        }
    }

    fn tick(&self, me: IntervalState, partner_before: &IntervalState) -> IntervalState {
        let Some(c) = me.counter() else { return me };
        if c.is_latched() {
            return me;
        }
        let counts = self.epsilon.is_none() || self.is_low(partner_before);
        if !counts {
            return me;
        }
        let c = c.tick();
        let me = me.with_counter(c);
        if c.is_latched() {
            me.set_informed()
        } else {
            me
        }
    }
}

fn check_common(n: usize, c_phase: f64) -> Result<(), Error> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(c_phase > 0.0 && c_phase.is_finite()) {
        return Err(Error::InvalidParameter(format!("c_phase must be positive, got {c_phase}")));
    }
    Ok(())
}

/// `ceil(n * eps)`, guarding against float noise such as `0.3 * 10`.
pub fn low_labels(n: usize, epsilon: f64) -> u32 {
    let x = n as f64 * epsilon;
    let r = x.round();
    let e = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (e as u32).clamp(1, n as u32)
}

impl Protocol for IntervalSplit {
    type State = IntervalState;

    fn name(&self) -> &'static str {
        if self.epsilon.is_some() {
            "interval-eps"
        } else {
            "interval-2n"
        }
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> IntervalState {
        Unlabeled
    }

    fn leader_state(&self) -> Option<IntervalState> {
        let leader = Some(PhaseCounter::new(self.threshold));
        Some(if self.n >= 2 {
            Holder { label: 1, hi: self.n as u32, informed: false, leader }
        } else {
            Leaf { label: 1, informed: false, spent: false, leader }
        })
    }

    fn delta(&self, a: &IntervalState, b: &IntervalState, _aux: &mut AuxRandom) -> (IntervalState, IntervalState) {
        let (mut x, mut y) = match (*a, *b) {
            (g, Unlabeled) => self.give(g).unwrap_or((*a, *b)),
            (Unlabeled, g) => self.give(g).map(|(g2, u2)| (u2, g2)).unwrap_or((*a, *b)),
            (p, q) if self.is_low(&p) && self.is_low(&q) && p.informed() != q.informed() => {
                (p.set_informed(), q.set_informed())
            }
            other => other,
        };
        x = self.tick(x, b);
        y = self.tick(y, a);
        (x, y)
    }

    fn output(&self, s: &IntervalState) -> Option<Label> {
        s.label().map(|l| Label(l as u64))
    }

    fn declared_range(&self) -> Option<u64> {
        Some(self.n as u64 + self.low as u64)
    }

    fn traits(&self) -> ProtocolTraits {
        ProtocolTraits {
            labeling: true,
            silent: true,
            safe: true,
            pool: true,
            certain_validity: false,
        }
    }

    fn encode(&self, s: &IntervalState) -> String {
        let flags = |informed: bool, leader: Option<PhaseCounter>| {
            let mut f = String::new();
            if informed {
                f.push('M');
            }
            if let Some(c) = leader {
                f.push_str(&format!("L{}", c.count()));
            }
            f
        };
        match *s {
            Unlabeled => "U".into(),
            Holder { label, hi, informed, leader } => {
                format!("{label}[{}:{hi}]{}", label + 1, flags(informed, leader))
            }
            Leaf { label, informed, spent, leader } => {
                format!("{label}{}{}", if spent { "*" } else { "" }, flags(informed, leader))
            }
            High(l) => format!("{l}"),
        }
    }

    fn quick_silent(&self, present: &StateCounts<IntervalState>) -> Option<bool> {
        let mut holder = false;
        let mut giving_leaf = false;
        let mut low_informed = false;
        let mut low_uninformed = false;
        let mut low_agents = 0usize;
        let mut running_counter = false;
        for (s, c) in present.iter() {
            match *s {
                Holder { .. } => holder = true,
                Leaf { label, informed: true, spent: false, .. } if label <= self.low => giving_leaf = true,
                _ => {}
            }
            if self.is_low(s) {
                low_agents += c;
                if s.informed() {
                    low_informed = true;
                } else {
                    low_uninformed = true;
                }
            }
            if s.counter().is_some_and(|c| !c.is_latched()) {
                running_counter = true;
            }
        }
        let unlabeled = present.count(&Unlabeled) > 0;
        if unlabeled && (holder || giving_leaf) {
            return Some(false);
        }
        if low_informed && low_uninformed {
            return Some(false);
        }
        if running_counter {
            // The leader is itself a low agent and needs a partner; in the
            // epsilon variant only low partners count.
            let partner = if self.epsilon.is_none() { present.total() >= 2 } else { low_agents >= 2 };
            if partner {
                return Some(false);
            }
        }
        Some(true)
    }

    fn singleton_label(&self) -> Option<Label> {
        Some(Label(1))
    }
}

impl PoolView for IntervalSplit {
    fn pools(&self, config: &[IntervalState]) -> Vec<BTreeSet<u64>> {
        let n = self.n as u64;
        let low = self.low as u64;
        let high = |l: u64| (l <= low).then_some(l + n);
        config
            .iter()
            .map(|s| match *s {
                Holder { label, hi, .. } => {
                    let range = label as u64 + 1..=hi as u64;
                    range
                        .clone()
                        .chain(range.filter_map(high))
                        .chain(high(label as u64))
                        .collect()
                }
                Leaf { label, spent: false, .. } => high(label as u64).into_iter().collect(),
                _ => BTreeSet::new(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn holder(label: u32, hi: u32) -> IntervalState {
        Holder { label, hi, informed: false, leader: None }
    }

    fn leaf(label: u32) -> IntervalState {
        Leaf { label, informed: false, spent: false, leader: None }
    }

    #[test]
    fn split_gives_middle_label_and_right_half() {
        let p = IntervalSplit::two_n(8, 4.0).unwrap();
        let mut aux = AuxRandom::new(0);
        // Holder of [2, 8].
        let (a, b) = p.delta(&holder(1, 8), &Unlabeled, &mut aux);
        assert_eq!(a.interval(), Some((2, 5)));
        assert_eq!(b.label(), Some(6));
        assert_eq!(b.interval(), Some((7, 8)));
    }

    #[test]
    fn singleton_is_given_away() {
        let p = IntervalSplit::two_n(8, 4.0).unwrap();
        let mut aux = AuxRandom::new(0);
        // Holder of [4, 4].
        let (a, b) = p.delta(&Unlabeled, &holder(3, 4), &mut aux);
        assert_eq!(a, leaf(4));
        assert_eq!(b, leaf(3));
    }

    #[test]
    fn split_without_right_child_yields_leaf() {
        let p = IntervalSplit::two_n(8, 4.0).unwrap();
        let mut aux = AuxRandom::new(0);
        // [7, 8]: m = 7, gives 8, nothing left for the right.
        let (a, b) = p.delta(&holder(6, 8), &Unlabeled, &mut aux);
        assert_eq!(a.interval(), Some((7, 7)));
        assert_eq!(b, leaf(8));
    }

    #[test]
    fn informed_leaf_gives_high_label_once() {
        let p = IntervalSplit::two_n(8, 4.0).unwrap();
        let mut aux = AuxRandom::new(0);
        let l = leaf(5).set_informed();
        let (a, b) = p.delta(&l, &Unlabeled, &mut aux);
        assert_eq!(b, High(13));
        assert_eq!(p.delta(&a, &Unlabeled, &mut aux), (a, Unlabeled));
        assert_eq!(p.delta(&leaf(5), &Unlabeled, &mut aux), (leaf(5), Unlabeled));
    }

    #[test]
    fn low_agents_spread_phase_two() {
        let p = IntervalSplit::epsilon(16, 0.25, 4.0).unwrap();
        let mut aux = AuxRandom::new(0);
        let m = leaf(2).set_informed();
        assert_eq!(p.delta(&m, &leaf(4), &mut aux), (m, leaf(4).set_informed()));
        // Label 5 is above E = 4 and does not take part.
        assert_eq!(p.delta(&m, &leaf(5), &mut aux), (m, leaf(5)));
        assert_eq!(p.delta(&m, &High(18), &mut aux), (m, High(18)));
    }

    #[test]
    fn leader_latches_and_informs_itself() {
        let p = IntervalSplit::two_n(4, 1.0).unwrap();
        let mut aux = AuxRandom::new(0);
        let mut s = p.leader_state().unwrap();
        let other = leaf(4);
        for _ in 0..p.threshold() {
            s = p.delta(&s, &other, &mut aux).0;
        }
        assert!(s.informed());
        assert!(s.counter().unwrap().is_latched());
    }

    #[test]
    fn epsilon_leader_counts_only_low_partners() {
        let p = IntervalSplit::epsilon(64, 0.25, 1.0).unwrap();
        let mut aux = AuxRandom::new(0);
        let s = Leaf { label: 1, informed: false, spent: true, leader: Some(PhaseCounter::new(6)) };
        assert_eq!(p.delta(&s, &High(70), &mut aux).0, s);
        assert_eq!(p.delta(&s, &leaf(40), &mut aux).0, s);
        assert_eq!(p.delta(&s, &leaf(3), &mut aux).0.counter().unwrap().count(), 1);
    }

    #[test]
    fn low_label_rounding() {
        assert_eq!(low_labels(10, 0.3), 3);
        assert_eq!(low_labels(1024, 0.25), 256);
        assert_eq!(low_labels(10, 0.25), 3);
        assert_eq!(low_labels(7, 1.0), 7);
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(IntervalSplit::epsilon(10, 0.0, 1.0).is_err());
        assert!(IntervalSplit::epsilon(10, 1.5, 1.0).is_err());
        assert!(IntervalSplit::epsilon(10, 0.05, 1.0).is_err());
        assert!(IntervalSplit::epsilon(10, 0.1, 1.0).is_ok());
    }
}
