use crate::engine::{is_silent_among, AuxRandom, Label, Protocol, ProtocolTraits, StateCounts};

/// Single-cycle without knowledge of `n`: pairs are dispensed in diagonal
/// order `(1,0), (0,2), (1,1), (2,0), (0,3), ...`, with A holding `(0,0)` and B
/// holding `(0,1)`. The dispensers never stop looking for free agents.
///
/// Pair `(i, j)` is reported as label `cantor(i, j) + 1`, so the first `n`
/// pairs handed out make up exactly `[1, n]`.
#[derive(Clone, Debug)]
pub struct Diagonal {
    n: usize,
}

impl Diagonal {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

/// `(i + j)(i + j + 1) / 2 + i`.
pub fn cantor(i: u64, j: u64) -> u64 {
    let d = i + j;
    d * (d + 1) / 2 + i
}

/// The pair after `(i, j)` in diagonal order.
pub fn next_pair(i: u32, j: u32) -> (u32, u32) {
    if j > 0 {
        (i + 1, j - 1)
    } else {
        (0, i + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagonalState {
    Init,
    Free,
    /// Dispenser A about to hand out `i`; `waiting` for B after doing so.
    A { i: u32, waiting: bool },
    B { j: u32, waiting: bool },
    Partial { i: u32 },
    Final { i: u32, j: u32 },
}

use DiagonalState::*;

impl Diagonal {
    fn ordered(&self, x: DiagonalState, y: DiagonalState) -> Option<(DiagonalState, DiagonalState)> {
        match (x, y) {
            (Init, Free) => Some((A { i: 1, waiting: false }, B { j: 0, waiting: false })),
            (A { i, waiting: false }, Free) => Some((A { i, waiting: true }, Partial { i })),
            (B { j, waiting: false }, Partial { i }) => Some((B { j, waiting: true }, Final { i, j })),
            (A { i, waiting: true }, B { j, waiting: true }) => {
                let (i2, j2) = next_pair(i, j);
                Some((A { i: i2, waiting: false }, B { j: j2, waiting: false }))
            }
            _ => None,
        }
    }
}

impl Protocol for Diagonal {
    type State = DiagonalState;

    fn name(&self) -> &'static str {
        "single-cycle-diagonal"
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> DiagonalState {
        Free
    }

    fn leader_state(&self) -> Option<DiagonalState> {
        Some(Init)
    }

    fn delta(&self, a: &DiagonalState, b: &DiagonalState, _aux: &mut AuxRandom) -> (DiagonalState, DiagonalState) {
        if let Some(r) = self.ordered(*a, *b) {
            return r;
        }
        if let Some((y, x)) = self.ordered(*b, *a) {
            return (x, y);
        }
        (*a, *b)
    }

    fn output(&self, s: &DiagonalState) -> Option<Label> {
        match *s {
            A { .. } => Some(Label(cantor(0, 0) + 1)),
            B { .. } => Some(Label(cantor(0, 1) + 1)),
            Final { i, j } => Some(Label(cantor(i as u64, j as u64) + 1)),
            _ => None,
        }
    }

    /// Labels are distinct but the protocol does not know `n`; the range is
    /// the one a closed population of `n` agents ends up using.
    fn declared_range(&self) -> Option<u64> {
        Some(self.n as u64)
    }

    fn traits(&self) -> ProtocolTraits {
        ProtocolTraits {
            labeling: true,
            silent: false,
            safe: true,
            pool: false,
            certain_validity: true,
        }
    }

    fn quick_silent(&self, present: &StateCounts<DiagonalState>) -> Option<bool> {
        Some(is_silent_among(self, present, |s| matches!(s, Final { .. })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, RunLimits};
    use std::collections::HashSet;

    #[test]
    fn cantor_examples() {
        assert_eq!(cantor(0, 1), 1);
        assert_eq!(cantor(0, 2), 3);
        assert_eq!(cantor(0, 3), 6);
        for j in 0..50 {
            assert_eq!(cantor(0, j), j * (j + 1) / 2);
            assert_eq!(cantor(j, 0), (j + 1) * (j + 2) / 2 - 1);
        }
    }

    #[test]
    fn cantor_is_injective() {
        let mut seen = HashSet::new();
        for d in 0..=100u64 {
            for i in 0..=d {
                assert!(seen.insert(cantor(i, d - i)));
            }
        }
    }

    #[test]
    fn diagonal_order() {
        let mut p = (1, 0);
        let mut order = vec![p];
        for _ in 0..7 {
            p = next_pair(p.0, p.1);
            order.push(p);
        }
        assert_eq!(order, vec![(1, 0), (0, 2), (1, 1), (2, 0), (0, 3), (1, 2), (2, 1), (3, 0)]);
        let values: Vec<u64> = order.iter().map(|&(i, j)| cantor(i as u64, j as u64)).collect();
        assert_eq!(values, (2..10).collect::<Vec<_>>());
    }

    #[test]
    fn closed_population_gets_distinct_labels() {
        let out = run(&Diagonal::new(20), &RunLimits::new(10_000_000), 3).unwrap();
        assert!(out.record.completed);
        let labels: HashSet<_> = out.record.final_labels.iter().map(|l| l.unwrap()).collect();
        assert_eq!(labels.len(), 20);
    }
}
