use std::collections::BTreeSet;

use super::cycle::{is_square, Geometry, Next, Role};
use super::single_cycle::encode_role;
use crate::engine::{is_silent_among, AuxRandom, Label, Protocol, ProtocolTraits, StateCounts};
use crate::error::Error;
use crate::verify::PoolView;

/// `k` independent dispenser pairs, cycle `c` labeling
/// `[c * n/k + 1, (c + 1) * n/k]`.
///
/// The leader nominates, in order, B of cycle 0, then A and B of cycles
/// `1..k`, one per free agent it meets, and then becomes A of cycle 0. With
/// `k = 1` this is exactly the single-cycle protocol.
#[derive(Clone, Debug)]
pub struct KCycle {
    n: usize,
    k: u16,
    geoms: Vec<Geometry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KCycleState {
    /// Leader that has made `made` nominations.
    Lead { made: u16 },
    Free,
    Cycle { c: u16, role: Role },
    Final(u32),
}

use KCycleState::*;

impl KCycle {
    /// Needs `k >= 1`, `k | n` and `n / k` a perfect square of at least 4.
    pub fn new(n: usize, k: usize) -> Result<Self, Error> {
        if k == 0 || k > u16::MAX as usize / 2 || n % k != 0 {
            return Err(Error::InvalidParameter(format!("k-cycle needs k >= 1 dividing n (n = {n}, k = {k})")));
        }
        let m = n / k;
        if m < 4 || m > u32::MAX as usize || !is_square(m as u32) {
            return Err(Error::InvalidParameter(format!(
                "k-cycle needs n / k to be a perfect square >= 4 (n = {n}, k = {k})"
            )));
        }
        let side = (m as f64).sqrt().round() as u16;
        let geoms = (0..k).map(|c| Geometry::new(m as u32, side, (c * m) as u32)).collect();
        Ok(Self { n, k: k as u16, geoms })
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    /// `n + 2k + k (5 sqrt(n/k) + 4)`.
    pub fn state_budget(&self) -> usize {
        let k = self.k as usize;
        self.n + 2 * k + k * (5 * self.geoms[0].side as usize + 4)
    }

    /// Role handed to the `j`-th nominee: B0, A1, B1, ..., A(k-1), B(k-1).
    fn nominee(&self, j: u16) -> KCycleState {
        if j == 0 {
            return Cycle { c: 0, role: self.geoms[0].start_b() };
        }
        let c = (j + 1) / 2;
        let g = &self.geoms[c as usize];
        let role = if j % 2 == 1 { g.start_a() } else { g.start_b() };
        Cycle { c, role }
    }

    fn ordered(&self, x: KCycleState, y: KCycleState) -> Option<(KCycleState, KCycleState)> {
        match (x, y) {
            (Lead { made }, Free) => {
                let nominee = self.nominee(made);
                let made = made + 1;
                let leader = if made == 2 * self.k - 1 {
                    Cycle { c: 0, role: self.geoms[0].start_a() }
                } else {
                    Lead { made }
                };
                Some((leader, nominee))
            }
            (Cycle { c, role }, Free) => self.geoms[c as usize]
                .with_free(role)
                .map(|(r, f)| (Cycle { c, role: r }, Cycle { c, role: f })),
            (Cycle { c, role: r }, Cycle { c: d, role: q }) if c == d => {
                let lift = |s: Next| match s {
                    Next::Role(role) => Cycle { c, role },
                    Next::Final(l) => Final(l),
                };
                self.geoms[c as usize].pair(r, q).map(|(r2, q2)| (lift(r2), lift(q2)))
            }
            _ => None,
        }
    }
}

impl Protocol for KCycle {
    type State = KCycleState;

    fn name(&self) -> &'static str {
        "k-cycle"
    }

    fn population(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> KCycleState {
        Free
    }

    fn leader_state(&self) -> Option<KCycleState> {
        Some(Lead { made: 0 })
    }

    fn delta(&self, a: &KCycleState, b: &KCycleState, _aux: &mut AuxRandom) -> (KCycleState, KCycleState) {
        if let Some(r) = self.ordered(*a, *b) {
            return r;
        }
        if let Some((y, x)) = self.ordered(*b, *a) {
            return (x, y);
        }
        (*a, *b)
    }

    fn output(&self, s: &KCycleState) -> Option<Label> {
        match s {
            Final(l) => Some(Label(*l as u64)),
            _ => None,
        }
    }

    fn declared_range(&self) -> Option<u64> {
        Some(self.n as u64)
    }

    fn traits(&self) -> ProtocolTraits {
        ProtocolTraits {
            labeling: true,
            silent: true,
            safe: true,
            pool: true,
            certain_validity: true,
        }
    }

    fn encode(&self, s: &KCycleState) -> String {
        match s {
            Lead { made } => format!("L{made}"),
            Free => "F.init".into(),
            Cycle { c, role } => format!("{c}:{}", encode_role(role)),
            Final(l) => format!("={l}"),
        }
    }

    fn quick_silent(&self, present: &StateCounts<KCycleState>) -> Option<bool> {
        Some(is_silent_among(self, present, |s| matches!(s, Final(_))))
    }
}

impl PoolView for KCycle {
    fn pools(&self, config: &[KCycleState]) -> Vec<BTreeSet<u64>> {
        let k = self.k as usize;
        let mut a = vec![None; k];
        let mut b = vec![None; k];
        let mut lead_made = None;
        for s in config {
            match *s {
                Cycle { c, role: r @ Role::A { .. } } => a[c as usize] = Some(r),
                Cycle { c, role: r @ Role::B { .. } } => b[c as usize] = Some(r),
                Lead { made } => lead_made = Some(made),
                _ => {}
            }
        }
        let made = lead_made.unwrap_or(2 * self.k - 1) as usize;
        let mut a_pools = Vec::with_capacity(k);
        let mut b_pools = Vec::with_capacity(k);
        let mut flights = Vec::with_capacity(k);
        let mut lead = BTreeSet::new();
        for c in 0..k {
            let (ap, bp, fl) = self.geoms[c].remaining(a[c], b[c]);
            // Nominee index of this cycle's A and B; cycle 0's A is the leader.
            let (a_idx, b_idx) = if c == 0 { (2 * k - 1, 0) } else { (2 * c - 1, 2 * c) };
            let a_live = made > a_idx || (c == 0 && lead_made.is_none());
            if a_live {
                a_pools.push(ap.iter().map(|&v| v as u64).collect::<BTreeSet<_>>());
            } else {
                lead.extend(ap.iter().map(|&v| v as u64));
                a_pools.push(BTreeSet::new());
            }
            if made > b_idx {
                b_pools.push(bp.iter().map(|&v| v as u64).collect::<BTreeSet<_>>());
            } else {
                lead.extend(bp.iter().map(|&v| v as u64));
                b_pools.push(BTreeSet::new());
            }
            flights.push(fl);
        }
        config
            .iter()
            .map(|s| match *s {
                Lead { .. } => lead.clone(),
                Cycle { c, role: Role::A { .. } } => a_pools[c as usize].clone(),
                Cycle { c, role: Role::B { .. } } => b_pools[c as usize].clone(),
                Cycle { c, role: Role::Partial { .. } } => {
                    flights[c as usize].map(|v| v as u64).into_iter().collect()
                }
                _ => BTreeSet::new(),
            })
            .collect()
    }
}
