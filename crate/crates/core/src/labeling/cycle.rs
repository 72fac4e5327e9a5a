//! Two dispensers A and B labeling free agents one at a time.
//!
//! A free agent first takes a partial label `a` from A, then `b` from B and
//! finalizes with `a * side + b`. B then meets A and both move to the next
//! smaller combination. Labels are dispensed from the top of the range down
//! to 3, after which A takes 1 and B takes 2.

/// What a dispenser is waiting for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Await {
    Free,
    Partner,
}

/// A non-final role inside one cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    A { a: u16, wait: Await },
    B { b: u16, wait: Await },
    /// Free agent holding A's partial label.
    Partial { a: u16 },
}

/// Result of a cycle interaction for one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Next {
    Role(Role),
    Final(u32),
}

/// Shape of one cycle over the labels `offset + 1 ..= offset + size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub side: u16,
    pub size: u32,
    pub offset: u32,
}

impl Geometry {
    /// `size` must be at least 3 and at most `side^2`.
    pub fn new(size: u32, side: u16, offset: u32) -> Self {
        debug_assert!(size >= 3 && size <= side as u32 * side as u32);
        Self { side, size, offset }
    }

    /// Partial labels of the first combination, which encodes `size`.
    pub fn start(&self) -> (u16, u16) {
        let s = self.side as u32;
        (((self.size - 1) / s) as u16, ((self.size - 1) % s + 1) as u16)
    }

    pub fn value(&self, a: u16, b: u16) -> u32 {
        a as u32 * self.side as u32 + b as u32
    }

    pub fn start_a(&self) -> Role {
        Role::A { a: self.start().0, wait: Await::Free }
    }

    pub fn start_b(&self) -> Role {
        Role::B { b: self.start().1, wait: Await::Free }
    }

    /// A awaiting a free agent hands it its partial label.
    pub fn with_free(&self, r: Role) -> Option<(Role, Role)> {
        match r {
            Role::A { a, wait: Await::Free } => {
                Some((Role::A { a, wait: Await::Partner }, Role::Partial { a }))
            }
            _ => None,
        }
    }

    /// Interaction of two roles of this cycle, in the given order.
    pub fn pair(&self, x: Role, y: Role) -> Option<(Next, Next)> {
        use Role::*;
        match (x, y) {
            (B { b, wait: Await::Free }, Partial { a }) => Some((
                Next::Role(B { b, wait: Await::Partner }),
                Next::Final(self.offset + self.value(a, b)),
            )),
            (A { a, wait: Await::Partner }, B { b, wait: Await::Partner }) => {
                self.negotiate(a, b).map(|(x2, y2)| (x2, y2))
            }
            _ => None,
        }
    }

    fn negotiate(&self, a: u16, b: u16) -> Option<(Next, Next)> {
        use Role::*;
        let conclude = (Next::Final(self.offset + 1), Next::Final(self.offset + 2));
        // The label just dispensed was 3, so only A's and B's own remain.
        if self.value(a, b) == 3 || (a == 0 && b == 2) {
            return Some(conclude);
        }
        if (a == 0 && b > 2) || (a > 0 && b > 1) {
            return Some((
                Next::Role(A { a, wait: Await::Free }),
                Next::Role(B { b: b - 1, wait: Await::Free }),
            ));
        }
        if a > 0 && b == 1 {
            return Some((
                Next::Role(A { a: a - 1, wait: Await::Free }),
                Next::Role(B { b: self.side, wait: Await::Free }),
            ));
        }
        None
    }

    /// Labels A and B still control, split between them, given the roles
    /// present in this cycle. Used by pool checks.
    pub fn remaining(&self, a: Option<Role>, b: Option<Role>) -> (Vec<u32>, Vec<u32>, Option<u32>) {
        let b_val = match b {
            Some(Role::B { b, .. }) => b,
            _ => self.start().1,
        };
        let (a_val, a_wait) = match a {
            Some(Role::A { a, wait }) => (a, wait),
            _ => {
                let (a0, _) = self.start();
                (a0, Await::Free)
            }
        };
        let b_wait = match b {
            Some(Role::B { wait, .. }) => wait,
            _ => Await::Free,
        };
        let cur = self.value(a_val, b_val);
        // The combination A and B currently point at, and whether it has been
        // handed to a free agent yet.
        let (top, in_flight) = match (a_wait, b_wait) {
            (Await::Free, _) => (cur, None),
            (Await::Partner, Await::Free) => (cur - 1, Some(cur)),
            (Await::Partner, Await::Partner) => (cur - 1, None),
        };
        let mut a_pool = vec![self.offset + 1];
        a_pool.extend((3..=top).map(|v| self.offset + v));
        (a_pool, vec![self.offset + 2], in_flight.map(|v| self.offset + v))
    }
}

/// Smallest side with `side^2 >= n`.
pub fn ceil_sqrt(n: u32) -> u16 {
    let mut s = (n as f64).sqrt() as u32;
    while s * s < n {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    s as u16
}

pub fn is_square(n: u32) -> bool {
    let s = ceil_sqrt(n) as u32;
    s * s == n
}
