use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCHEDULER_STREAM: u64 = 0;
const AUX_STREAM: u64 = 1;

/// Uniform random scheduler over the `n(n-1)` ordered pairs of distinct
/// agents.
#[derive(Clone, Debug)]
pub struct Scheduler {
    rng: ChaCha8Rng,
    n: u64,
    pairs: u64,
}

impl Scheduler {
    /// Panics if `n < 2`; populations that small never reach the scheduler.
    pub fn new(n: usize, seed: u64) -> Self {
        assert!(n >= 2, "the scheduler needs at least two agents");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SCHEDULER_STREAM);
        let n = n as u64;
        Self {
            rng,
            n,
            pairs: n * (n - 1),
        }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Draws an ordered `(initiator, responder)` pair with `initiator != responder`.
    #[inline]
    pub fn draw(&mut self) -> (usize, usize) {
        let idx = self.rng.gen_range(0..self.pairs);
        let i = idx / (self.n - 1);
        let mut j = idx % (self.n - 1);
        if j >= i {
            j += 1;
        }
        (i as usize, j as usize)
    }
}

/// Per-interaction random input available to randomized transition
/// functions. Seeded from the master seed on a stream distinct from the
/// scheduler's.
#[derive(Clone, Debug)]
pub struct AuxRandom {
    rng: ChaCha8Rng,
}

impl AuxRandom {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(AUX_STREAM);
        Self { rng }
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.rng.gen()
    }

    /// Uniform in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.gen_range(0..bound)
    }

    /// Uniform in `[lo, hi]`.
    pub fn between(&mut self, lo: u64, hi: u64) -> u64 {
        self.rng.gen_range(lo..=hi)
    }

    /// Number of consecutive heads before the first tail, at most `cap`.
    pub fn heads_run(&mut self, cap: u32) -> u32 {
        let word: u64 = self.rng.gen();
        word.trailing_ones().min(cap)
    }
}

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic mixer combining a master seed with a sequence of keys.
pub fn mix_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix(master), |acc, &k| splitmix(acc ^ splitmix(k)))
}
