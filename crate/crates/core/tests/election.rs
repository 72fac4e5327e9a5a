use poplabel::engine::{mix_seed, run_monitored, LeaderMode, Monitor, RunLimits};
use poplabel::primitives::{count_leaders, ElectionParams, ElectionState, LeaderElection, DEFAULT_C_ELECT};
use rayon::prelude::*;

/// Tracks leader and contender counts through a run.
struct Watch {
    fresh: usize,
    contenders: usize,
    leaders: usize,
    max_leaders: usize,
    contender_increase_after_junta: bool,
}

impl Monitor<ElectionState> for Watch {
    fn on_change(&mut self, _step: u64, (i, j): (usize, usize), (a, b): (&ElectionState, &ElectionState), config: &[ElectionState]) {
        let contenders_before = self.contenders;
        let fresh_before = self.fresh;
        for (before, after) in [(a, &config[i]), (b, &config[j])] {
            self.fresh -= usize::from(*before == ElectionState::Fresh);
            self.contenders -= usize::from(matches!(before, ElectionState::Contender { .. }));
            self.contenders += usize::from(matches!(after, ElectionState::Contender { .. }));
            self.leaders -= usize::from(*before == ElectionState::Leader);
            self.leaders += usize::from(*after == ElectionState::Leader);
        }
        self.max_leaders = self.max_leaders.max(self.leaders);
        if fresh_before == 0 && self.contenders > contenders_before {
            self.contender_increase_after_junta = true;
        }
    }
}

struct Trial {
    final_leaders: usize,
    max_leaders: usize,
    monotone: bool,
    interactions: u64,
}

fn trial(n: usize, seed: u64) -> Trial {
    let proto = LeaderElection::new(n, ElectionParams::for_population(n, DEFAULT_C_ELECT), LeaderMode::Elected);
    let mut w = Watch {
        fresh: n,
        contenders: 0,
        leaders: 0,
        max_leaders: 0,
        contender_increase_after_junta: false,
    };
    let out = run_monitored(&proto, &RunLimits::new(u64::MAX), seed, &mut [&mut w]).unwrap();
    assert!(out.record.completed);
    assert_eq!(w.leaders, count_leaders(out.final_config.states()));
    Trial {
        final_leaders: w.leaders,
        max_leaders: w.max_leaders,
        monotone: !w.contender_increase_after_junta,
        interactions: out.record.interactions_used,
    }
}

#[test]
fn exactly_one_leader_in_every_trial() {
    for n in [64usize, 256, 1024] {
        let runs: Vec<Trial> = (0..500u64)
            .into_par_iter()
            .map(|j| trial(n, mix_seed(0xe1ec7, &[n as u64, j])))
            .collect();
        let bad = runs.iter().filter(|r| r.final_leaders != 1 || r.max_leaders != 1).count();
        assert_eq!(bad, 0, "n={n}: {bad} of 500 trials without a unique leader");
        assert!(runs.iter().all(|r| r.monotone), "n={n}: contenders grew after every agent drew a key");
        if n == 256 {
            let mean = runs.iter().map(|r| r.interactions as f64).sum::<f64>() / runs.len() as f64;
            let nlnn = n as f64 * (n as f64).ln();
            assert!(mean <= 20.0 * nlnn, "mean {mean} exceeds 20 n ln n = {}", 20.0 * nlnn);
        }
    }
}
