mod common;

use common::expected_hitting_time;
use poplabel::engine::{mix_seed, run, Protocol, RunLimits};
use poplabel::experiments::stats::Summary;
use poplabel::labeling::{Dispenser, SingleCycle};

fn simulated<P: Protocol>(proto: &P, trials: u64, master: u64) -> Summary {
    let limits = RunLimits::new(1 << 40);
    let values: Vec<f64> = (0..trials)
        .map(|j| {
            let r = run(proto, &limits, mix_seed(master, &[j])).unwrap().record;
            assert!(r.completed && r.validity.is_ok());
            r.interactions_used as f64
        })
        .collect();
    Summary::from_values(&values).unwrap()
}

#[test]
fn solver_matches_dispenser_closed_form() {
    // The leader meets one of u unlabeled agents with probability
    // 2u / (n (n - 1)), so E[T] = n (n - 1) / 2 * H(n - 1).
    for n in 2..=10usize {
        let harmonic: f64 = (1..n).map(|u| 1.0 / u as f64).sum();
        let closed = (n * (n - 1)) as f64 / 2.0 * harmonic;
        let h = expected_hitting_time(&Dispenser::new(n));
        assert!((h.expected - closed).abs() < 1e-9 * closed, "n={n}: {} vs {closed}", h.expected);
    }
}

#[test]
fn single_cycle_mean_matches_exact_expectation() {
    for (n, trials) in [(4usize, 20_000u64), (9, 4_000), (16, 2_000)] {
        let proto = SingleCycle::new(n).unwrap();
        let exact = expected_hitting_time(&proto).expected;
        let s = simulated(&proto, trials, 0x5eed + n as u64);
        let z = (s.mean - exact) / s.stderr;
        assert!(z.abs() <= 3.0, "n={n}: mean {} exact {exact} z {z}", s.mean);
    }
}

#[test]
fn n4_expectation_is_35() {
    let h = expected_hitting_time(&SingleCycle::new(4).unwrap());
    assert_eq!(h.configurations, 8);
    assert!((h.expected - 35.0).abs() < 1e-9);
}
