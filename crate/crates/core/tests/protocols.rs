use std::collections::{BTreeSet, HashSet};

use poplabel::engine::{mix_seed, run, run_monitored, LeaderMode, RunLimits};
use poplabel::labeling::{
    run_config, Diagonal, Geometry, IntervalSplit, IntervalState, ProtocolConfig, ProtocolKind,
};
use rayon::prelude::*;

fn labels(r: &poplabel::engine::RunRecord) -> Vec<u64> {
    r.final_labels.iter().flatten().map(|l| l.0).collect()
}

#[test]
fn interval_two_n_128_is_always_valid() {
    let proto = IntervalSplit::two_n(128, 2.5).unwrap();
    let limits = RunLimits::new(100_000_000);
    let bad: usize = (0..500u64)
        .into_par_iter()
        .map(|j| {
            let r = run(&proto, &limits, mix_seed(128, &[j])).unwrap().record;
            let l = labels(&r);
            let distinct: HashSet<_> = l.iter().collect();
            let ok = r.completed
                && r.safety.is_ok()
                && l.len() == 128
                && distinct.len() == 128
                && l.iter().all(|&x| (1..=256).contains(&x));
            usize::from(!ok)
        })
        .sum();
    assert_eq!(bad, 0);
}

#[test]
fn interval_two_n_64_range() {
    for seed in 0..20 {
        let cfg = ProtocolConfig::new(ProtocolKind::Interval2n, 64);
        let r = run_config(&cfg, &RunLimits::new(cfg.default_max_interactions()), seed).unwrap();
        assert!(r.validity.is_ok());
        assert!(labels(&r).iter().all(|&l| l <= 128));
    }
}

#[test]
fn interval_epsilon_range_320() {
    let cfg = ProtocolConfig::new(ProtocolKind::IntervalEps, 256).with_epsilon(0.25);
    let limits = RunLimits::new(cfg.default_max_interactions());
    let worst = (0..300u64)
        .into_par_iter()
        .map(|j| {
            let r = run_config(&cfg, &limits, mix_seed(256, &[j])).unwrap();
            assert!(r.completed && r.validity.is_ok() && r.safety.is_ok());
            labels(&r).into_iter().max().unwrap()
        })
        .max()
        .unwrap();
    assert!(worst <= 320, "label {worst}");
}

#[test]
fn interval_state_budget_and_partition_tree() {
    let n = 256;
    let proto = IntervalSplit::two_n(n, 2.5).unwrap();
    for seed in 0..10 {
        let mut nodes = BTreeSet::new();
        let mut watch = |_: u64, _: (usize, usize), _: (&IntervalState, &IntervalState), config: &[IntervalState]| {
            nodes.extend(config.iter().filter_map(IntervalState::interval));
        };
        let out = run_monitored(&proto, &RunLimits::new(1 << 32), seed, &mut [&mut watch]).unwrap();
        assert!(out.record.completed);
        // Every interval ever held is a node of the partition tree of [2, n].
        assert!(nodes.len() <= 2 * n - 1);
        assert!(nodes.iter().all(|&(q, r)| 2 <= q && q <= r && r as usize <= n));
        let log = (n as f64).log2().ceil() as usize;
        assert!(out.record.census <= 7 * n + 8 * log, "census {}", out.record.census);
    }
}

#[test]
fn single_cycle_label_algebra_is_a_bijection() {
    for side in 2u16..=12 {
        let size = side as u32 * side as u32;
        let g = Geometry::new(size, side, 0);
        let mut seen = BTreeSet::new();
        for a in 0..side {
            for b in 1..=side {
                let v = g.value(a, b);
                assert!((1..=size).contains(&v));
                assert!(seen.insert(v));
            }
        }
        assert_eq!(seen.len(), size as usize);
    }
}

#[test]
fn diagonal_labels_stay_distinct() {
    for seed in 0..3 {
        let r = run(&Diagonal::new(64), &RunLimits::new(10_000_000), seed).unwrap().record;
        let l = labels(&r);
        let distinct: HashSet<_> = l.iter().collect();
        assert_eq!(distinct.len(), l.len());
        assert!(l.len() >= 60, "only {} agents labeled", l.len());
        assert!(r.safety.is_ok());
    }
}

#[test]
fn elected_mode_runs_are_valid() {
    use ProtocolKind::*;
    let cfgs = [
        ProtocolConfig::new(Dispenser, 32),
        ProtocolConfig::new(Interval2n, 128),
        ProtocolConfig::new(IntervalEps, 128).with_epsilon(0.5),
        ProtocolConfig::new(SingleCycle, 36),
        ProtocolConfig::new(KCycle, 64).with_k(4),
    ];
    for cfg in cfgs {
        let cfg = cfg.with_leader(LeaderMode::Elected);
        let limits = RunLimits::new(cfg.default_max_interactions());
        for seed in 0..10 {
            let r = run_config(&cfg, &limits, seed).unwrap();
            assert!(r.completed && r.validity.is_ok() && r.safety.is_ok(), "{:?} seed {seed}", cfg.kind);
        }
    }
}
