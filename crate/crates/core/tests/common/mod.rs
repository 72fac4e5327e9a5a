#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use poplabel::engine::{initial_configuration, AuxRandom, Protocol};

/// A configuration as a sorted multiset of states.
type Multiset<S> = Vec<S>;

pub struct HittingTime {
    pub expected: f64,
    pub configurations: usize,
}

/// Exact expected number of scheduler steps until a terminal configuration,
/// by solving `(I - Q) t = 1` over all configurations reachable from the
/// initial one. Only valid for protocols whose transitions never consult the
/// auxiliary random source.
pub fn expected_hitting_time<P: Protocol>(proto: &P) -> HittingTime {
    let n = proto.population();
    let mut start: Multiset<P::State> = initial_configuration(proto).into_states();
    start.sort();
    let mut index: HashMap<Multiset<P::State>, usize> = HashMap::new();
    let mut configs = vec![start.clone()];
    index.insert(start, 0);
    // Per configuration: (successor, probability) with self loops folded in.
    let mut edges: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut terminal: Vec<bool> = Vec::new();
    let mut aux = AuxRandom::new(0);
    let total = (n * (n - 1)) as f64;
    let mut k = 0;
    while k < configs.len() {
        let c = configs[k].clone();
        let mut counts: Vec<(P::State, usize)> = Vec::new();
        for s in &c {
            match counts.last_mut() {
                Some((t, m)) if t == s => *m += 1,
                _ => counts.push((s.clone(), 1)),
            }
        }
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut moving = false;
        for (a, ca) in &counts {
            for (b, cb) in &counts {
                let ways = if a == b { ca * (ca - 1) } else { ca * cb };
                if ways == 0 {
                    continue;
                }
                let (a2, b2) = proto.delta(a, b, &mut aux);
                if &a2 == a && &b2 == b {
                    continue;
                }
                moving = true;
                let mut next = c.clone();
                let ia = next.iter().position(|x| x == a).unwrap();
                next.remove(ia);
                let ib = next.iter().position(|x| x == b).unwrap();
                next.remove(ib);
                next.push(a2);
                next.push(b2);
                next.sort();
                let id = *index.entry(next.clone()).or_insert_with(|| {
                    configs.push(next);
                    configs.len() - 1
                });
                out.push((id, ways as f64 / total));
            }
        }
        edges.push(out);
        terminal.push(!moving);
        k += 1;
    }
    // Transient states only; terminal configurations have t = 0.
    let transient: Vec<usize> = (0..configs.len()).filter(|&i| !terminal[i]).collect();
    let pos: HashMap<usize, usize> = transient.iter().enumerate().map(|(p, &i)| (i, p)).collect();
    let m = transient.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    for (p, &i) in transient.iter().enumerate() {
        for &(j, prob) in &edges[i] {
            if let Some(&q) = pos.get(&j) {
                a[(p, q)] -= prob;
            }
        }
        // Self loop: probability mass of no-op pairs.
        let stay: f64 = 1.0 - edges[i].iter().map(|e| e.1).sum::<f64>();
        a[(p, p)] -= stay;
    }
    let t = a.lu().solve(&DVector::from_element(m, 1.0)).expect("singular system");
    let expected = pos.get(&0).map_or(0.0, |&p| t[p]);
    HittingTime {
        expected,
        configurations: configs.len(),
    }
}
