//! Shared fixtures for the integration tests.
#![allow(dead_code)]

pub mod mutants;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rwa_core::{Demand, DesignConfig, LoadLevel, NetworkTopology, NodeId, TrafficMatrix, Variant};

pub struct Micro {
    pub topology: NetworkTopology,
    pub traffic: TrafficMatrix,
}

fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Random micro-instance within the oracle limits: 3..=5 nodes, a random
/// spanning tree of fiber pairs plus extra pairs and one-way arcs, 1..=4
/// demands with mixed protection flags, 1..=3 channels.
pub fn micro(seed: u64) -> Micro {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 + below(&mut rng, 3);
    let mut arcs = Vec::new();
    fn add_pair(arcs: &mut Vec<(usize, usize)>, a: usize, b: usize) {
        if a != b && !arcs.contains(&(a, b)) {
            arcs.push((a, b));
            arcs.push((b, a));
        }
    }
    for v in 1..n {
        let u = below(&mut rng, v);
        add_pair(&mut arcs, u, v);
    }
    for _ in 0..below(&mut rng, n + 1) {
        let (a, b) = (below(&mut rng, n), below(&mut rng, n));
        add_pair(&mut arcs, a, b);
    }
    for _ in 0..below(&mut rng, 3) {
        let (a, b) = (below(&mut rng, n), below(&mut rng, n));
        if a != b && !arcs.contains(&(a, b)) {
            arcs.push((a, b));
        }
    }
    let channels = 1 + below(&mut rng, 3);
    let topology = NetworkTopology::new(format!("micro{seed}"), n, channels, arcs).expect("connected by construction");
    let mut pairs: Vec<(usize, usize, bool)> = Vec::new();
    for _ in 0..1 + below(&mut rng, 4) {
        let (s, t) = (below(&mut rng, n), below(&mut rng, n));
        if s != t && !pairs.iter().any(|&(a, b, _)| (a, b) == (s, t)) {
            pairs.push((s, t, below(&mut rng, 2) == 1));
        }
    }
    if pairs.is_empty() {
        pairs.push((0, 1, false));
    }
    let demands = pairs
        .into_iter()
        .enumerate()
        .map(|(id, (s, t, p))| Demand { id, src: NodeId(s), dst: NodeId(t), protected: p })
        .collect();
    Micro { topology, traffic: TrafficMatrix { demands, seed, load: LoadLevel::Custom } }
}

/// Lexicographic variant matching the protection flags of `traffic`.
pub fn lex_variant(traffic: &TrafficMatrix) -> Variant {
    if traffic.protected_count() > 0 {
        Variant::RwaIntwcP
    } else {
        Variant::RwaIntwc
    }
}

pub fn config(variant: Variant, topology: &NetworkTopology) -> DesignConfig {
    DesignConfig::new(variant, topology)
}

/// Five-node network for the two-demand illustration: A=0, B=1, C=2, D=3,
/// E=4 with fiber pairs A-E, E-D, A-B, B-D, A-C, C-B and demands A->D,
/// E->D on two channels.
pub fn table1() -> (NetworkTopology, TrafficMatrix) {
    let topology =
        NetworkTopology::from_fiber_pairs("table1", 5, 2, &[(0, 4), (4, 3), (0, 1), (1, 3), (0, 2), (2, 1)]).unwrap();
    let traffic = TrafficMatrix::from_pairs([(0, 3, false), (4, 3, false)], 0, LoadLevel::Custom).unwrap();
    (topology, traffic)
}

/// Every simple `src -> dst` path as link ids, by depth-first search.
pub fn simple_paths(topology: &NetworkTopology, src: usize, dst: usize) -> Vec<Vec<usize>> {
    fn go(
        t: &NetworkTopology,
        v: usize,
        dst: usize,
        seen: &mut Vec<usize>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == dst {
            out.push(path.clone());
            return;
        }
        for l in t.links().iter().filter(|l| l.src.0 == v) {
            if seen.contains(&l.dst.0) {
                continue;
            }
            seen.push(l.dst.0);
            path.push(l.id.0);
            go(t, l.dst.0, dst, seen, path, out);
            path.pop();
            seen.pop();
        }
    }
    let mut out = Vec::new();
    go(topology, src, dst, &mut vec![src], &mut Vec::new(), &mut out);
    out
}
