#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use bphz::fixtures::{random_graph, RandomGraphOptions};
use bphz::power_counting::Degrees;
use bphz::{FeynmanGraph, VSet};

/// Connectivity of the induced subgraph by breadth-first search over edges.
pub fn connected(g: &FeynmanGraph, s: VSet) -> bool {
    let start = s.trailing_zeros() as usize;
    let mut seen: VSet = 1 << start;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for e in g.edges() {
            for (a, b) in [(e.src, e.dst), (e.dst, e.src)] {
                if a == v && s & (1 << b) != 0 && seen & (1 << b) == 0 {
                    seen |= 1 << b;
                    queue.push_back(b);
                }
            }
        }
    }
    seen == s
}

pub fn oracle_parts(g: &FeynmanGraph, d: &Degrees) -> Vec<VSet> {
    let n = g.num_vertices();
    (1..(1u64 << n) as VSet)
        .filter(|&s| {
            g.edges()
                .iter()
                .any(|e| s & (1 << e.src) != 0 && s & (1 << e.dst) != 0)
        })
        .filter(|&s| connected(g, s))
        .filter(|&s| d.delta(g, s) >= 0)
        .collect()
}

fn compatible(a: VSet, b: VSet) -> bool {
    a & b == 0 || a & b == a || a & b == b
}

/// Every subset of the renormalization parts whose members are pairwise
/// nested or disjoint.
pub fn powerset_forests(g: &FeynmanGraph, d: &Degrees) -> BTreeSet<BTreeSet<VSet>> {
    let parts = oracle_parts(g, d);
    assert!(
        parts.len() < 24,
        "powerset oracle limited to small part lists"
    );
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << parts.len()) {
        let chosen: Vec<VSet> = (0..parts.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| parts[i])
            .collect();
        let ok = chosen
            .iter()
            .enumerate()
            .all(|(i, &a)| chosen[i + 1..].iter().all(|&b| compatible(a, b)));
        if ok {
            out.insert(chosen.into_iter().collect());
        }
    }
    out
}

pub fn small_graph(seed: u64, max_vertices: usize, test_factors: bool) -> FeynmanGraph {
    let opts = RandomGraphOptions {
        max_vertices,
        max_edges: 7,
        self_loops: false,
        derivatives: true,
        test_factors,
    };
    random_graph(seed, &opts)
}

pub fn max_part_degree(g: &FeynmanGraph, d: &Degrees) -> i64 {
    oracle_parts(g, d)
        .into_iter()
        .map(|s| d.delta(g, s))
        .max()
        .unwrap_or(-1)
}

/// Random connected graphs with exactly `n` vertices, no self-loops and at
/// least one renormalization part, all of degree at most `max_degree`.
pub fn graphs_with_parts(
    n: usize,
    count: usize,
    test_factors: bool,
    max_degree: i64,
) -> Vec<FeynmanGraph> {
    let mut out = Vec::new();
    let mut seed = 1000;
    while out.len() < count {
        seed += 1;
        let g = small_graph(seed, n, test_factors);
        if g.num_vertices() != n || !connected(&g, g.all()) {
            continue;
        }
        let top = max_part_degree(&g, &Degrees::minimal(&g));
        if (0..=max_degree).contains(&top) {
            out.push(g);
        }
    }
    out
}
