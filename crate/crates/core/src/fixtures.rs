//! The shipped fixture corpus plus a seeded generator of small random graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{EdgeSpec, FeynmanGraph, GraphSpec, VertexSpec};

pub const FISH: &str = include_str!("../../../fixtures/fish.json");
pub const SUNSET: &str = include_str!("../../../fixtures/sunset.json");
pub const TRIANGLE: &str = include_str!("../../../fixtures/triangle.json");
pub const NEST: &str = include_str!("../../../fixtures/nest.json");
pub const JOIN2: &str = include_str!("../../../fixtures/join2.json");
pub const RAISE: &str = include_str!("../../../fixtures/raise.json");
pub const RAISE_DELTA: &str = include_str!("../../../fixtures/raise_delta.json");
pub const WAVE_PHI1: &str = include_str!("../../../fixtures/wave_phi1.json");
pub const WAVE_FISH: &str = include_str!("../../../fixtures/wave_fish.json");
pub const WAVE_PAIR: &str = include_str!("../../../fixtures/wave_pair.json");

fn load(text: &str) -> FeynmanGraph {
    FeynmanGraph::from_json(text).expect("shipped fixture parses")
}

pub fn fish() -> FeynmanGraph {
    load(FISH)
}
pub fn sunset() -> FeynmanGraph {
    load(SUNSET)
}
pub fn triangle() -> FeynmanGraph {
    load(TRIANGLE)
}
pub fn nest() -> FeynmanGraph {
    load(NEST)
}
pub fn join2() -> FeynmanGraph {
    load(JOIN2)
}
pub fn raise() -> FeynmanGraph {
    load(RAISE)
}
pub fn raise_delta() -> FeynmanGraph {
    load(RAISE_DELTA)
}
pub fn wave_phi1() -> FeynmanGraph {
    load(WAVE_PHI1)
}
pub fn wave_fish() -> FeynmanGraph {
    load(WAVE_FISH)
}
pub fn wave_pair() -> FeynmanGraph {
    load(WAVE_PAIR)
}

pub fn all_named() -> Vec<(&'static str, FeynmanGraph)> {
    vec![
        ("fish", fish()),
        ("sunset", sunset()),
        ("triangle", triangle()),
        ("nest", nest()),
        ("join2", join2()),
        ("raise", raise()),
        ("raise_delta", raise_delta()),
        ("wave_phi1", wave_phi1()),
        ("wave_fish", wave_fish()),
        ("wave_pair", wave_pair()),
    ]
}

#[derive(Debug, Clone)]
pub struct RandomGraphOptions {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub self_loops: bool,
    pub derivatives: bool,
    pub test_factors: bool,
}

impl Default for RandomGraphOptions {
    fn default() -> Self {
        RandomGraphOptions {
            max_vertices: 5,
            max_edges: 8,
            self_loops: true,
            derivatives: true,
            test_factors: false,
        }
    }
}

/// Small random multigraph with sequentially assigned slots and a few extra
/// external legs; identical seeds give identical graphs.
pub fn random_graph(seed: u64, opts: &RandomGraphOptions) -> FeynmanGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=opts.max_vertices);
    let m = rng.random_range(0..=opts.max_edges);
    let mut valence = vec![0usize; n];
    let mut ends = Vec::with_capacity(m);
    for _ in 0..m {
        let s = rng.random_range(0..n);
        let mut t = rng.random_range(0..n);
        if s == t && !opts.self_loops {
            if n == 1 {
                continue;
            }
            t = (s + 1 + rng.random_range(0..n - 1)) % n;
        }
        let ss = valence[s];
        valence[s] += 1;
        let ts = valence[t];
        valence[t] += 1;
        ends.push((s, t, ss, ts));
    }
    let id = |v: usize| format!("v{v}");
    let vertices = (0..n)
        .map(|v| {
            let fields = valence[v] + rng.random_range(0..=2usize);
            let slot_derivs = (0..fields)
                .map(|_| {
                    if opts.derivatives && rng.random_bool(0.15) {
                        1
                    } else {
                        0
                    }
                })
                .collect();
            let test_factor = opts.test_factors.then(|| {
                let mu = rng.random_range(0..4);
                let nu = rng.random_range(0..4);
                let c = rng.random_range(1..=3);
                format!("x_{0}_{mu}^2 + {c}*x_{0}_{nu} + 1", id(v))
            });
            VertexSpec {
                id: id(v),
                fields,
                slot_derivs: Some(slot_derivs),
                delta: None,
                test_factor,
            }
        })
        .collect();
    let edges = ends
        .into_iter()
        .map(|(s, t, ss, ts)| EdgeSpec {
            src: id(s),
            dst: id(t),
            src_slot: ss,
            dst_slot: ts,
        })
        .collect();
    let spec = GraphSpec {
        dimension: 4,
        vertices,
        edges,
        limit_set: None,
    };
    FeynmanGraph::from_spec(&spec).expect("generated graph is well formed")
}
