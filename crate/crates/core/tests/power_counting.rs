mod support;

use bphz::coincidence::plan_coincidence;
use bphz::fixtures;
use bphz::power_counting::{
    codegree, uv_degree, uv_degree_from_monomials, Degrees, SubtractionAssignment,
};
use proptest::prelude::*;

#[test]
fn fixture_degrees() {
    let fish = fixtures::fish();
    assert_eq!(uv_degree(&fish, fish.all()), 0);
    let sunset = fixtures::sunset();
    assert_eq!(uv_degree(&sunset, sunset.all()), 2);
    let tri = fixtures::triangle();
    assert_eq!(uv_degree(&tri, tri.all()), -2);
    let nest = fixtures::nest();
    assert_eq!(uv_degree(&nest, nest.all()), 0);
    assert_eq!(uv_degree(&nest, 0b011), 0);
    let a = SubtractionAssignment::default();
    let join = plan_coincidence(&fixtures::join2(), &a).unwrap().delta;
    assert_eq!(uv_degree(&join, join.all()), 2);
    let raise = plan_coincidence(&fixtures::raise(), &a).unwrap().delta;
    assert_eq!(uv_degree(&raise, raise.all()), 4);
}

#[test]
fn both_routes_agree_on_random_graphs() {
    for seed in 0..200 {
        let g = support::small_graph(seed, 5, false);
        for s in 1..=g.all() {
            assert_eq!(
                uv_degree(&g, s),
                uv_degree_from_monomials(&g, s),
                "seed {seed}, set {s:b}"
            );
        }
    }
}

#[test]
fn minimal_degrees_equal_uv_degree() {
    for seed in 0..60 {
        let g = support::small_graph(seed, 5, false);
        let d = Degrees::minimal(&g);
        for s in 1..=g.all() {
            assert_eq!(d.delta(&g, s), uv_degree(&g, s));
        }
    }
}

proptest! {
    #[test]
    fn raising_a_vertex_raises_every_part_through_it(seed in 0u64..5000, k in 1i64..4) {
        let g = support::small_graph(seed, 5, false);
        let base = Degrees::minimal(&g);
        let mut raised = base.clone();
        raised.vertex[0] += k;
        for s in 1..=g.all() {
            let shift = if s & 1 != 0 { k } else { 0 };
            prop_assert_eq!(raised.delta(&g, s), base.delta(&g, s) + shift);
        }
    }

    #[test]
    fn codegree_is_nonnegative_and_vanishes_on_closed_graphs(seed in 0u64..5000) {
        let g = support::small_graph(seed, 5, false);
        for s in 1..=g.all() {
            prop_assert!(codegree(&g, s) >= 0);
        }
        if g.external_legs() == 0 {
            prop_assert_eq!(codegree(&g, g.all()), 0);
        }
    }
}
