//! Renormalization parts and Zimmermann forests.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{is_subset, members, FeynmanGraph, VSet};
use crate::power_counting::{Degrees, SubtractionAssignment};
use crate::Error;

/// Largest vertex count for which candidate parts are enumerated.
pub const MAX_ENUMERATION_VERTICES: usize = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    #[default]
    Connected,
    #[serde(rename = "1pi")]
    OnePi,
}

/// Canonical order on vertex sets: by size, then by the sorted id list.
pub fn canonical_key(s: VSet) -> (u32, Vec<usize>) {
    (s.count_ones(), members(s).collect())
}

pub fn sort_canonical(sets: &mut [VSet]) {
    sets.sort_by_key(|&s| canonical_key(s));
}

/// Vertex sets that qualify as full vertex parts with at least one edge.
pub fn candidate_parts(g: &FeynmanGraph, conn: Connectivity) -> Vec<VSet> {
    assert!(
        g.num_vertices() <= MAX_ENUMERATION_VERTICES,
        "part enumeration is limited to {MAX_ENUMERATION_VERTICES} vertices"
    );
    let mut out: Vec<VSet> = (1..=g.all())
        .filter(|&s| g.num_induced_edges(s) > 0)
        .filter(|&s| match conn {
            Connectivity::Connected => g.is_connected(s),
            Connectivity::OnePi => g.is_one_pi(s),
        })
        .collect();
    sort_canonical(&mut out);
    out
}

pub fn renormalization_parts_with(g: &FeynmanGraph, d: &Degrees, conn: Connectivity) -> Vec<VSet> {
    candidate_parts(g, conn)
        .into_iter()
        .filter(|&s| d.delta(g, s) >= 0)
        .collect()
}

pub fn renormalization_parts(
    g: &FeynmanGraph,
    a: &SubtractionAssignment,
) -> Result<Vec<VSet>, Error> {
    let d = Degrees::resolve(g, a)?;
    Ok(renormalization_parts_with(g, &d, Connectivity::Connected))
}

/// Parts of a forest in canonical order, each with its subtraction degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Forest {
    pub parts: Vec<(VSet, i64)>,
}

impl Forest {
    pub fn empty() -> Self {
        Forest { parts: Vec::new() }
    }

    pub fn sets(&self) -> Vec<VSet> {
        self.parts.iter().map(|&(s, _)| s).collect()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, s: VSet) -> bool {
        self.parts.iter().any(|&(p, _)| p == s)
    }

    fn from_sets(mut sets: Vec<VSet>, degree: &dyn Fn(VSet) -> i64) -> Self {
        sort_canonical(&mut sets);
        Forest {
            parts: sets.into_iter().map(|s| (s, degree(s))).collect(),
        }
    }
}

/// Every laminar family drawn from `parts`, built as a nesting tree: choose
/// the pairwise disjoint top level, then recurse strictly inside each member.
pub fn laminar_families(parts: &[VSet]) -> Vec<Vec<VSet>> {
    let mut inner: BTreeMap<VSet, Vec<Vec<VSet>>> = BTreeMap::new();
    let mut sorted = parts.to_vec();
    sort_canonical(&mut sorted);
    // Smaller sets first, so every strict subset is already resolved.
    for &p in &sorted {
        let below: Vec<VSet> = sorted
            .iter()
            .copied()
            .filter(|&q| q != p && is_subset(q, p))
            .collect();
        let families = families_over(&below, &inner);
        inner.insert(p, families);
    }
    let mut out = families_over(&sorted, &inner);
    for f in &mut out {
        sort_canonical(f);
    }
    out.sort_by(|a, b| {
        let ka: Vec<_> = a.iter().map(|&s| canonical_key(s)).collect();
        let kb: Vec<_> = b.iter().map(|&s| canonical_key(s)).collect();
        (a.len(), ka).cmp(&(b.len(), kb))
    });
    out
}

/// Laminar families over `pool`, given the families strictly inside each set.
fn families_over(pool: &[VSet], inner: &BTreeMap<VSet, Vec<Vec<VSet>>>) -> Vec<Vec<VSet>> {
    let maximal_candidates: Vec<VSet> = pool.to_vec();
    let mut out = vec![Vec::new()];
    let mut stack: Vec<(usize, VSet, Vec<VSet>)> = vec![(0, 0, Vec::new())];
    while let Some((start, used, tops)) = stack.pop() {
        for i in start..maximal_candidates.len() {
            let p = maximal_candidates[i];
            if p & used != 0 {
                continue;
            }
            let mut next = tops.clone();
            next.push(p);
            // Expand the chosen top level with every inner family of each member.
            let mut combos: Vec<Vec<VSet>> = vec![Vec::new()];
            for &t in &next {
                let within = &inner[&t];
                let mut grown = Vec::with_capacity(combos.len() * within.len());
                for c in &combos {
                    for w in within {
                        let mut x = c.clone();
                        x.push(t);
                        x.extend_from_slice(w);
                        grown.push(x);
                    }
                }
                combos = grown;
            }
            out.extend(combos);
            stack.push((i + 1, used | p, next));
        }
    }
    out
}

pub fn enumerate_forests_with(g: &FeynmanGraph, d: &Degrees, conn: Connectivity) -> Vec<Forest> {
    let parts = renormalization_parts_with(g, d, conn);
    laminar_families(&parts)
        .into_iter()
        .map(|f| Forest::from_sets(f, &|s| d.delta(g, s)))
        .collect()
}

pub fn enumerate_forests(
    g: &FeynmanGraph,
    a: &SubtractionAssignment,
) -> Result<Vec<Forest>, Error> {
    let d = Degrees::resolve(g, a)?;
    Ok(enumerate_forests_with(g, &d, Connectivity::Connected))
}

/// Outermost parts first; disjoint parts in canonical order.
pub fn taylor_order(f: &Forest) -> Vec<VSet> {
    let mut sets = f.sets();
    sets.sort_by_key(|&s| (std::cmp::Reverse(s.count_ones()), canonical_key(s).1));
    sets
}

/// Index of the smallest strict superset of each set in a laminar family.
pub fn parents(sets: &[VSet]) -> Vec<Option<usize>> {
    sets.iter()
        .map(|&s| {
            (0..sets.len())
                .filter(|&j| sets[j] != s && is_subset(s, sets[j]))
                .min_by_key(|&j| sets[j].count_ones())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForestCheck {
    pub is_forest: bool,
    pub reason: Option<String>,
}

pub fn is_forest(g: &FeynmanGraph, d: &Degrees, parts: &[VSet]) -> ForestCheck {
    for &p in parts {
        let ok = g.num_induced_edges(p) > 0 && g.is_connected(p) && d.delta(g, p) >= 0;
        if !ok {
            return ForestCheck {
                is_forest: false,
                reason: Some(format!("{{{}}} is not a renormalization part", g.label(p))),
            };
        }
    }
    for (i, &a) in parts.iter().enumerate() {
        for &b in &parts[i + 1..] {
            let nested = is_subset(a, b) || is_subset(b, a);
            if a == b || (a & b != 0 && !nested) {
                return ForestCheck {
                    is_forest: false,
                    reason: Some(format!(
                        "{{{}}} and {{{}}} overlap at {{{}}}",
                        g.label(a),
                        g.label(b),
                        g.label(a & b)
                    )),
                };
            }
        }
    }
    ForestCheck {
        is_forest: true,
        reason: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn minimal_forests(g: &FeynmanGraph) -> Vec<Forest> {
        enumerate_forests_with(g, &Degrees::minimal(g), Connectivity::Connected)
    }

    #[test]
    fn parts_of_fixtures() {
        let m = |g: &FeynmanGraph| {
            renormalization_parts_with(g, &Degrees::minimal(g), Connectivity::Connected)
        };
        assert_eq!(m(&fixtures::fish()), vec![0b11]);
        assert_eq!(m(&fixtures::nest()), vec![0b011, 0b111]);
        assert!(m(&fixtures::triangle()).is_empty());
    }

    #[test]
    fn forest_counts() {
        assert_eq!(minimal_forests(&fixtures::fish()).len(), 2);
        assert_eq!(minimal_forests(&fixtures::nest()).len(), 4);
        let join2 = fixtures::join2();
        assert_eq!(minimal_forests(&join2).len(), 4);
        let (delta, _) = join2.join_vertices(join2.limit_set().unwrap()).unwrap();
        assert_eq!(minimal_forests(&delta).len(), 6);
        assert_eq!(
            minimal_forests(&fixtures::triangle()),
            vec![Forest::empty()]
        );
    }

    #[test]
    fn order_and_checks() {
        let nest = fixtures::nest();
        let forests = minimal_forests(&nest);
        let both = forests.iter().find(|f| f.len() == 2).unwrap();
        assert_eq!(taylor_order(both), vec![0b111, 0b011]);
        assert!(taylor_order(&Forest::empty()).is_empty());
        let join2 = fixtures::join2();
        let (delta, _) = join2.join_vertices(join2.limit_set().unwrap()).unwrap();
        let d = Degrees::minimal(&delta);
        let a = delta.vset_of(&["A", "v0"]).unwrap();
        let b = delta.vset_of(&["B", "v0"]).unwrap();
        let check = is_forest(&delta, &d, &[a, b]);
        assert!(!check.is_forest);
        assert!(check.reason.unwrap().contains("overlap at {v0}"));
        let dg = Degrees::minimal(&join2);
        let z1 = join2.vset_of(&["A", "v1"]).unwrap();
        let z2 = join2.vset_of(&["B", "v2"]).unwrap();
        assert!(is_forest(&join2, &dg, &[z1, z2]).is_forest);
        let tri = fixtures::triangle();
        assert!(!is_forest(&tri, &Degrees::minimal(&tri), &[0b111]).is_forest);
    }

    #[test]
    fn parents_of_nested_sets() {
        assert_eq!(
            parents(&[0b111, 0b011, 0b001]),
            vec![None, Some(0), Some(1)]
        );
    }
}
