//! Differences of R-operations under two subtraction-degree assignments.
//!
//! With `t1(tau) = t2(tau) + W(tau)`, where `W` keeps the orders between the two
//! degrees, expanding every forest product and grouping by the innermost
//! parts that carry `W` gives an exact identity. For a set `T` of pairwise
//! disjoint parts whose degrees differ:
//!
//! * parts strictly containing some `tau` keep assignment 1,
//! * parts disjoint from every `tau` keep assignment 2,
//! * each `tau` contributes `-W(tau)`, and the parts strictly inside it
//!   range over the forests of assignment 2.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;

use crate::config::Configuration;
use crate::forest::{candidate_parts, laminar_families, Connectivity};
use crate::graph::{is_subset, FeynmanGraph, VSet};
use crate::poly::{q, Q};
use crate::power_counting::{codegree, disjoint_families, Degrees};
use crate::subtraction::{family_product_sum, inner_families, r_operation_with, Evaluator, Op};
use crate::weight::{VertexSubstitution, Weight};
use crate::Error;

/// Degrees below -1 behave like -1: the operator vanishes either way.
fn effective(d: i64) -> i64 {
    d.max(-1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionTerm {
    pub taus: Vec<VSet>,
    /// Per `tau`: the inclusive order range `lo..=hi` of `|alpha|` and the sign
    /// (-1 when assignment 2 has the larger degree).
    pub windows: Vec<(i64, i64, i64)>,
    pub contracted_graph: FeynmanGraph,
    /// Outer parts available around the `taus`, with their degrees.
    pub outer_parts: Vec<(VSet, i64)>,
}

pub struct ZiPlan<'g> {
    g: &'g FeynmanGraph,
    d1: Degrees,
    d2: Degrees,
    universe: Vec<VSet>,
}

impl<'g> ZiPlan<'g> {
    pub fn new(g: &'g FeynmanGraph, d1: Degrees, d2: Degrees) -> Self {
        let universe = candidate_parts(g, Connectivity::Connected)
            .into_iter()
            .filter(|&s| d1.delta(g, s).max(d2.delta(g, s)) >= 0)
            .collect();
        ZiPlan {
            g,
            d1,
            d2,
            universe,
        }
    }

    fn e1(&self, s: VSet) -> i64 {
        effective(self.d1.delta(self.g, s))
    }

    fn e2(&self, s: VSet) -> i64 {
        effective(self.d2.delta(self.g, s))
    }

    /// Parts whose two Taylor degrees differ.
    pub fn changed_parts(&self) -> Vec<VSet> {
        self.universe
            .iter()
            .copied()
            .filter(|&s| self.e1(s) != self.e2(s))
            .collect()
    }

    fn window(&self, s: VSet) -> (i64, i64, i64) {
        let (a, b) = (self.e1(s), self.e2(s));
        if a > b {
            (b + 1, a, 1)
        } else {
            (a + 1, b, -1)
        }
    }

    fn outer_parts(&self, taus: &[VSet]) -> Vec<(VSet, i64)> {
        self.universe
            .iter()
            .copied()
            .filter(|p| !taus.contains(p))
            .filter_map(|p| {
                let above = taus.iter().any(|&t| is_subset(t, p));
                let disjoint = taus.iter().all(|&t| t & p == 0);
                let degree = if above {
                    self.d1.delta(self.g, p)
                } else if disjoint {
                    self.d2.delta(self.g, p)
                } else {
                    return None;
                };
                (degree >= 0).then_some((p, degree))
            })
            .collect()
    }

    pub fn corrections(&self) -> Vec<CorrectionTerm> {
        disjoint_families(&self.changed_parts())
            .into_iter()
            .map(|taus| {
                let windows = taus.iter().map(|&t| self.window(t)).collect();
                let mut contracted = self.g.clone();
                // Contract the taus one at a time, tracking where the rest land.
                let mut pending: Vec<VSet> = taus.clone();
                while let Some(t) = pending.pop() {
                    let (next, map) = contracted.contract_set(t);
                    pending = pending.iter().map(|&s| map.image(s)).collect();
                    contracted = next;
                }
                CorrectionTerm {
                    outer_parts: self.outer_parts(&taus),
                    taus,
                    windows,
                    contracted_graph: contracted,
                }
            })
            .collect()
    }

    fn evaluator(&self) -> Result<Option<Evaluator<'g>>, Error> {
        if !self.g.self_loops().is_empty() {
            return Ok(None);
        }
        Ok(Some(Evaluator::new(self.g)?))
    }

    /// Sum of every correction term at one configuration.
    pub fn rhs(&self, c: &Configuration) -> Result<Q, Error> {
        let Some(ev) = self.evaluator()? else {
            return Ok(Q::zero());
        };
        let mut total = Q::zero();
        for term in self.corrections() {
            let mut sign = 1;
            let mut pools: Vec<Vec<Vec<Op>>> = Vec::new();
            for (&t, &(_, _, s)) in term.taus.iter().zip(&term.windows) {
                sign *= -s;
                pools.push(inner_families(self.g, &self.d2, t));
            }
            let tau_ops: Vec<Op> = term
                .taus
                .iter()
                .zip(&term.windows)
                .map(|(&t, &(lo, hi, _))| Op::window(self.g, t, lo, hi))
                .collect();
            let outer_sets: Vec<VSet> = term.outer_parts.iter().map(|&(s, _)| s).collect();
            let degree: BTreeMap<VSet, i64> = term.outer_parts.iter().copied().collect();
            pools.push(
                laminar_families(&outer_sets)
                    .into_iter()
                    .map(|fam| {
                        fam.iter()
                            .map(|&s| Op::taylor(self.g, s, degree[&s]))
                            .collect()
                    })
                    .collect(),
            );
            total += q(sign) * family_product_sum(&ev, &tau_ops, &pools, c)?;
        }
        Ok(total)
    }

    pub fn lhs(&self, c: &Configuration) -> Result<Q, Error> {
        Ok(r_operation_with(self.g, &self.d1, c)? - r_operation_with(self.g, &self.d2, c)?)
    }
}

pub fn zi_difference(
    g: &FeynmanGraph,
    d1: &Degrees,
    d2: &Degrees,
    c: &Configuration,
) -> Result<Q, Error> {
    Ok(r_operation_with(g, d1, c)? - r_operation_with(g, d2, c)?)
}

pub fn zi_corrections(g: &FeynmanGraph, d1: &Degrees, d2: &Degrees) -> Vec<CorrectionTerm> {
    ZiPlan::new(g, d1.clone(), d2.clone()).corrections()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZiRow {
    pub config: crate::config::ConfigurationSpec,
    pub lhs: String,
    pub rhs: String,
    pub equal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<String>,
}

pub fn zi_verify(
    g: &FeynmanGraph,
    d1: &Degrees,
    d2: &Degrees,
    configs: &[Configuration],
) -> Result<Vec<ZiRow>, Error> {
    let plan = ZiPlan::new(g, d1.clone(), d2.clone());
    configs
        .iter()
        .map(|c| {
            let lhs = plan.lhs(c)?;
            let rhs = plan.rhs(c)?;
            let equal = lhs == rhs;
            Ok(ZiRow {
                config: c.to_spec(),
                discrepancy: (!equal).then(|| (&lhs - &rhs).to_string()),
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
                equal,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZiGroup {
    pub vertices: Vec<String>,
    /// External slots of the part as `vertex:slot` labels with derivative orders.
    pub external_fields: Vec<(String, u32)>,
    pub alpha_min: i64,
    pub alpha_max: i64,
    pub sign: i64,
    pub vertex_degree: i64,
    pub terms: usize,
}

/// Correction terms grouped by the vertex set and external content of each
/// `tau`, with the degree `max(delta1, delta2) + codegree` of the contracted vertex.
pub fn zi_group_report(g: &FeynmanGraph, d1: &Degrees, d2: &Degrees) -> Vec<ZiGroup> {
    let plan = ZiPlan::new(g, d1.clone(), d2.clone());
    let mut groups: BTreeMap<(Vec<usize>, i64, i64), ZiGroup> = BTreeMap::new();
    for term in plan.corrections() {
        for (&t, &(lo, hi, sign)) in term.taus.iter().zip(&term.windows) {
            let key = (crate::forest::canonical_key(t).1, lo, hi);
            groups
                .entry(key)
                .or_insert_with(|| ZiGroup {
                    vertices: g.ids(t),
                    external_fields: g
                        .external_slots(t)
                        .into_iter()
                        .map(|(v, slot)| {
                            (
                                format!("{}:{slot}", g.vertices()[v].id),
                                g.vertices()[v].monomial.slot_derivs[slot],
                            )
                        })
                        .collect(),
                    alpha_min: lo,
                    alpha_max: hi,
                    sign,
                    vertex_degree: d1.delta(g, t).max(d2.delta(g, t)) + codegree(g, t),
                    terms: 0,
                })
                .terms += 1;
        }
    }
    groups.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalityCheck {
    pub part: Vec<String>,
    pub alpha_order: i64,
    pub coefficients: usize,
    pub local: bool,
}

/// For every changed part, the Taylor coefficients `D^alpha` of the weight
/// outside it, collapsed onto one new vertex, must not depend on the part's
/// own coordinates.
pub fn locality_checks(
    g: &FeynmanGraph,
    d1: &Degrees,
    d2: &Degrees,
) -> Result<Vec<LocalityCheck>, Error> {
    let plan = ZiPlan::new(g, d1.clone(), d2.clone());
    let mut out = Vec::new();
    for t in plan.changed_parts() {
        let (lo, hi, _) = plan.window(t);
        let mut outside = Weight::one();
        for (k, e) in g.edges().iter().enumerate() {
            if !e.inside(t) {
                outside = outside.multiply(&crate::weight::edge_weight(g, k)?);
            }
        }
        for v in g.vertices() {
            if let Some(p) = &v.monomial.test_factor {
                outside = outside.multiply(&Weight::poly(p.clone()));
            }
        }
        let point = g.num_vertices();
        let collapse: VertexSubstitution = crate::graph::members(t)
            .map(|v| (v, vec![(point, q(1))]))
            .collect();
        let vars: Vec<(usize, usize)> = crate::graph::members(t)
            .flat_map(|v| (0..4).map(move |mu| (v, mu)))
            .collect();
        let mut seen: BTreeSet<(i64, Vec<u32>)> = BTreeSet::new();
        let mut by_order: BTreeMap<i64, (usize, bool)> = BTreeMap::new();
        let mut stack = vec![(0usize, outside, vec![0u32; vars.len()])];
        while let Some((start, w, alpha)) = stack.pop() {
            let order: i64 = alpha.iter().map(|&a| a as i64).sum();
            if order >= lo && seen.insert((order, alpha.clone())) {
                let collapsed = w.substitute_vertices(&collapse)?;
                let local = collapsed
                    .support()
                    .iter()
                    .all(|v| !crate::graph::members(t).any(|u| u == *v));
                let entry = by_order.entry(order).or_insert((0, true));
                entry.0 += 1;
                entry.1 &= local;
            }
            if order < hi {
                for i in start..vars.len() {
                    let mut a = alpha.clone();
                    a[i] += 1;
                    stack.push((i, w.differentiate(vars[i].0, vars[i].1), a));
                }
            }
        }
        for (order, (coefficients, local)) in by_order {
            out.push(LocalityCheck {
                part: g.ids(t),
                alpha_order: order,
                coefficients,
                local,
            });
        }
    }
    Ok(out)
}
