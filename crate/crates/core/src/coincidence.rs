//! Coincidence limits: joining the limit vertices of a graph into one vertex
//! and comparing the forest formulas before and after.
//!
//! Every `Delta`-part `tau` acts on the original coordinates through its split
//! preimage `sigma(tau)`: the non-limit vertices of `tau` together with the
//! limit vertices that have an edge inside `tau`. Subtraction points are the
//! edge-valence-weighted centers of `sigma`, which agree with the joined
//! centers once the limit vertices coincide.
//!
//! The decomposition `R_Delta = R_Gamma - X_Gamma + X_Delta` is exact:
//! `X_Gamma` collects the `Gamma`-forests with no `Delta` counterpart, either
//! because two disjoint parts both meet the limit set (their images overlap)
//! or because a part is absorbed into a larger `Delta`-part; `X_Delta`
//! collects the extra subtraction orders of new or degree-raised parts.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;

use crate::config::Configuration;
use crate::forest::{candidate_parts, laminar_families, Connectivity};
use crate::graph::{is_subset, FeynmanGraph, Monomial, VSet, VertexMap};
use crate::poly::{q, q_to_f64, Q};
use crate::power_counting::{Degrees, SubtractionAssignment};
use crate::subtraction::{
    default_lambdas, family_product_sum, fit_exponent, r_operation_with, scale_toward,
    subtraction_point, Evaluator, Op,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartStatus {
    /// The split preimage is not a renormalization part of `Gamma`.
    New,
    DegreeRaised,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartTransfer {
    /// Vertex set in `Delta`.
    pub part: VSet,
    /// Split preimage in `Gamma`.
    pub sigma: VSet,
    pub delta_degree: i64,
    /// Degree of `sigma` when it is a renormalization part of `Gamma`.
    pub gamma_degree: Option<i64>,
    pub status: PartStatus,
}

impl PartTransfer {
    /// Inclusive order window of the extra subtraction, if any.
    pub fn window(&self) -> Option<(i64, i64)> {
        match self.status {
            PartStatus::Unchanged => None,
            PartStatus::New => Some((0, self.delta_degree)),
            PartStatus::DegreeRaised => Some((self.gamma_degree.unwrap() + 1, self.delta_degree)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaPartStatus {
    /// The image is a `Delta`-part whose split preimage is the part itself.
    Stable,
    /// The image is not a `Delta`-part, or it splits back to a larger set.
    Absorbed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaPartImage {
    pub part: VSet,
    pub degree: i64,
    pub image: VSet,
    pub status: GammaPartStatus,
    pub overlap_involved: bool,
}

/// Pairwise disjoint `Gamma`-parts, each meeting the limit set, whose images
/// pairwise overlap at the joined vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapFamily {
    pub zetas: Vec<VSet>,
}

#[derive(Debug, Clone)]
pub struct CoincidencePlan {
    pub gamma: FeynmanGraph,
    pub delta: FeynmanGraph,
    pub map: VertexMap,
    pub limit: VSet,
    pub gamma_degrees: Degrees,
    pub delta_degrees: Degrees,
    pub gamma_parts: Vec<(VSet, i64)>,
    pub part_transfer: Vec<PartTransfer>,
    pub gamma_images: Vec<GammaPartImage>,
    pub overlap_families: Vec<OverlapFamily>,
    /// Set when two changed `Delta`-parts are nested.
    pub nested_changed: bool,
}

fn sign(n: usize) -> Q {
    if n.is_multiple_of(2) {
        q(1)
    } else {
        q(-1)
    }
}

fn conflict(a: VSet, b: VSet, limit: VSet) -> bool {
    a & b == 0 && a & limit != 0 && b & limit != 0
}

fn has_conflict(fam: &[VSet], limit: VSet) -> bool {
    fam.iter()
        .enumerate()
        .any(|(i, &a)| fam[i + 1..].iter().any(|&b| conflict(a, b, limit)))
}

/// Degrees on the joined graph: the joined vertex carries the sum of the
/// limit vertices' degrees; overrides away from the limit set carry over.
fn joined_degrees(gamma: &FeynmanGraph, d: &Degrees, map: &VertexMap, limit: VSet) -> Degrees {
    let n = map.index.iter().copied().max().map_or(0, |m| m + 1);
    let mut vertex = vec![0; n];
    for v in 0..gamma.num_vertices() {
        vertex[map.index[v]] += d.vertex[v];
    }
    let overrides = d
        .overrides
        .iter()
        .filter(|&(&s, _)| s & limit == 0)
        .map(|(&s, &k)| (map.image(s), k))
        .collect();
    Degrees { vertex, overrides }
}

pub fn plan_coincidence(
    g: &FeynmanGraph,
    a: &SubtractionAssignment,
) -> Result<CoincidencePlan, Error> {
    let limit = g
        .limit_set()
        .filter(|&l| l != 0)
        .ok_or_else(|| Error::Precondition("the graph has no limit set".into()))?;
    if let Some(k) = g.edges().iter().position(|e| e.inside(limit)) {
        return Err(Error::Precondition(format!(
            "edge {} joins two limit vertices; Wick ordering excludes it",
            g.edge_label(k)
        )));
    }
    if let Some(&k) = g.self_loops().first() {
        return Err(Error::Precondition(format!(
            "edge {} is a self-loop",
            g.edge_label(k)
        )));
    }
    let gamma_degrees = Degrees::resolve(g, a)?;
    let (delta, map) = g.join_vertices(limit)?;
    let delta_degrees = joined_degrees(g, &gamma_degrees, &map, limit);

    let gamma_parts: Vec<(VSet, i64)> = candidate_parts(g, Connectivity::Connected)
        .into_iter()
        .map(|s| (s, gamma_degrees.delta(g, s)))
        .filter(|&(_, d)| d >= 0)
        .collect();
    let gamma_degree: BTreeMap<VSet, i64> = gamma_parts.iter().copied().collect();

    let mut part_transfer = Vec::new();
    for tau in candidate_parts(&delta, Connectivity::Connected) {
        let delta_degree = delta_degrees.delta(&delta, tau);
        if delta_degree < 0 {
            continue;
        }
        let sigma = split_preimage(g, &map, &delta, tau);
        let gd = gamma_degree.get(&sigma).copied();
        let status = match gd {
            None => PartStatus::New,
            Some(d) if d < delta_degree => PartStatus::DegreeRaised,
            Some(_) => PartStatus::Unchanged,
        };
        part_transfer.push(PartTransfer {
            part: tau,
            sigma,
            delta_degree,
            gamma_degree: gd,
            status,
        });
    }
    let stable: BTreeSet<VSet> = part_transfer
        .iter()
        .filter(|t| t.gamma_degree.is_some())
        .map(|t| t.sigma)
        .collect();

    let limit_parts: Vec<VSet> = gamma_parts
        .iter()
        .map(|&(s, _)| s)
        .filter(|&s| s & limit != 0)
        .collect();
    let overlap_families: Vec<OverlapFamily> =
        crate::power_counting::disjoint_families(&limit_parts)
            .into_iter()
            .filter(|f| f.len() >= 2)
            .map(|zetas| OverlapFamily { zetas })
            .collect();
    let gamma_images = gamma_parts
        .iter()
        .map(|&(s, d)| GammaPartImage {
            part: s,
            degree: d,
            image: map.image(s),
            status: if stable.contains(&s) {
                GammaPartStatus::Stable
            } else {
                GammaPartStatus::Absorbed
            },
            overlap_involved: overlap_families.iter().any(|f| f.zetas.contains(&s)),
        })
        .collect();
    let changed: Vec<VSet> = part_transfer
        .iter()
        .filter(|t| t.status != PartStatus::Unchanged)
        .map(|t| t.part)
        .collect();
    let nested_changed = changed
        .iter()
        .any(|&a| changed.iter().any(|&b| a != b && is_subset(a, b)));

    Ok(CoincidencePlan {
        gamma: g.clone(),
        delta,
        map,
        limit,
        gamma_degrees,
        delta_degrees,
        gamma_parts,
        part_transfer,
        gamma_images,
        overlap_families,
        nested_changed,
    })
}

/// Endpoints in `Gamma` of the edges internal to `tau`.
fn split_preimage(g: &FeynmanGraph, map: &VertexMap, delta: &FeynmanGraph, tau: VSet) -> VSet {
    let mut s = 0;
    for (k, e) in g.edges().iter().enumerate() {
        if let Some(nk) = map.edges[k] {
            if delta.edges()[nk].inside(tau) {
                s |= crate::graph::bit(e.src) | crate::graph::bit(e.dst);
            }
        }
    }
    s
}

impl CoincidencePlan {
    fn evaluator(&self) -> Result<Evaluator<'_>, Error> {
        Ok(Evaluator::new(&self.gamma)?)
    }

    pub fn changed(&self) -> impl Iterator<Item = &PartTransfer> {
        self.part_transfer
            .iter()
            .filter(|t| t.status != PartStatus::Unchanged)
    }

    /// Laminar families from `pool` as operators, optionally skipping those
    /// with a conflicting pair.
    fn families(&self, pool: &[(VSet, i64)], forbid_conflict: bool) -> Vec<Vec<Op>> {
        let sets: Vec<VSet> = pool.iter().map(|&(s, _)| s).collect();
        let degree: BTreeMap<VSet, i64> = pool.iter().copied().collect();
        laminar_families(&sets)
            .into_iter()
            .filter(|fam| !(forbid_conflict && has_conflict(fam, self.limit)))
            .map(|fam| {
                fam.iter()
                    .map(|&s| Op::taylor(&self.gamma, s, degree[&s]))
                    .collect()
            })
            .collect()
    }

    fn sigma_pool(&self, keep: impl Fn(&PartTransfer) -> bool) -> Vec<(VSet, i64)> {
        self.part_transfer
            .iter()
            .filter(|t| keep(t))
            .map(|t| (t.sigma, t.delta_degree))
            .collect()
    }

    pub fn r_delta_on_gamma(&self, c: &Configuration) -> Result<Q, Error> {
        let ev = self.evaluator()?;
        let pool = self.sigma_pool(|_| true);
        family_product_sum(&ev, &[], &[self.families(&pool, true)], c)
    }

    pub fn r_gamma(&self, c: &Configuration) -> Result<Q, Error> {
        r_operation_with(&self.gamma, &self.gamma_degrees, c)
    }

    fn is_stable(&self, s: VSet) -> bool {
        self.gamma_images
            .iter()
            .any(|i| i.part == s && i.status == GammaPartStatus::Stable)
    }

    /// Overlap families with full Taylor operators, plus the forests whose
    /// minimal absorbed part is `upsilon`.
    pub fn overlap_corrections(&self, c: &Configuration) -> Result<Q, Error> {
        let ev = self.evaluator()?;
        let g = &self.gamma;
        let degree: BTreeMap<VSet, i64> = self.gamma_parts.iter().copied().collect();
        let mut total = Q::zero();
        for fam in &self.overlap_families {
            let z = &fam.zetas;
            let mut pools = Vec::new();
            for &zeta in z {
                let inner: Vec<(VSet, i64)> = self
                    .gamma_parts
                    .iter()
                    .copied()
                    .filter(|&(p, _)| p != zeta && is_subset(p, zeta) && p & self.limit == 0)
                    .collect();
                pools.push(self.families(&inner, false));
            }
            let outer: Vec<(VSet, i64)> = self
                .gamma_parts
                .iter()
                .copied()
                .filter(|&(p, _)| !z.contains(&p))
                .filter(|&(p, _)| {
                    let laminar = z.iter().all(|&t| is_subset(t, p) || t & p == 0);
                    let above = z.iter().any(|&t| is_subset(t, p));
                    laminar && (above || p & self.limit == 0)
                })
                .collect();
            let fixed: Vec<Op> = z.iter().map(|&t| Op::taylor(g, t, degree[&t])).collect();
            pools.push(self.families(&outer, false));
            total += sign(z.len()) * family_product_sum(&ev, &fixed, &pools, c)?;
        }
        for img in self
            .gamma_images
            .iter()
            .filter(|i| i.status == GammaPartStatus::Absorbed)
        {
            let u = img.part;
            let inner: Vec<(VSet, i64)> = self
                .gamma_parts
                .iter()
                .copied()
                .filter(|&(p, _)| p != u && is_subset(p, u))
                .filter(|&(p, _)| p & self.limit == 0 || self.is_stable(p))
                .collect();
            let outer: Vec<(VSet, i64)> = self
                .gamma_parts
                .iter()
                .copied()
                .filter(|&(p, _)| {
                    p != u && (is_subset(u, p) || (p & u == 0 && p & self.limit == 0))
                })
                .collect();
            let fixed = [Op::taylor(g, u, img.degree)];
            let pools = [self.families(&inner, true), self.families(&outer, false)];
            total -= family_product_sum(&ev, &fixed, &pools, c)?;
        }
        Ok(total)
    }

    /// Extra subtraction orders of every new or degree-raised `Delta`-part,
    /// taken minimal in its forest.
    pub fn diagonal_corrections(&self, c: &Configuration) -> Result<Q, Error> {
        let ev = self.evaluator()?;
        let mut total = Q::zero();
        for t in self.changed() {
            let (lo, hi) = t.window().expect("changed parts carry a window");
            let tau = t.part;
            let inner: Vec<(VSet, i64)> = self
                .part_transfer
                .iter()
                .filter(|p| p.part != tau && is_subset(p.part, tau))
                .filter_map(|p| p.gamma_degree.map(|d| (p.sigma, d)))
                .collect();
            let outer =
                self.sigma_pool(|p| p.part != tau && (is_subset(tau, p.part) || p.part & tau == 0));
            let fixed = [Op::window(&self.gamma, t.sigma, lo, hi)];
            let pools = [self.families(&inner, true), self.families(&outer, true)];
            total -= family_product_sum(&ev, &fixed, &pools, c)?;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionRow {
    pub config: crate::config::ConfigurationSpec,
    pub r_delta: String,
    pub r_gamma: String,
    pub overlap: String,
    pub diagonal: String,
    pub equal: bool,
}

pub fn verify_decomposition(
    plan: &CoincidencePlan,
    configs: &[Configuration],
) -> Result<Vec<DecompositionRow>, Error> {
    configs
        .iter()
        .map(|c| {
            let r_delta = plan.r_delta_on_gamma(c)?;
            let r_gamma = plan.r_gamma(c)?;
            let overlap = plan.overlap_corrections(c)?;
            let diagonal = plan.diagonal_corrections(c)?;
            let equal = r_delta == &r_gamma - &overlap + &diagonal;
            Ok(DecompositionRow {
                config: c.to_spec(),
                r_delta: r_delta.to_string(),
                r_gamma: r_gamma.to_string(),
                overlap: overlap.to_string(),
                diagonal: diagonal.to_string(),
                equal,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub lambda: f64,
    pub value_delta: f64,
    pub value_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceProbe {
    /// Vertices moved toward their subtraction point; the rest stay fixed.
    pub moved: Vec<String>,
    pub rows: Vec<ProbeRow>,
    pub exponent_delta: f64,
    pub exponent_gamma: f64,
}

impl CoincidenceProbe {
    pub fn improvement(&self) -> f64 {
        self.exponent_delta - self.exponent_gamma
    }
}

/// Scales the split preimage of the largest changed part (or the limit set
/// when nothing changed) toward its subtraction point and evaluates both
/// forest formulas along the way.
pub fn coincidence_probe(
    plan: &CoincidencePlan,
    base: &Configuration,
    lambdas: &[Q],
) -> Result<CoincidenceProbe, Error> {
    let moved = plan
        .changed()
        .max_by_key(|t| (t.sigma.count_ones(), std::cmp::Reverse(t.sigma)))
        .map_or(plan.limit, |t| t.sigma);
    let center = subtraction_point(&plan.gamma, moved);
    let values: Vec<Result<(Q, Q), Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = lambdas
            .iter()
            .map(|lambda| {
                let c = scale_toward(base, moved, &center, lambda);
                scope.spawn(move || Ok((plan.r_delta_on_gamma(&c)?, plan.r_gamma(&c)?)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("probe worker panicked"))
            .collect()
    });
    let mut rows = Vec::with_capacity(lambdas.len());
    for (lambda, v) in lambdas.iter().zip(values) {
        let (d, g) = v?;
        rows.push(ProbeRow {
            lambda: q_to_f64(lambda),
            value_delta: q_to_f64(&d),
            value_gamma: q_to_f64(&g),
        });
    }
    let fit = |f: fn(&ProbeRow) -> f64| {
        fit_exponent(&rows.iter().map(|r| (r.lambda, f(r))).collect::<Vec<_>>())
    };
    Ok(CoincidenceProbe {
        moved: plan.gamma.ids(moved),
        exponent_delta: fit(|r| r.value_delta),
        exponent_gamma: fit(|r| r.value_gamma),
        rows,
    })
}

pub fn coincidence_probe_default(
    plan: &CoincidencePlan,
    base: &Configuration,
) -> Result<CoincidenceProbe, Error> {
    coincidence_probe(plan, base, &default_lambdas())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NormalProductDegree {
    pub minimal: i64,
    pub assigned: i64,
}

/// Degree of a normal product of the given monomials: at least the sum of
/// their dimensions.
pub fn normal_product_degree(
    monomials: &[Monomial],
    requested: Option<i64>,
) -> Result<NormalProductDegree, Error> {
    let minimal: i64 = monomials.iter().map(Monomial::dim).sum();
    let assigned = requested.unwrap_or(minimal);
    if assigned < minimal {
        return Err(Error::Precondition(format!(
            "normal-product degree {assigned} is below the minimum {minimal}"
        )));
    }
    Ok(NormalProductDegree { minimal, assigned })
}
