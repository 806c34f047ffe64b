//! Subtraction points, Taylor operators and the forest-formula R-operation.
//!
//! Operators of a forest compose from the innermost part outwards. The
//! operator of a part acts on every factor not internal to it that touches
//! it: edges leaving the part and the test factors of its vertices. An outer
//! operator then acts on what the inner one produced, so a vertex lying in a
//! chain of parts `g1 < g2 < ... < gk`, none of which contains the factor,
//! sits at
//!
//! `xbar_k + s_k (xbar_{k-1} - xbar_k) + s_k s_{k-1} (xbar_{k-2} - xbar_{k-1}) + ... + s_k ... s_1 (x_v - xbar_1)`
//!
//! with one formal scalar `s_i` per operator. A forest term is the product of
//! all factors expanded this way, truncated to each operator's order window.
//!
//! The symbolic route (`apply_taylor`, `apply_forest_term`) composes explicit
//! Taylor polynomials one operator at a time and serves as an independent
//! cross-check of the series evaluator.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::config::{center_at, weighted_center_weights, Configuration, Point};
use crate::forest::{
    enumerate_forests_with, laminar_families, renormalization_parts_with, Connectivity, Forest,
};
use crate::graph::{bit, is_subset, members, FeynmanGraph, VSet};
use crate::poly::{q, q_to_f64, Poly, Q};
use crate::power_counting::{Degrees, SubtractionAssignment};
use crate::series::{Caps, Jet, MAX_CAP, MAX_VARS};
use crate::weight::{edge_weight, var, VertexSubstitution, Weight, WeightError};
use crate::Error;

/// Affine weights of the subtraction point: each vertex weighted by the number
/// of internal edge ends it carries, over `2|E|`.
pub fn subtraction_point(g: &FeynmanGraph, s: VSet) -> Vec<(usize, Q)> {
    weighted_center_weights(g, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FactorId {
    Edge(usize),
    Test(usize),
}

/// A Taylor operator on the coordinates of `set`, expanded about `center`,
/// keeping the homogeneous orders `lo..=hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Op {
    pub set: VSet,
    pub center: Vec<(usize, Q)>,
    pub lo: i64,
    pub hi: i64,
}

impl Op {
    pub fn taylor(g: &FeynmanGraph, set: VSet, degree: i64) -> Op {
        Op {
            set,
            center: subtraction_point(g, set),
            lo: 0,
            hi: degree,
        }
    }

    pub fn window(g: &FeynmanGraph, set: VSet, lo: i64, hi: i64) -> Op {
        Op {
            set,
            center: subtraction_point(g, set),
            lo,
            hi,
        }
    }

    fn is_null(&self) -> bool {
        self.hi < self.lo.max(0)
    }
}

/// Precomputed factor weights of one graph.
pub struct Evaluator<'g> {
    g: &'g FeynmanGraph,
    edges: Vec<Weight>,
}

impl<'g> Evaluator<'g> {
    pub fn new(g: &'g FeynmanGraph) -> Result<Self, WeightError> {
        let edges = (0..g.edges().len())
            .map(|k| edge_weight(g, k))
            .collect::<Result<_, _>>()?;
        Ok(Evaluator { g, edges })
    }

    pub fn graph(&self) -> &FeynmanGraph {
        self.g
    }

    pub fn all_factors(&self) -> Vec<FactorId> {
        let mut f: Vec<FactorId> = (0..self.edges.len()).map(FactorId::Edge).collect();
        f.extend(
            (0..self.g.num_vertices())
                .filter(|&v| self.g.vertices()[v].monomial.test_factor.is_some())
                .map(FactorId::Test),
        );
        f
    }

    /// Edge factors internal to `s` (no test factors).
    pub fn internal_factors(&self, s: VSet) -> Vec<FactorId> {
        self.g
            .induced_edges(s)
            .into_iter()
            .map(FactorId::Edge)
            .collect()
    }

    /// Edges not internal to any of `sets`, plus every test factor.
    pub fn factors_outside(&self, sets: &[VSet]) -> Vec<FactorId> {
        self.all_factors()
            .into_iter()
            .filter(|f| match *f {
                FactorId::Edge(k) => !sets.iter().any(|&s| self.g.edges()[k].inside(s)),
                FactorId::Test(_) => true,
            })
            .collect()
    }

    fn factor_vertices(&self, f: FactorId) -> VSet {
        match f {
            FactorId::Edge(k) => {
                let e = &self.g.edges()[k];
                bit(e.src) | bit(e.dst)
            }
            FactorId::Test(v) => bit(v),
        }
    }

    fn factor_weight(&self, f: FactorId) -> Weight {
        match f {
            FactorId::Edge(k) => self.edges[k].clone(),
            FactorId::Test(v) => Weight::poly(
                self.g.vertices()[v]
                    .monomial
                    .test_factor
                    .clone()
                    .unwrap_or_else(Poly::one),
            ),
        }
    }

    /// Product of the listed factors with the operators of the laminar family
    /// `ops` composed on them.
    pub fn eval_ops(
        &self,
        factors: &[FactorId],
        ops: &[Op],
        c: &Configuration,
    ) -> Result<Q, Error> {
        if ops.iter().any(Op::is_null) {
            return Ok(Q::zero());
        }
        if ops.is_empty() {
            let mut acc = Q::one();
            for &f in factors {
                acc *= self.factor_weight(f).evaluate(c)?;
            }
            return Ok(acc);
        }
        if ops.len() > MAX_VARS {
            return Err(Error::Precondition(format!(
                "forest with {} parts exceeds {MAX_VARS}",
                ops.len()
            )));
        }
        let sets: Vec<VSet> = ops.iter().map(|o| o.set).collect();
        let caps: Vec<u32> = ops
            .iter()
            .map(|o| (o.hi.max(0) as u32).min(MAX_CAP))
            .collect();
        if ops.iter().any(|o| o.hi > MAX_CAP as i64) {
            return Err(Error::Precondition("Taylor degree too large".into()));
        }
        let caps = Caps::new(&caps);
        let centers: Vec<Point> = ops
            .iter()
            .map(|o| center_at(&o.center, &c.points))
            .collect();
        let mut constant = Q::one();
        let mut product = Jet::constant(caps, Q::one());
        for &f in factors {
            let chains = acting_chains(&sets, f, self.factor_vertices(f));
            let w = self.factor_weight(f);
            if chains.is_empty() {
                constant *= w.evaluate(c)?;
                continue;
            }
            let jet = factor_jet(&w, caps, &chains, &centers, c)?;
            product = product.mul(&jet);
        }
        let windows: Vec<(u32, u32)> = ops
            .iter()
            .map(|o| (o.lo.max(0) as u32, o.hi.max(0) as u32))
            .collect();
        Ok(constant * product.window_sum(&windows))
    }
}

/// For each vertex of factor `f`, the operators acting there, innermost first.
/// An operator acts on a factor it touches but does not contain; test factors
/// are contained in no part.
fn acting_chains(sets: &[VSet], f: FactorId, fv: VSet) -> BTreeMap<usize, Vec<usize>> {
    let mut chains: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &s) in sets.iter().enumerate() {
        let contains = matches!(f, FactorId::Edge(_)) && is_subset(fv, s);
        if contains {
            continue;
        }
        for v in members(s & fv) {
            chains.entry(v).or_default().push(i);
        }
    }
    for chain in chains.values_mut() {
        chain.sort_by_key(|&i| sets[i].count_ones());
    }
    chains
}

/// Series expansion of one factor with each vertex moved through its chain of
/// operators.
fn factor_jet(
    w: &Weight,
    caps: Caps,
    chains: &BTreeMap<usize, Vec<usize>>,
    centers: &[Point],
    c: &Configuration,
) -> Result<Jet, Error> {
    let coord = |v: usize, mu: usize| -> Jet {
        match chains.get(&v) {
            Some(chain) => {
                let outer = *chain.last().expect("chains are nonempty");
                let mut acc = Jet::constant(caps, centers[outer][mu].clone());
                let mut scale = Jet::constant(caps, Q::one());
                for (pos, &i) in chain.iter().enumerate().rev() {
                    scale = scale.mul(&Jet::affine(caps, Q::zero(), i, Q::one()));
                    let next = match pos {
                        0 => &c.points[v][mu],
                        _ => &centers[chain[pos - 1]][mu],
                    };
                    acc = acc.add(&scale.scale(&(next - &centers[i][mu])));
                }
                acc
            }
            None => Jet::constant(caps, c.points[v][mu].clone()),
        }
    };
    let mut coords: BTreeMap<u32, Jet> = BTreeMap::new();
    let mut numerator = Jet::zero(caps);
    for (m, coeff) in w.numerator.terms() {
        let mut t = Jet::constant(caps, coeff.clone());
        for &(x, e) in m.pairs() {
            let j = coords
                .entry(x)
                .or_insert_with(|| coord((x / 4) as usize, (x % 4) as usize));
            t = t.mul(&j.pow(e));
        }
        numerator = numerator.add(&t);
    }
    let mut result = numerator;
    for (key, &k) in &w.denominator {
        let mut sigma = Jet::zero(caps);
        for mu in 0..4 {
            let mut lin = Jet::zero(caps);
            for (v, d) in key.form() {
                lin = lin.add(&coord(*v, mu).scale(d));
            }
            sigma = sigma.add(&lin.mul(&lin));
        }
        let inv = sigma.recip().ok_or_else(|| WeightError::Vanishing {
            factor: key.render(&c.ids),
        })?;
        result = result.mul(&inv.pow(k));
    }
    Ok(result)
}

/// Operators of a forest, each with the full window `0..=delta`.
pub fn forest_ops(g: &FeynmanGraph, f: &Forest) -> Vec<Op> {
    f.parts.iter().map(|&(s, d)| Op::taylor(g, s, d)).collect()
}

pub fn forest_sign(f: &Forest) -> Q {
    if f.len().is_multiple_of(2) {
        q(1)
    } else {
        q(-1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForestValue {
    pub parts: Vec<Vec<String>>,
    pub degrees: Vec<i64>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RResult {
    pub total: Q,
    pub per_forest: Vec<(Forest, Q)>,
    /// True when a self-loop part forced the total to zero.
    pub tadpole: bool,
    /// True when some full-graph part has an empty scope, so its subtraction
    /// cancels the constant it acts on.
    pub constant_annihilation: bool,
}

/// Forest-formula sum with every forest's signed term.
pub fn r_operation_detailed(
    g: &FeynmanGraph,
    d: &Degrees,
    conn: Connectivity,
    c: &Configuration,
) -> Result<RResult, Error> {
    let forests = enumerate_forests_with(g, d, conn);
    let constant_annihilation = forests.iter().any(|f| f.contains(g.all()))
        && g.vertices()
            .iter()
            .all(|v| v.monomial.test_factor.is_none());
    if !g.self_loops().is_empty() {
        // A self-loop part has its subtraction point on its vertex, so
        // (1 - t) annihilates it; forests with and without it cancel.
        let per_forest = forests.into_iter().map(|f| (f, Q::zero())).collect();
        return Ok(RResult {
            total: Q::zero(),
            per_forest,
            tadpole: true,
            constant_annihilation,
        });
    }
    let ev = Evaluator::new(g)?;
    let factors = ev.all_factors();
    let mut total = Q::zero();
    let mut per_forest = Vec::with_capacity(forests.len());
    for f in forests {
        let v = forest_sign(&f) * ev.eval_ops(&factors, &forest_ops(g, &f), c)?;
        total += &v;
        per_forest.push((f, v));
    }
    Ok(RResult {
        total,
        per_forest,
        tadpole: false,
        constant_annihilation,
    })
}

/// Signed sum over one laminar family from each pool, every combination acting
/// together with `fixed` on all factors. The sign is `(-1)` per pool operator.
pub(crate) fn family_product_sum(
    ev: &Evaluator,
    fixed: &[Op],
    pools: &[Vec<Vec<Op>>],
    c: &Configuration,
) -> Result<Q, Error> {
    let factors = ev.all_factors();
    let mut total = Q::zero();
    let mut pick = vec![0usize; pools.len()];
    if pools.iter().any(|p| p.is_empty()) {
        return Ok(total);
    }
    loop {
        let mut ops = fixed.to_vec();
        for (pool, &k) in pools.iter().zip(&pick) {
            ops.extend(pool[k].iter().cloned());
        }
        let v = ev.eval_ops(&factors, &ops, c)?;
        total += if (ops.len() - fixed.len()).is_multiple_of(2) {
            v
        } else {
            -v
        };
        let mut i = 0;
        loop {
            if i == pools.len() {
                return Ok(total);
            }
            pick[i] += 1;
            if pick[i] < pools[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Laminar families of the parts of `d` strictly inside `s`, as operators.
pub(crate) fn inner_families(g: &FeynmanGraph, d: &Degrees, s: VSet) -> Vec<Vec<Op>> {
    let inner: Vec<VSet> = renormalization_parts_with(g, d, Connectivity::Connected)
        .into_iter()
        .filter(|&p| p != s && is_subset(p, s))
        .collect();
    laminar_families(&inner)
        .into_iter()
        .map(|fam| {
            fam.iter()
                .map(|&p| Op::taylor(g, p, d.delta(g, p)))
                .collect()
        })
        .collect()
}

pub fn r_operation_with(g: &FeynmanGraph, d: &Degrees, c: &Configuration) -> Result<Q, Error> {
    Ok(r_operation_detailed(g, d, Connectivity::Connected, c)?.total)
}

pub fn r_operation(
    g: &FeynmanGraph,
    a: &SubtractionAssignment,
    c: &Configuration,
) -> Result<Q, Error> {
    r_operation_with(g, &Degrees::resolve(g, a)?, c)
}

/// Forest sum over the internal weight of `s`, excluding forests containing `s`.
pub fn r_normal_with(
    g: &FeynmanGraph,
    d: &Degrees,
    s: VSet,
    c: &Configuration,
) -> Result<Q, Error> {
    if g.induced_edges(s)
        .iter()
        .any(|&k| g.edges()[k].is_self_loop())
    {
        return Ok(Q::zero());
    }
    let ev = Evaluator::new(g)?;
    r_normal_eval(&ev, d, s, c)
}

pub(crate) fn r_normal_eval(
    ev: &Evaluator,
    d: &Degrees,
    s: VSet,
    c: &Configuration,
) -> Result<Q, Error> {
    let g = ev.graph();
    let inner: Vec<VSet> = renormalization_parts_with(g, d, Connectivity::Connected)
        .into_iter()
        .filter(|&p| p != s && is_subset(p, s))
        .collect();
    let factors = ev.internal_factors(s);
    let mut total = Q::zero();
    for fam in laminar_families(&inner) {
        let ops: Vec<Op> = fam
            .iter()
            .map(|&p| Op::taylor(g, p, d.delta(g, p)))
            .collect();
        let sign = if fam.len() % 2 == 0 { q(1) } else { q(-1) };
        total += sign * ev.eval_ops(&factors, &ops, c)?;
    }
    Ok(total)
}

pub fn r_normal(
    g: &FeynmanGraph,
    a: &SubtractionAssignment,
    p: &crate::graph::FullVertexPart,
    c: &Configuration,
) -> Result<Q, Error> {
    r_normal_with(g, &Degrees::resolve(g, a)?, p.vertices, c)
}

/// Taylor polynomial of `w` in the coordinates of `set` about the affine point
/// `center`, through total order `degree`.
pub fn apply_taylor(
    w: &Weight,
    set: VSet,
    center: &[(usize, Q)],
    degree: i64,
) -> Result<Weight, WeightError> {
    let mut acc = Weight::poly(Poly::zero());
    for part in taylor_components(w, set, center, degree)? {
        acc = acc.add(&part);
    }
    Ok(acc)
}

/// Homogeneous pieces of the Taylor polynomial, indexed by order.
pub fn taylor_components(
    w: &Weight,
    set: VSet,
    center: &[(usize, Q)],
    degree: i64,
) -> Result<Vec<Weight>, WeightError> {
    if degree < 0 {
        return Ok(Vec::new());
    }
    let collapse: VertexSubstitution = members(set).map(|v| (v, center.to_vec())).collect();
    let vars: Vec<(usize, usize)> = members(set)
        .flat_map(|v| (0..4).map(move |mu| (v, mu)))
        .collect();
    // (x_v^mu - xbar^mu) as polynomials
    let offsets: Vec<Poly> = vars
        .iter()
        .map(|&(v, mu)| {
            let mut coeffs = vec![(var(v, mu), q(1))];
            coeffs.extend(center.iter().map(|(u, c)| (var(*u, mu), -c.clone())));
            Poly::linear(&coeffs, Q::zero())
        })
        .collect();
    let mut acc = vec![Weight::poly(Poly::zero()); degree as usize + 1];
    // Depth-first over nondecreasing variable sequences, i.e. multi-indices.
    let mut stack: Vec<(usize, Weight, Vec<u32>)> = vec![(0, w.clone(), vec![0; vars.len()])];
    while let Some((start, deriv, alpha)) = stack.pop() {
        let order: u32 = alpha.iter().sum();
        let at_center = deriv.substitute_vertices(&collapse)?;
        if !at_center.is_zero() {
            let mut mono = Poly::one();
            let mut fact = Q::one();
            for (i, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    mono = mono.mul(&offsets[i].pow(a));
                    fact *= factorial(a);
                }
            }
            let term = Weight {
                numerator: at_center.numerator.mul(&mono),
                denominator: at_center.denominator,
            };
            acc[order as usize] = acc[order as usize].add(&term.scale(&fact.recip()));
        }
        if (order as i64) < degree {
            for i in start..vars.len() {
                let (v, mu) = vars[i];
                let next = deriv.differentiate(v, mu);
                if next.is_zero() {
                    continue;
                }
                let mut a = alpha.clone();
                a[i] += 1;
                stack.push((i, next, a));
            }
        }
    }
    Ok(acc)
}

fn factorial(n: u32) -> Q {
    (1..=n as i64).fold(q(1), |acc, k| acc * q(k))
}

/// Signed forest term as an explicit weight. Each factor is expanded by the
/// operators acting on it, innermost first, keeping track of the order each
/// operator contributed; pieces are then multiplied under the order caps.
pub fn apply_forest_term(g: &FeynmanGraph, f: &Forest) -> Result<Weight, WeightError> {
    let sets = f.sets();
    let degrees: Vec<i64> = f.parts.iter().map(|&(_, d)| d).collect();
    if degrees.iter().any(|&d| d < 0) {
        return Ok(Weight::poly(Poly::zero()));
    }
    let centers: Vec<Vec<(usize, Q)>> = sets.iter().map(|&s| subtraction_point(g, s)).collect();
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| sets[i].count_ones());
    let mut factors: Vec<(Weight, VSet, bool)> = Vec::new();
    for (k, e) in g.edges().iter().enumerate() {
        factors.push((edge_weight(g, k)?, bit(e.src) | bit(e.dst), true));
    }
    for (v, vertex) in g.vertices().iter().enumerate() {
        if let Some(t) = &vertex.monomial.test_factor {
            factors.push((Weight::poly(t.clone()), bit(v), false));
        }
    }
    type Pieces = BTreeMap<Vec<i64>, Weight>;
    let mut total: Pieces = BTreeMap::from([(vec![0; sets.len()], Weight::one())]);
    for (w, fv, is_edge) in factors {
        let mut pieces: Pieces = BTreeMap::from([(vec![0; sets.len()], w)]);
        for &i in &order {
            let acts = sets[i] & fv != 0 && !(is_edge && is_subset(fv, sets[i]));
            if !acts {
                continue;
            }
            let mut next: Pieces = BTreeMap::new();
            for (grade, piece) in &pieces {
                for (k, part) in taylor_components(piece, sets[i], &centers[i], degrees[i])?
                    .into_iter()
                    .enumerate()
                {
                    if part.is_zero() {
                        continue;
                    }
                    let mut gk = grade.clone();
                    gk[i] = k as i64;
                    add_piece(&mut next, gk, part);
                }
            }
            pieces = next;
        }
        let mut next: Pieces = BTreeMap::new();
        for (ga, wa) in &total {
            for (gb, wb) in &pieces {
                let grade: Vec<i64> = ga.iter().zip(gb).map(|(x, y)| x + y).collect();
                if grade.iter().zip(&degrees).all(|(x, d)| x <= d) {
                    add_piece(&mut next, grade, wa.multiply(wb));
                }
            }
        }
        total = next;
    }
    let mut acc = Weight::poly(Poly::zero());
    for w in total.into_values() {
        acc = acc.add(&w);
    }
    Ok(if f.len().is_multiple_of(2) {
        acc
    } else {
        acc.scale(&q(-1))
    })
}

fn add_piece(pieces: &mut BTreeMap<Vec<i64>, Weight>, grade: Vec<i64>, w: Weight) {
    match pieces.get_mut(&grade) {
        Some(existing) => *existing = existing.add(&w),
        None => {
            pieces.insert(grade, w);
        }
    }
}

/// Least-squares slope of `ln|value|` against `ln lambda`.
pub fn fit_exponent(rows: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, v)| *v != 0.0 && v.is_finite())
        .map(|&(l, v)| (l.ln(), v.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub fn default_lambdas() -> Vec<Q> {
    (3..=10)
        .map(|k| Q::new(1.into(), num_bigint::BigInt::from(1u64 << k)))
        .collect()
}

/// Move the vertices of `set` to `xbar + lambda (x_v - xbar)`, others fixed.
pub fn scale_toward(
    c: &Configuration,
    set: VSet,
    center: &[(usize, Q)],
    lambda: &Q,
) -> Configuration {
    let xbar = center_at(center, &c.points);
    let mut out = c.clone();
    for v in members(set) {
        for mu in 0..4 {
            out.points[v][mu] = &xbar[mu] + lambda * (&c.points[v][mu] - &xbar[mu]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderProbe {
    pub degree: i64,
    pub rows: Vec<(f64, f64, f64)>,
    pub exponent_plain: f64,
    pub exponent_subtracted: f64,
}

impl RemainderProbe {
    pub fn improvement(&self) -> f64 {
        self.exponent_subtracted - self.exponent_plain
    }
}

/// Scaling of `(1 - t^d)` applied to the line complement of a part, test
/// factors included, against the same factors unsubtracted.
pub fn remainder_probe(
    g: &FeynmanGraph,
    set: VSet,
    degree: i64,
    base: &Configuration,
    lambdas: &[Q],
) -> Result<RemainderProbe, Error> {
    let ev = Evaluator::new(g)?;
    let factors = ev.factors_outside(&[set]);
    let center = subtraction_point(g, set);
    let op = Op::taylor(g, set, degree);
    let mut rows = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let c = scale_toward(base, set, &center, lambda);
        let plain = ev.eval_ops(&factors, &[], &c)?;
        let taylor = ev.eval_ops(&factors, std::slice::from_ref(&op), &c)?;
        rows.push((
            q_to_f64(lambda),
            q_to_f64(&plain),
            q_to_f64(&(&plain - &taylor)),
        ));
    }
    let exponent_plain = fit_exponent(&rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
    let exponent_subtracted = fit_exponent(&rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>());
    Ok(RemainderProbe {
        degree,
        rows,
        exponent_plain,
        exponent_subtracted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{random_configurations, BoundingBox};
    use crate::fixtures;
    use crate::poly::qf;

    fn fish_with_test() -> FeynmanGraph {
        FeynmanGraph::from_json(
            r#"{"dimension":4,"vertices":[{"id":"a","fields":2,"test_factor":"x_a_0"},{"id":"b","fields":2}],
            "edges":[{"src":"a","dst":"b","src_slot":0,"dst_slot":0},{"src":"a","dst":"b","src_slot":1,"dst_slot":1}]}"#,
        )
        .unwrap()
    }

    fn at(g: &FeynmanGraph, pts: &[[i64; 4]]) -> Configuration {
        Configuration::for_graph(g, Configuration::from_ints(pts).points)
    }

    #[test]
    fn subtraction_points() {
        let fish = fixtures::fish();
        assert_eq!(
            subtraction_point(&fish, 0b11),
            vec![(0, qf(1, 2)), (1, qf(1, 2))]
        );
        let nest = fixtures::nest();
        assert_eq!(
            subtraction_point(&nest, 0b111),
            vec![(0, qf(3, 8)), (1, qf(3, 8)), (2, qf(1, 4))]
        );
        let loop_graph = FeynmanGraph::from_json(
            r#"{"dimension":4,"vertices":[{"id":"a","fields":2}],
            "edges":[{"src":"a","dst":"a","src_slot":0,"dst_slot":1}]}"#,
        )
        .unwrap();
        assert_eq!(subtraction_point(&loop_graph, 0b1), vec![(0, q(1))]);
    }

    #[test]
    fn fish_r_operation_values() {
        let g = fish_with_test();
        let d = Degrees::minimal(&g);
        let c = at(&g, &[[0, 0, 0, 0], [2, 0, 0, 0]]);
        assert_eq!(r_operation_with(&g, &d, &c).unwrap(), qf(-1, 16));
        let plain = fixtures::fish();
        let detailed = r_operation_detailed(
            &plain,
            &Degrees::minimal(&plain),
            Connectivity::Connected,
            &c,
        )
        .unwrap();
        assert_eq!(detailed.total, q(0));
        assert!(detailed.constant_annihilation);
        let tri = fixtures::triangle();
        let ct = at(&tri, &[[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0]]);
        assert_eq!(
            r_operation_with(&tri, &Degrees::minimal(&tri), &ct).unwrap(),
            qf(1, 2)
        );
    }

    #[test]
    fn fish_forest_term_by_hand() {
        // -u * xbar^0 with xbar = (x_a + x_b)/2
        let g = fish_with_test();
        let f = Forest {
            parts: vec![(0b11, 0)],
        };
        let w = apply_forest_term(&g, &f).unwrap();
        let c = at(&g, &[[2, 1, 0, 0], [4, 0, 0, 0]]);
        let u = crate::weight::graph_weight(&fixtures::fish())
            .unwrap()
            .evaluate(&c)
            .unwrap();
        assert_eq!(w.evaluate(&c).unwrap(), -u * q(3));
        let base = crate::weight::graph_weight(&g)
            .unwrap()
            .evaluate(&c)
            .unwrap();
        assert_eq!(
            apply_forest_term(&g, &Forest::empty())
                .unwrap()
                .evaluate(&c)
                .unwrap(),
            base
        );
    }

    #[test]
    fn taylor_examples() {
        let nest = fixtures::nest();
        let center = subtraction_point(&nest, 0b011);
        // zeroth order collapses the part onto its subtraction point
        let key = crate::weight::SepKey::normalize(vec![(1, q(1)), (2, q(-1))])
            .unwrap()
            .0;
        let w = Weight::sigma_inverse(key, 1);
        let t0 = apply_taylor(&w, 0b011, &center, 0).unwrap();
        let c = at(&nest, &[[0, 0, 0, 0], [2, 0, 0, 0], [0, 3, 0, 0]]);
        // xbar = (1,0,0,0); sigma(xbar - x_c) = 1 + 9
        assert_eq!(t0.evaluate(&c).unwrap(), qf(1, 10));
        assert_eq!(
            apply_taylor(&Weight::one(), 0b011, &center, 0)
                .unwrap()
                .evaluate(&c)
                .unwrap(),
            q(1)
        );
        let lin = Weight::poly(Poly::var(var(0, 0)));
        let t1 = apply_taylor(&lin, 0b011, &center, 1).unwrap();
        let c2 = at(&nest, &[[5, 0, 0, 0], [1, 0, 0, 0], [0, 3, 0, 0]]);
        assert_eq!(t1.evaluate(&c2).unwrap(), q(5));
    }

    #[test]
    fn jet_engine_matches_symbolic_terms() {
        let joined = crate::coincidence::plan_coincidence(
            &fixtures::join2(),
            &SubtractionAssignment::default(),
        )
        .unwrap()
        .delta;
        for g in [fixtures::nest(), fish_with_test(), joined] {
            let d = Degrees::minimal(&g);
            let forests = enumerate_forests_with(&g, &d, Connectivity::Connected);
            let ev = Evaluator::new(&g).unwrap();
            for c in random_configurations(&g, 11, 3, &BoundingBox::default()).unwrap() {
                for f in &forests {
                    let sym = apply_forest_term(&g, f).unwrap().evaluate(&c).unwrap();
                    let jet = forest_sign(f)
                        * ev.eval_ops(&ev.all_factors(), &forest_ops(&g, f), &c)
                            .unwrap();
                    assert_eq!(sym, jet);
                }
            }
        }
    }

    #[test]
    fn raised_degrees_match_symbolic_terms() {
        let g = fixtures::nest();
        let a = SubtractionAssignment::preset(&g, "deg+1-on-V0")
            .unwrap()
            .unwrap();
        let d = Degrees::resolve(&g, &a).unwrap();
        let ev = Evaluator::new(&g).unwrap();
        let c = random_configurations(&g, 5, 1, &BoundingBox::default())
            .unwrap()
            .remove(0);
        for f in enumerate_forests_with(&g, &d, Connectivity::Connected) {
            let sym = apply_forest_term(&g, &f).unwrap().evaluate(&c).unwrap();
            let jet = forest_sign(&f)
                * ev.eval_ops(&ev.all_factors(), &forest_ops(&g, &f), &c)
                    .unwrap();
            assert_eq!(sym, jet, "forest {:?}", f.parts);
        }
    }

    #[test]
    fn r_normal_examples() {
        let fish = fixtures::fish();
        let d = Degrees::minimal(&fish);
        let c = at(&fish, &[[0, 0, 0, 0], [2, 0, 0, 0]]);
        assert_eq!(r_normal_with(&fish, &d, 0b11, &c).unwrap(), qf(1, 16));
        let nest = fixtures::nest();
        let dn = Degrees::minimal(&nest);
        let cn = random_configurations(&nest, 2, 1, &BoundingBox::default())
            .unwrap()
            .remove(0);
        let ev = Evaluator::new(&nest).unwrap();
        let internal = ev.internal_factors(0b111);
        let by_hand = ev.eval_ops(&internal, &[], &cn).unwrap()
            - ev.eval_ops(&internal, &[Op::taylor(&nest, 0b011, 0)], &cn)
                .unwrap();
        assert_eq!(r_normal_with(&nest, &dn, 0b111, &cn).unwrap(), by_hand);
    }

    #[test]
    fn self_loop_graph_is_annihilated() {
        let g = FeynmanGraph::from_json(
            r#"{"dimension":4,"vertices":[{"id":"a","fields":4,"test_factor":"x_a_0 + 1"},{"id":"b","fields":2}],
            "edges":[{"src":"a","dst":"a","src_slot":0,"dst_slot":1},
                     {"src":"a","dst":"b","src_slot":2,"dst_slot":0},{"src":"a","dst":"b","src_slot":3,"dst_slot":1}]}"#,
        )
        .unwrap();
        let c = at(&g, &[[0, 0, 0, 0], [1, 2, 0, 0]]);
        let r =
            r_operation_detailed(&g, &Degrees::minimal(&g), Connectivity::Connected, &c).unwrap();
        assert!(r.tadpole);
        assert_eq!(r.total, q(0));
    }

    #[test]
    fn remainder_orders_on_nest() {
        let g = fixtures::nest();
        let base = random_configurations(&g, 3, 1, &BoundingBox::default())
            .unwrap()
            .remove(0);
        for d in 0..=2 {
            let p = remainder_probe(&g, 0b011, d, &base, &default_lambdas()).unwrap();
            assert!(
                p.improvement() >= d as f64 + 1.0 - 0.1,
                "d={d}: {}",
                p.improvement()
            );
        }
    }
}
