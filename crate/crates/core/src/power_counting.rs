//! UV degrees, codegrees and (over)subtraction degrees of vertex parts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{is_subset, members, FeynmanGraph, VSet, DIM};
use crate::Error;

/// UV degree of divergence: `2|E| + D_int - 4(|V| - 1)`.
pub fn uv_degree(g: &FeynmanGraph, s: VSet) -> i64 {
    let mut edges = 0i64;
    let mut derivs = 0i64;
    for e in g.edges().iter().filter(|e| e.inside(s)) {
        edges += 1;
        derivs += g.vertices()[e.src].monomial.slot_derivs[e.src_slot] as i64;
        derivs += g.vertices()[e.dst].monomial.slot_derivs[e.dst_slot] as i64;
    }
    // (dim M - 2 dim phi)|E| - dim M (|V| - 1) + |D| with dim phi = 1
    (DIM - 2) * edges + derivs - DIM * (s.count_ones() as i64 - 1)
}

/// The same degree computed from vertex monomials and the external content.
pub fn uv_degree_from_monomials(g: &FeynmanGraph, s: VSet) -> i64 {
    let dims: i64 = members(s).map(|v| g.vertices()[v].monomial.dim()).sum();
    let internal = dims - codegree(g, s);
    DIM + internal - DIM * s.count_ones() as i64
}

/// External field legs of the part plus the derivative orders they carry.
pub fn codegree(g: &FeynmanGraph, s: VSet) -> i64 {
    g.external_slots(s)
        .into_iter()
        .map(|(v, slot)| 1 + g.vertices()[v].monomial.slot_derivs[slot] as i64)
        .sum()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubtractionAssignment {
    #[serde(default)]
    pub vertex_deltas: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub part_overrides: Vec<PartOverride>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartOverride {
    pub vertices: Vec<String>,
    pub delta: i64,
}

impl SubtractionAssignment {
    pub fn minimal(g: &FeynmanGraph) -> Self {
        SubtractionAssignment {
            vertex_deltas: g
                .vertices()
                .iter()
                .map(|v| (v.id.clone(), v.monomial.dim()))
                .collect(),
            part_overrides: Vec::new(),
        }
    }

    /// `minimal`, `deg+K-on-V0` (first limit vertex, else first vertex) or
    /// `deg+K-on-<vertex id>`.
    pub fn preset(g: &FeynmanGraph, name: &str) -> Option<Result<Self, Error>> {
        if name == "minimal" {
            return Some(Ok(Self::minimal(g)));
        }
        let rest = name.strip_prefix("deg+")?;
        let (k, target) = rest.split_once("-on-")?;
        let k: i64 = match k.parse() {
            Ok(k) => k,
            Err(_) => return Some(Err(Error::Input(format!("bad raise amount in '{name}'")))),
        };
        let v = if target == "V0" {
            Some(distinguished_vertex(g))
        } else {
            g.vertex_index(target)
        };
        let Some(v) = v else {
            return Some(Err(Error::Input(format!(
                "preset '{name}' names unknown vertex"
            ))));
        };
        let mut a = Self::minimal(g);
        *a.vertex_deltas.get_mut(&g.vertices()[v].id).unwrap() += k;
        Some(Ok(a))
    }

    pub fn with_override(mut self, ids: &[&str], delta: i64) -> Self {
        self.part_overrides.push(PartOverride {
            vertices: ids.iter().map(|s| s.to_string()).collect(),
            delta,
        });
        self
    }
}

/// The vertex used for single-vertex raises: the first limit vertex if any,
/// otherwise the lexicographically first vertex.
pub fn distinguished_vertex(g: &FeynmanGraph) -> usize {
    match g.limit_set() {
        Some(l) if l != 0 => l.trailing_zeros() as usize,
        _ => 0,
    }
}

/// An assignment resolved against one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degrees {
    pub vertex: Vec<i64>,
    pub overrides: BTreeMap<VSet, i64>,
}

impl Degrees {
    /// Explicit vertex deltas win over deltas stored in the graph, which win
    /// over the monomial dimension.
    pub fn resolve(g: &FeynmanGraph, a: &SubtractionAssignment) -> Result<Self, Error> {
        for id in a.vertex_deltas.keys() {
            if g.vertex_index(id).is_none() {
                return Err(Error::Input(format!(
                    "assignment names unknown vertex '{id}'"
                )));
            }
        }
        let mut vertex = Vec::with_capacity(g.num_vertices());
        for v in g.vertices() {
            let d = a
                .vertex_deltas
                .get(&v.id)
                .copied()
                .or(v.delta)
                .unwrap_or_else(|| v.monomial.dim());
            if d < v.monomial.dim() {
                return Err(Error::Precondition(format!(
                    "vertex '{}': delta {d} is below the monomial dimension {}",
                    v.id,
                    v.monomial.dim()
                )));
            }
            vertex.push(d);
        }
        let mut overrides = BTreeMap::new();
        for o in &a.part_overrides {
            let s = g.vset_of(&o.vertices)?;
            if s == 0 {
                return Err(Error::Input("part override with no vertices".into()));
            }
            overrides.insert(s, o.delta);
        }
        Ok(Degrees { vertex, overrides })
    }

    pub fn minimal(g: &FeynmanGraph) -> Self {
        Degrees {
            vertex: g.vertices().iter().map(|v| v.monomial.dim()).collect(),
            overrides: BTreeMap::new(),
        }
    }

    /// `delta(gamma) = 4 + sum_v (delta_v - 4) - codegree`, unless overridden.
    pub fn delta(&self, g: &FeynmanGraph, s: VSet) -> i64 {
        if let Some(&d) = self.overrides.get(&s) {
            return d;
        }
        self.formula(g, s)
    }

    pub fn formula(&self, g: &FeynmanGraph, s: VSet) -> i64 {
        DIM + members(s).map(|v| self.vertex[v] - DIM).sum::<i64>() - codegree(g, s)
    }
}

pub fn oversubtraction_degree(
    g: &FeynmanGraph,
    a: &SubtractionAssignment,
    s: VSet,
) -> Result<i64, Error> {
    Ok(Degrees::resolve(g, a)?.delta(g, s))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub sub_parts: Vec<Vec<String>>,
    pub delta: i64,
    pub contracted_delta: i64,
    pub sub_deltas: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartReport {
    pub part: Vec<String>,
    pub degree: i64,
    pub codegree: i64,
    pub delta: i64,
    pub violations: Vec<Violation>,
}

/// Degree of the contracted part `gamma / {gamma_i}`: each contracted vertex
/// carries its minimal degree, the codegree of the sub-part it replaces.
pub fn contracted_delta(g: &FeynmanGraph, d: &Degrees, s: VSet, subs: &[VSet]) -> i64 {
    let inner: VSet = subs.iter().fold(0, |acc, &x| acc | x);
    let rest: i64 = members(s & !inner).map(|v| d.vertex[v] - DIM).sum();
    let contracted: i64 = subs.iter().map(|&x| codegree(g, x) - DIM).sum();
    DIM + rest + contracted - codegree(g, s)
}

/// Check `delta(gamma) >= delta(gamma-bar) + sum_i delta(gamma_i)` for every
/// part and every family of pairwise disjoint renormalization parts inside it.
pub fn validate_assignment(
    g: &FeynmanGraph,
    a: &SubtractionAssignment,
) -> Result<Vec<PartReport>, Error> {
    let d = Degrees::resolve(g, a)?;
    let parts =
        crate::forest::renormalization_parts_with(g, &d, crate::forest::Connectivity::Connected);
    let mut out = Vec::new();
    for &s in &parts {
        let inside: Vec<VSet> = parts
            .iter()
            .copied()
            .filter(|&p| p != s && is_subset(p, s))
            .collect();
        let mut violations = Vec::new();
        for family in disjoint_families(&inside) {
            let lhs = d.delta(g, s);
            let cd = contracted_delta(g, &d, s, &family);
            let sub: Vec<i64> = family.iter().map(|&x| d.delta(g, x)).collect();
            if lhs < cd + sub.iter().sum::<i64>() {
                violations.push(Violation {
                    sub_parts: family.iter().map(|&x| g.ids(x)).collect(),
                    delta: lhs,
                    contracted_delta: cd,
                    sub_deltas: sub,
                });
            }
        }
        out.push(PartReport {
            part: g.ids(s),
            degree: uv_degree(g, s),
            codegree: codegree(g, s),
            delta: d.delta(g, s),
            violations,
        });
    }
    Ok(out)
}

/// All nonempty families of pairwise disjoint sets drawn from `sets`.
pub fn disjoint_families(sets: &[VSet]) -> Vec<Vec<VSet>> {
    fn go(sets: &[VSet], start: usize, used: VSet, cur: &mut Vec<VSet>, out: &mut Vec<Vec<VSet>>) {
        for i in start..sets.len() {
            if sets[i] & used == 0 {
                cur.push(sets[i]);
                out.push(cur.clone());
                go(sets, i + 1, used | sets[i], cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(sets, 0, 0, &mut Vec::new(), &mut out);
    out
}
