//! Feynman multigraphs with monomial-decorated vertices and slot-addressed edges.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{parse_poly, Poly};

/// Vertex subsets are bitmasks over vertex indices (at most 64 vertices).
pub type VSet = u64;

pub const DIM: i64 = 4;
pub const MAX_VERTICES: usize = 64;

pub fn bit(v: usize) -> VSet {
    1u64 << v
}

pub fn members(s: VSet) -> impl Iterator<Item = usize> {
    let mut rest = s;
    std::iter::from_fn(move || {
        if rest == 0 {
            return None;
        }
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        Some(v)
    })
}

pub fn popcount(s: VSet) -> u32 {
    s.count_ones()
}

pub fn is_subset(a: VSet, b: VSet) -> bool {
    a & !b == 0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub field_count: usize,
    pub slot_derivs: Vec<u32>,
    pub test_factor: Option<Poly>,
}

impl Monomial {
    pub fn dim(&self) -> i64 {
        self.field_count as i64 + self.slot_derivs.iter().map(|&d| d as i64).sum::<i64>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub monomial: Monomial,
    pub delta: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub src_slot: usize,
    pub dst_slot: usize,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }

    pub fn touches(&self, s: VSet) -> bool {
        s & (bit(self.src) | bit(self.dst)) != 0
    }

    pub fn inside(&self, s: VSet) -> bool {
        is_subset(bit(self.src) | bit(self.dst), s)
    }
}

/// Serialized graph description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub dimension: u32,
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_set: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    pub fields: usize,
    #[serde(default)]
    pub slot_derivs: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_factor: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub src: String,
    pub dst: String,
    pub src_slot: usize,
    pub dst_slot: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("dimension must be 4, got {0}")]
    Dimension(u32),
    #[error("duplicate vertex id '{0}'")]
    DuplicateVertex(String),
    #[error("vertex '{id}': slot_derivs has length {len} but fields = {fields}")]
    SlotDerivLength {
        id: String,
        len: usize,
        fields: usize,
    },
    #[error("edge {edge}: unknown vertex '{id}'")]
    UnknownVertex { edge: usize, id: String },
    #[error("edge {edge}: slot {slot} out of range at vertex '{id}' ({fields} fields)")]
    SlotOutOfRange {
        edge: usize,
        id: String,
        slot: usize,
        fields: usize,
    },
    #[error("edge {edge}: slot {slot} at vertex '{id}' already used by edge {previous}")]
    SlotReuse {
        edge: usize,
        id: String,
        slot: usize,
        previous: usize,
    },
    #[error("limit_set names unknown vertex '{0}'")]
    UnknownLimitVertex(String),
    #[error("vertex '{id}': test factor: {msg}")]
    TestFactor { id: String, msg: String },
    #[error("too many vertices ({0}); at most 64 are supported")]
    TooManyVertices(usize),
    #[error("empty vertex set")]
    EmptyPart,
    #[error("unknown vertex '{0}'")]
    UnknownId(String),
    #[error("vertex set {{{0}}} induces a disconnected subgraph")]
    Disconnected(String),
    #[error("vertex set {{{0}}} is not inside the limit set")]
    NotInLimitSet(String),
    #[error("edge set is not the full induced edge set of {{{0}}}")]
    NotFull(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeynmanGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    limit_set: Option<VSet>,
    adjacency: Vec<VSet>,
    slot_edge: Vec<Vec<Option<usize>>>,
}

/// A vertex subset together with every induced edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FullVertexPart {
    pub vertices: VSet,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Contraction,
    Joining,
    Fusion,
}

/// Records how old vertices and slots land in a derived graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMap {
    pub kind: MapKind,
    pub forward: BTreeMap<String, String>,
    pub index: Vec<usize>,
    /// `slots[v][s]` is the new slot index of old slot `s` at old vertex `v`,
    /// or `None` when the operation consumed it.
    pub slots: Vec<Vec<Option<usize>>>,
    /// Index of the merged vertex in the new graph.
    pub merged: usize,
    /// Old edge index to new edge index; `None` for removed edges.
    pub edges: Vec<Option<usize>>,
}

impl VertexMap {
    pub fn preimage(&self, new_v: usize) -> VSet {
        self.index
            .iter()
            .enumerate()
            .filter(|&(_, &n)| n == new_v)
            .fold(0, |acc, (old, _)| acc | bit(old))
    }

    pub fn image(&self, s: VSet) -> VSet {
        members(s).fold(0, |acc, v| acc | bit(self.index[v]))
    }

    /// Split preimage of a vertex set of the derived graph.
    pub fn pull_back(&self, s: VSet) -> VSet {
        members(s).fold(0, |acc, v| acc | self.preimage(v))
    }
}

impl FeynmanGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self, GraphError> {
        if spec.dimension != 4 {
            return Err(GraphError::Dimension(spec.dimension));
        }
        if spec.vertices.len() > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(spec.vertices.len()));
        }
        let mut sorted: Vec<&VertexSpec> = spec.vertices.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        for w in sorted.windows(2) {
            if w[0].id == w[1].id {
                return Err(GraphError::DuplicateVertex(w[0].id.clone()));
            }
        }
        let index: BTreeMap<&str, usize> = sorted
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let resolve = |vid: &str, mu: u32| -> Result<u32, String> {
            index
                .get(vid)
                .map(|&i| 4 * i as u32 + mu)
                .ok_or_else(|| format!("unknown vertex '{vid}'"))
        };
        let mut vertices = Vec::with_capacity(sorted.len());
        for vs in &sorted {
            let slot_derivs = vs.slot_derivs.clone().unwrap_or_else(|| vec![0; vs.fields]);
            if slot_derivs.len() != vs.fields {
                return Err(GraphError::SlotDerivLength {
                    id: vs.id.clone(),
                    len: slot_derivs.len(),
                    fields: vs.fields,
                });
            }
            let test_factor = match &vs.test_factor {
                Some(src) => Some(
                    parse_poly(src, &|vid: &str, mu: u32| {
                        if vid != vs.id {
                            return Err(format!(
                                "test factor may only use coordinates of '{}', found '{vid}'",
                                vs.id
                            ));
                        }
                        resolve(vid, mu)
                    })
                    .map_err(|e| GraphError::TestFactor {
                        id: vs.id.clone(),
                        msg: e.to_string(),
                    })?,
                ),
                None => None,
            };
            vertices.push(Vertex {
                id: vs.id.clone(),
                monomial: Monomial {
                    field_count: vs.fields,
                    slot_derivs,
                    test_factor,
                },
                delta: vs.delta,
            });
        }
        let mut edges = Vec::with_capacity(spec.edges.len());
        for (k, es) in spec.edges.iter().enumerate() {
            let look = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownVertex {
                        edge: k,
                        id: id.to_string(),
                    })
            };
            edges.push(Edge {
                src: look(&es.src)?,
                dst: look(&es.dst)?,
                src_slot: es.src_slot,
                dst_slot: es.dst_slot,
            });
        }
        let limit_set = match &spec.limit_set {
            Some(ids) => {
                let mut s = 0;
                for id in ids {
                    let i = index
                        .get(id.as_str())
                        .ok_or_else(|| GraphError::UnknownLimitVertex(id.clone()))?;
                    s |= bit(*i);
                }
                Some(s)
            }
            None => None,
        };
        Self::from_parts(vertices, edges, limit_set)
    }

    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        let spec: GraphSpec = serde_json::from_str(text)?;
        Ok(Self::from_spec(&spec)?)
    }

    /// Assemble from already-indexed parts; vertices must be sorted by id.
    pub fn from_parts(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        limit_set: Option<VSet>,
    ) -> Result<Self, GraphError> {
        if vertices.len() > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(vertices.len()));
        }
        debug_assert!(vertices.windows(2).all(|w| w[0].id < w[1].id));
        let mut slot_edge: Vec<Vec<Option<usize>>> = vertices
            .iter()
            .map(|v| vec![None; v.monomial.field_count])
            .collect();
        let mut adjacency = vec![0; vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            for (v, slot) in [(e.src, e.src_slot), (e.dst, e.dst_slot)] {
                let vert = vertices.get(v).ok_or_else(|| GraphError::UnknownVertex {
                    edge: k,
                    id: format!("#{v}"),
                })?;
                let cell =
                    slot_edge[v]
                        .get_mut(slot)
                        .ok_or_else(|| GraphError::SlotOutOfRange {
                            edge: k,
                            id: vert.id.clone(),
                            slot,
                            fields: vert.monomial.field_count,
                        })?;
                if let Some(previous) = *cell {
                    return Err(GraphError::SlotReuse {
                        edge: k,
                        id: vert.id.clone(),
                        slot,
                        previous,
                    });
                }
                *cell = Some(k);
            }
            adjacency[e.src] |= bit(e.dst);
            adjacency[e.dst] |= bit(e.src);
        }
        Ok(FeynmanGraph {
            vertices,
            edges,
            limit_set,
            adjacency,
            slot_edge,
        })
    }

    pub fn to_spec(&self) -> GraphSpec {
        let name = |var: u32| format!("x_{}_{}", self.vertices[(var / 4) as usize].id, var % 4);
        GraphSpec {
            dimension: 4,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexSpec {
                    id: v.id.clone(),
                    fields: v.monomial.field_count,
                    slot_derivs: Some(v.monomial.slot_derivs.clone()),
                    delta: v.delta,
                    test_factor: v.monomial.test_factor.as_ref().map(|p| p.fmt_with(&name)),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    src: self.vertices[e.src].id.clone(),
                    dst: self.vertices[e.dst].id.clone(),
                    src_slot: e.src_slot,
                    dst_slot: e.dst_slot,
                })
                .collect(),
            limit_set: self.limit_set.map(|s| self.ids(s)),
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn all(&self) -> VSet {
        if self.vertices.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.vertices.len()) - 1
        }
    }

    pub fn limit_set(&self) -> Option<VSet> {
        self.limit_set
    }

    pub fn with_limit_set(&self, limit: Option<VSet>) -> FeynmanGraph {
        FeynmanGraph {
            limit_set: limit,
            ..self.clone()
        }
    }

    pub fn with_vertex_delta(&self, v: usize, delta: Option<i64>) -> FeynmanGraph {
        let mut g = self.clone();
        g.vertices[v].delta = delta;
        g
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices
            .binary_search_by(|v| v.id.as_str().cmp(id))
            .ok()
    }

    pub fn vset_of(&self, ids: &[impl AsRef<str>]) -> Result<VSet, GraphError> {
        let mut s = 0;
        for id in ids {
            let i = self
                .vertex_index(id.as_ref())
                .ok_or_else(|| GraphError::UnknownId(id.as_ref().to_string()))?;
            s |= bit(i);
        }
        Ok(s)
    }

    pub fn ids(&self, s: VSet) -> Vec<String> {
        members(s).map(|v| self.vertices[v].id.clone()).collect()
    }

    pub fn label(&self, s: VSet) -> String {
        self.ids(s).join(",")
    }

    pub fn edge_label(&self, k: usize) -> String {
        let e = &self.edges[k];
        format!(
            "{}[{}]-{}[{}]",
            self.vertices[e.src].id, e.src_slot, self.vertices[e.dst].id, e.dst_slot
        )
    }

    pub fn edge_at(&self, v: usize, slot: usize) -> Option<usize> {
        self.slot_edge
            .get(v)
            .and_then(|s| s.get(slot).copied().flatten())
    }

    pub fn adjacency(&self, v: usize) -> VSet {
        self.adjacency[v]
    }

    pub fn self_loops(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| self.edges[k].is_self_loop())
            .collect()
    }

    pub fn induced_edges(&self, s: VSet) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&k| self.edges[k].inside(s))
            .collect()
    }

    pub fn num_induced_edges(&self, s: VSet) -> usize {
        self.edges.iter().filter(|e| e.inside(s)).count()
    }

    /// Number of edge ends in `s` that belong to edges internal to `s`,
    /// counted per vertex (a self-loop counts twice at its vertex).
    pub fn internal_valence(&self, s: VSet, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.inside(s))
            .map(|e| (e.src == v) as usize + (e.dst == v) as usize)
            .sum()
    }

    pub fn is_connected(&self, s: VSet) -> bool {
        if s == 0 {
            return false;
        }
        let start = s.trailing_zeros() as usize;
        let mut seen = bit(start);
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            for v in members(frontier) {
                next |= self.adjacency[v] & s;
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen == s
    }

    /// Connected and still connected after deleting any single internal edge.
    pub fn is_one_pi(&self, s: VSet) -> bool {
        if !self.is_connected(s) {
            return false;
        }
        let internal = self.induced_edges(s);
        internal.iter().all(|&drop| {
            let start = s.trailing_zeros() as usize;
            let mut seen = bit(start);
            loop {
                let mut grown = seen;
                for &k in &internal {
                    if k == drop {
                        continue;
                    }
                    let e = &self.edges[k];
                    if seen & bit(e.src) != 0 || seen & bit(e.dst) != 0 {
                        grown |= bit(e.src) | bit(e.dst);
                    }
                }
                if grown == seen {
                    break;
                }
                seen = grown;
            }
            seen == s
        })
    }

    pub fn components_of(&self, s: VSet) -> Vec<VSet> {
        let mut out = Vec::new();
        let mut rest = s;
        while rest != 0 {
            let start = rest.trailing_zeros() as usize;
            let mut seen = bit(start);
            let mut frontier = seen;
            while frontier != 0 {
                let mut next = 0;
                for v in members(frontier) {
                    next |= self.adjacency[v] & s;
                }
                frontier = next & !seen;
                seen |= next;
            }
            out.push(seen);
            rest &= !seen;
        }
        out
    }

    pub fn connected_components(&self) -> Vec<Vec<String>> {
        self.components_of(self.all())
            .into_iter()
            .map(|c| self.ids(c))
            .collect()
    }

    pub fn full_vertex_part(&self, s: VSet) -> Result<FullVertexPart, GraphError> {
        if s == 0 {
            return Err(GraphError::EmptyPart);
        }
        if !is_subset(s, self.all()) {
            return Err(GraphError::UnknownId(format!(
                "#{}",
                63 - s.leading_zeros()
            )));
        }
        if !self.is_connected(s) {
            return Err(GraphError::Disconnected(self.label(s)));
        }
        Ok(FullVertexPart {
            vertices: s,
            edges: self.induced_edges(s),
        })
    }

    /// Accepts an explicit edge list only if it is the full induced set.
    pub fn part_with_edges(&self, s: VSet, edges: &[usize]) -> Result<FullVertexPart, GraphError> {
        let p = self.full_vertex_part(s)?;
        let mut given = edges.to_vec();
        given.sort_unstable();
        given.dedup();
        if given != p.edges {
            return Err(GraphError::NotFull(self.label(s)));
        }
        Ok(p)
    }

    pub fn line_complement(&self, p: &FullVertexPart) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|k| p.edges.binary_search(k).is_err())
            .collect()
    }

    /// Field slots of `s` not consumed by edges internal to `s`, as
    /// `(vertex, slot)` pairs in canonical order.
    pub fn external_slots(&self, s: VSet) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in members(s) {
            for slot in 0..self.vertices[v].monomial.field_count {
                let internal = self.slot_edge[v][slot].is_some_and(|k| self.edges[k].inside(s));
                if !internal {
                    out.push((v, slot));
                }
            }
        }
        out
    }

    pub fn external_legs(&self) -> usize {
        self.external_slots(self.all()).len()
    }

    fn fresh_id(&self, base: &str, reuse: VSet) -> String {
        let taken = |id: &str| {
            self.vertices
                .iter()
                .enumerate()
                .any(|(i, v)| v.id == id && reuse & bit(i) == 0)
        };
        if !taken(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}_{k}"))
            .find(|c| !taken(c))
            .expect("unbounded suffix search")
    }

    /// Merge `s` into a single vertex named `name`, dropping `drop_edges` and
    /// the listed slots. The merged vertex keeps every remaining slot of the
    /// merged vertices in canonical order.
    pub(crate) fn merge(
        &self,
        s: VSet,
        name: &str,
        drop_edges: &BTreeSet<usize>,
        drop_slots: &BTreeSet<(usize, usize)>,
        kind: MapKind,
        delta: Option<i64>,
    ) -> (FeynmanGraph, VertexMap) {
        let new_id = self.fresh_id(name, s);
        let mut merged_derivs = Vec::new();
        let mut merged_slot_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for v in members(s) {
            for (slot, &d) in self.vertices[v].monomial.slot_derivs.iter().enumerate() {
                if !drop_slots.contains(&(v, slot)) {
                    merged_slot_of.insert((v, slot), merged_derivs.len());
                    merged_derivs.push(d);
                }
            }
        }
        let mut ids: Vec<String> = (0..self.vertices.len())
            .filter(|&v| s & bit(v) == 0)
            .map(|v| self.vertices[v].id.clone())
            .collect();
        ids.push(new_id.clone());
        ids.sort();
        let pos = |id: &str| ids.binary_search_by(|x| x.as_str().cmp(id)).unwrap();
        let merged_idx = pos(&new_id);
        let index: Vec<usize> = (0..self.vertices.len())
            .map(|v| {
                if s & bit(v) != 0 {
                    merged_idx
                } else {
                    pos(&self.vertices[v].id)
                }
            })
            .collect();
        let var_map = |var: u32| 4 * index[(var / 4) as usize] as u32 + var % 4;

        let mut test: Option<Poly> = None;
        for v in members(s) {
            if let Some(t) = &self.vertices[v].monomial.test_factor {
                let t = t.remap(var_map);
                test = Some(match test {
                    Some(acc) => acc.mul(&t),
                    None => t,
                });
            }
        }
        let mut new_vertices: Vec<Option<Vertex>> = vec![None; ids.len()];
        for v in 0..self.vertices.len() {
            if s & bit(v) == 0 {
                let old = &self.vertices[v];
                new_vertices[index[v]] = Some(Vertex {
                    id: old.id.clone(),
                    monomial: Monomial {
                        field_count: old.monomial.field_count,
                        slot_derivs: old.monomial.slot_derivs.clone(),
                        test_factor: old.monomial.test_factor.as_ref().map(|t| t.remap(var_map)),
                    },
                    delta: old.delta,
                });
            }
        }
        new_vertices[merged_idx] = Some(Vertex {
            id: new_id.clone(),
            monomial: Monomial {
                field_count: merged_derivs.len(),
                slot_derivs: merged_derivs,
                test_factor: test,
            },
            delta,
        });
        let vertices: Vec<Vertex> = new_vertices.into_iter().map(Option::unwrap).collect();

        let slots: Vec<Vec<Option<usize>>> = (0..self.vertices.len())
            .map(|v| {
                (0..self.vertices[v].monomial.field_count)
                    .map(|slot| {
                        if s & bit(v) != 0 {
                            merged_slot_of.get(&(v, slot)).copied()
                        } else {
                            Some(slot)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut edges = Vec::new();
        let mut edge_map = vec![None; self.edges.len()];
        for (k, e) in self.edges.iter().enumerate() {
            if drop_edges.contains(&k) {
                continue;
            }
            edge_map[k] = Some(edges.len());
            edges.push(Edge {
                src: index[e.src],
                dst: index[e.dst],
                src_slot: slots[e.src][e.src_slot].expect("slot of a kept edge was dropped"),
                dst_slot: slots[e.dst][e.dst_slot].expect("slot of a kept edge was dropped"),
            });
        }
        let limit_set = self.limit_set.and_then(|l| {
            let rest = l & !s;
            (rest != 0).then(|| members(rest).fold(0, |acc, v| acc | bit(index[v])))
        });
        let forward = (0..self.vertices.len())
            .map(|v| (self.vertices[v].id.clone(), vertices[index[v]].id.clone()))
            .collect();
        let g = FeynmanGraph::from_parts(vertices, edges, limit_set)
            .expect("merging preserves slot bookkeeping");
        let map = VertexMap {
            kind,
            forward,
            index,
            slots,
            merged: merged_idx,
            edges: edge_map,
        };
        (g, map)
    }

    /// Contract a part to a single vertex carrying the part's external slots.
    pub fn contract(&self, p: &FullVertexPart) -> (FeynmanGraph, VertexMap) {
        self.contract_set(p.vertices)
    }

    pub fn contract_set(&self, s: VSet) -> (FeynmanGraph, VertexMap) {
        let internal: BTreeSet<usize> = self.induced_edges(s).into_iter().collect();
        let mut slots = BTreeSet::new();
        for &k in &internal {
            let e = &self.edges[k];
            slots.insert((e.src, e.src_slot));
            slots.insert((e.dst, e.dst_slot));
        }
        self.merge(s, "Vbar", &internal, &slots, MapKind::Contraction, None)
    }

    /// Join vertices of the limit set into one vertex, keeping all edges.
    pub fn join_vertices(&self, s: VSet) -> Result<(FeynmanGraph, VertexMap), GraphError> {
        let limit = self.limit_set.unwrap_or(0);
        if s == 0 || !is_subset(s, limit) {
            return Err(GraphError::NotInLimitSet(self.label(s)));
        }
        let delta = members(s)
            .map(|v| self.vertices[v].delta)
            .sum::<Option<i64>>();
        Ok(self.merge(
            s,
            "v0",
            &BTreeSet::new(),
            &BTreeSet::new(),
            MapKind::Joining,
            delta,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn builds_fixtures() {
        let fish = fixtures::fish();
        assert_eq!(fish.num_vertices(), 2);
        assert_eq!(fish.external_legs(), 0);
        let nest = fixtures::nest();
        assert_eq!(nest.edges().len(), 4);
        assert_eq!(nest.external_legs(), 0);
    }

    #[test]
    fn rejects_bad_specs() {
        let text = r#"{"dimension":4,"vertices":[{"id":"a","fields":1}],
            "edges":[{"src":"a","dst":"z","src_slot":0,"dst_slot":0}]}"#;
        let err = FeynmanGraph::from_json(text).unwrap_err();
        assert!(err.to_string().contains("unknown vertex"));
        let reuse = r#"{"dimension":4,"vertices":[{"id":"a","fields":1},{"id":"b","fields":2}],
            "edges":[{"src":"a","dst":"b","src_slot":0,"dst_slot":0},
                     {"src":"a","dst":"b","src_slot":0,"dst_slot":1}]}"#;
        assert!(FeynmanGraph::from_json(reuse)
            .unwrap_err()
            .to_string()
            .contains("already used"));
        let range = r#"{"dimension":4,"vertices":[{"id":"a","fields":1},{"id":"b","fields":1}],
            "edges":[{"src":"a","dst":"b","src_slot":0,"dst_slot":3}]}"#;
        assert!(FeynmanGraph::from_json(range)
            .unwrap_err()
            .to_string()
            .contains("out of range"));
        let dim = r#"{"dimension":6,"vertices":[],"edges":[]}"#;
        assert!(FeynmanGraph::from_json(dim).is_err());
    }

    #[test]
    fn parts_and_complements() {
        let nest = fixtures::nest();
        let ab = nest
            .full_vertex_part(nest.vset_of(&["a", "b"]).unwrap())
            .unwrap();
        assert_eq!(ab.edges.len(), 2);
        let rest = nest.line_complement(&ab);
        assert_eq!(rest.len(), 2);
        assert!(rest
            .iter()
            .all(|&k| nest.edges()[k].touches(nest.vset_of(&["c"]).unwrap())));
        let join2 = fixtures::join2();
        let s = join2.vset_of(&["v1", "B"]).unwrap();
        assert!(matches!(
            join2.full_vertex_part(s),
            Err(GraphError::Disconnected(_))
        ));
        let v1a = join2
            .full_vertex_part(join2.vset_of(&["v1", "A"]).unwrap())
            .unwrap();
        assert_eq!(join2.line_complement(&v1a).len(), 3);
        let wrong = join2.part_with_edges(v1a.vertices, &v1a.edges[..1]);
        assert!(matches!(wrong, Err(GraphError::NotFull(_))));
    }

    #[test]
    fn contraction_counts() {
        let nest = fixtures::nest();
        let ab = nest
            .full_vertex_part(nest.vset_of(&["a", "b"]).unwrap())
            .unwrap();
        let (q, map) = nest.contract(&ab);
        assert_eq!(q.num_vertices(), 2);
        assert_eq!(q.edges().len(), 2);
        assert_eq!(q.vertices()[map.merged].monomial.field_count, 2);
        assert_eq!(q.external_legs(), nest.external_legs());
        let fish = fixtures::fish();
        let (point, _) = fish.contract_set(fish.all());
        assert_eq!(point.num_vertices(), 1);
        assert!(point.edges().is_empty());
        let join2 = fixtures::join2();
        let (q, _) = join2.contract_set(join2.vset_of(&["v1", "A"]).unwrap());
        assert_eq!(q.num_vertices(), 3);
        assert_eq!(q.edges().len(), 3);
    }

    #[test]
    fn joining() {
        let join2 = fixtures::join2();
        let (delta, map) = join2.join_vertices(join2.limit_set().unwrap()).unwrap();
        assert_eq!(delta.ids(delta.all()), vec!["A", "B", "v0"]);
        assert_eq!(delta.edges().len(), 5);
        assert_eq!(delta.external_legs(), join2.external_legs());
        assert_eq!(map.pull_back(bit(map.merged)), join2.limit_set().unwrap());
        let raise = fixtures::raise();
        let (d, _) = raise.join_vertices(raise.limit_set().unwrap()).unwrap();
        assert_eq!(d.num_vertices(), 2);
        assert_eq!(d.edges().len(), 4);
        let fish = fixtures::fish().with_limit_set(Some(0b11));
        let (one, _) = fish.join_vertices(0b11).unwrap();
        assert_eq!(one.self_loops().len(), 2);
        assert!(fixtures::nest().join_vertices(0b11).is_err());
    }

    #[test]
    fn components() {
        let text = r#"{"dimension":4,"vertices":[{"id":"a","fields":2},{"id":"b","fields":2},{"id":"c","fields":0}],
            "edges":[{"src":"a","dst":"b","src_slot":0,"dst_slot":0},{"src":"a","dst":"b","src_slot":1,"dst_slot":1}]}"#;
        let g = FeynmanGraph::from_json(text).unwrap();
        assert_eq!(
            g.connected_components(),
            vec![vec!["a".to_string(), "b".into()], vec!["c".into()]]
        );
    }

    #[test]
    fn one_pi_flag() {
        let nest = fixtures::nest();
        assert!(nest.is_one_pi(nest.all()));
        let join2 = fixtures::join2();
        assert!(join2.is_connected(join2.all()));
    }
}
