//! Wave-operator fusion: the propagator on a wave slot collapses to a delta
//! function, which merges its two endpoints into one vertex.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::coincidence::{plan_coincidence, verify_decomposition, DecompositionRow};
use crate::config::Configuration;
use crate::graph::{bit, FeynmanGraph, GraphSpec, MapKind, VertexMap};
use crate::power_counting::{Degrees, SubtractionAssignment};
use crate::Error;

/// Derivative units that mark a slot as carrying the wave operator.
pub const WAVE_DERIVATIVES: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeLedger {
    pub wave_vertex_delta: i64,
    pub partner_delta: i64,
    /// `delta + delta_j - 4`.
    pub fused_delta: i64,
    /// Dimension of the merged monomial, recounted from its slots.
    pub fused_dimension: i64,
}

#[derive(Debug, Clone)]
pub struct FusionRecord {
    pub source_graph: FeynmanGraph,
    pub wave_vertex: usize,
    pub wave_slot: usize,
    pub wave_edge: usize,
    pub partner: usize,
    pub fused_graph: FeynmanGraph,
    pub map: VertexMap,
    pub degree_ledger: DegreeLedger,
    /// Edges that became self-loops at the fused vertex.
    pub tadpoles: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionReport {
    pub wave_vertex: String,
    pub wave_slot: usize,
    pub wave_edge: String,
    pub partner: String,
    pub fused_vertex: String,
    pub fused_graph: GraphSpec,
    pub map_kind: MapKind,
    pub degree_ledger: DegreeLedger,
    pub tadpole: bool,
}

impl FusionRecord {
    pub fn report(&self) -> FusionReport {
        let g = &self.source_graph;
        FusionReport {
            wave_vertex: g.vertices()[self.wave_vertex].id.clone(),
            wave_slot: self.wave_slot,
            wave_edge: g.edge_label(self.wave_edge),
            partner: g.vertices()[self.partner].id.clone(),
            fused_vertex: self.fused_graph.vertices()[self.map.merged].id.clone(),
            fused_graph: self.fused_graph.to_spec(),
            map_kind: self.map.kind,
            degree_ledger: self.degree_ledger.clone(),
            tadpole: !self.tadpoles.is_empty(),
        }
    }
}

/// The edge on a wave slot and the vertex at its other end.
fn wave_edge(g: &FeynmanGraph, v0: usize, slot: usize) -> Result<(usize, usize, usize), Error> {
    let vertex = &g.vertices()[v0];
    let derivs = *vertex
        .monomial
        .slot_derivs
        .get(slot)
        .ok_or_else(|| Error::Input(format!("vertex '{}' has no slot {slot}", vertex.id)))?;
    if derivs < WAVE_DERIVATIVES {
        return Err(Error::Precondition(format!(
            "slot {slot} at '{}' carries {derivs} derivatives, not a wave operator",
            vertex.id
        )));
    }
    let k = g.edge_at(v0, slot).ok_or_else(|| {
        Error::Precondition(format!(
            "wave slot {slot} at '{}' is external; the term contributes no fusion",
            vertex.id
        ))
    })?;
    let e = &g.edges()[k];
    if e.is_self_loop() {
        return Err(Error::Precondition(format!(
            "wave edge {} is a self-loop",
            g.edge_label(k)
        )));
    }
    let (partner, partner_slot) = if e.src == v0 && e.src_slot == slot {
        (e.dst, e.dst_slot)
    } else {
        (e.src, e.src_slot)
    };
    Ok((k, partner, partner_slot))
}

pub fn fuse_wave_edge(g: &FeynmanGraph, v0_id: &str, slot: usize) -> Result<FusionRecord, Error> {
    let v0 = g
        .vertex_index(v0_id)
        .ok_or_else(|| Error::Input(format!("unknown vertex '{v0_id}'")))?;
    let (k, partner, partner_slot) = wave_edge(g, v0, slot)?;
    let d = Degrees::resolve(g, &SubtractionAssignment::default())?;
    let wave_vertex_delta = d.vertex[v0];
    let partner_delta = d.vertex[partner];
    let fused_delta = wave_vertex_delta + partner_delta - 4;
    let drop_edges = BTreeSet::from([k]);
    let drop_slots = BTreeSet::from([(v0, slot), (partner, partner_slot)]);
    let s = bit(v0) | bit(partner);
    let (fused_graph, map) = g.merge(
        s,
        "fused",
        &drop_edges,
        &drop_slots,
        MapKind::Fusion,
        Some(fused_delta),
    );
    let fused_dimension = fused_graph.vertices()[map.merged].monomial.dim();
    let tadpoles = fused_graph.self_loops();
    Ok(FusionRecord {
        source_graph: g.clone(),
        wave_vertex: v0,
        wave_slot: slot,
        wave_edge: k,
        partner,
        fused_graph,
        map,
        degree_ledger: DegreeLedger {
            wave_vertex_delta,
            partner_delta,
            fused_delta,
            fused_dimension,
        },
        tadpoles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WaveSplit {
    /// Degree of the normal product with the wave term.
    pub a: i64,
    /// Degree of the normal product with the mass term.
    pub b: i64,
    /// Exclusive lower and inclusive upper bound of `|E| + |D| + |alpha|`.
    pub window: (i64, i64),
}

pub fn wave_degree_split(phi_dim: i64) -> Result<WaveSplit, Error> {
    if phi_dim < 0 {
        return Err(Error::Precondition(format!(
            "monomial dimension {phi_dim} is negative"
        )));
    }
    Ok(WaveSplit {
        a: phi_dim + 3,
        b: phi_dim + 1,
        window: (phi_dim + 1, phi_dim + 3),
    })
}

/// The source graph without the wave edge and the two slots it occupied.
pub fn remove_wave_edge(g: &FeynmanGraph, v0: usize, slot: usize) -> Result<FeynmanGraph, Error> {
    let (k, partner, partner_slot) = wave_edge(g, v0, slot)?;
    let mut spec = g.to_spec();
    spec.edges.remove(k);
    let ids = [
        (g.vertices()[v0].id.clone(), slot),
        (g.vertices()[partner].id.clone(), partner_slot),
    ];
    for (id, dropped) in &ids {
        let vs = spec
            .vertices
            .iter_mut()
            .find(|v| &v.id == id)
            .expect("vertex from the same graph");
        vs.fields -= 1;
        if let Some(d) = vs.slot_derivs.as_mut() {
            d.remove(*dropped);
        }
        vs.delta = None;
        for e in &mut spec.edges {
            if &e.src == id && e.src_slot > *dropped {
                e.src_slot -= 1;
            }
            if &e.dst == id && e.dst_slot > *dropped {
                e.dst_slot -= 1;
            }
        }
    }
    spec.limit_set = Some(ids.iter().map(|(id, _)| id.clone()).collect());
    Ok(FeynmanGraph::from_spec(&spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldEquationReport {
    pub fusion: FusionReport,
    pub rows: Vec<DecompositionRow>,
    pub overlap_zero: bool,
    pub diagonal_zero: bool,
}

/// Checks the two-vertex decomposition on the graph left after removing the
/// wave edge, with the wave vertex and its partner as the limit set. Joining
/// them reproduces the fused graph.
pub fn field_eq_decomposition(
    g: &FeynmanGraph,
    v0_id: &str,
    slot: usize,
    a: &SubtractionAssignment,
    configs: &[Configuration],
) -> Result<FieldEquationReport, Error> {
    let record = fuse_wave_edge(g, v0_id, slot)?;
    if !record.tadpoles.is_empty() {
        return Err(Error::Precondition(format!(
            "fusing along {} leaves a self-loop; the fused contribution vanishes",
            g.edge_label(record.wave_edge)
        )));
    }
    let reduced = remove_wave_edge(g, record.wave_vertex, slot)?;
    let plan = plan_coincidence(&reduced, a)?;
    let configs: Vec<Configuration> = configs
        .iter()
        .map(|c| Configuration::for_graph(&reduced, c.points.clone()))
        .collect();
    let rows = verify_decomposition(&plan, &configs)?;
    Ok(FieldEquationReport {
        fusion: record.report(),
        overlap_zero: rows.iter().all(|r| r.overlap == "0"),
        diagonal_zero: rows.iter().all(|r| r.diagonal == "0"),
        rows,
    })
}
