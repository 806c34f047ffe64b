//! Exact configuration-space BPHZ renormalization on small Feynman multigraphs.
//!
//! Weights are rational functions of the vertex positions in flat Euclidean
//! four-space, so every forest-formula identity can be checked as an equality
//! of arbitrary-precision rationals at sampled configurations.

pub mod coincidence;
pub mod config;
pub mod field_equation;
pub mod fixtures;
pub mod forest;
pub mod graph;
pub mod poly;
pub mod power_counting;
pub mod series;
pub mod subtraction;
pub mod weight;
pub mod zimmermann;

pub use config::{random_configurations, BoundingBox, Configuration, Point};
pub use graph::{FeynmanGraph, FullVertexPart, GraphError, GraphSpec, MapKind, VSet, VertexMap};
pub use poly::{Poly, Q};
pub use weight::{edge_weight, graph_weight, Weight, WeightError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Sampling(String),
    #[error("{0}")]
    Precondition(String),
}
