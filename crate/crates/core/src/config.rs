//! Vertex configurations and seeded rational sampling.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{members, FeynmanGraph, VSet};
use crate::poly::{q, q_to_f64, Q};
use crate::Error;

pub type Point = [Q; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub ids: Vec<String>,
    pub points: Vec<Point>,
}

/// JSON form: vertex id to four rational strings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConfigurationSpec(pub BTreeMap<String, [String; 4]>);

impl Configuration {
    pub fn from_rationals(points: &[Point]) -> Self {
        let ids = (0..points.len()).map(|i| format!("#{i}")).collect();
        Configuration {
            ids,
            points: points.to_vec(),
        }
    }

    pub fn from_ints(points: &[[i64; 4]]) -> Self {
        let pts: Vec<Point> = points.iter().map(|p| p.map(q)).collect();
        Self::from_rationals(&pts)
    }

    pub fn for_graph(g: &FeynmanGraph, points: Vec<Point>) -> Self {
        Configuration {
            ids: g.ids(g.all()),
            points,
        }
    }

    pub fn to_f64(&self) -> Vec<[f64; 4]> {
        self.points
            .iter()
            .map(|p| [0, 1, 2, 3].map(|mu| q_to_f64(&p[mu])))
            .collect()
    }

    pub fn to_spec(&self) -> ConfigurationSpec {
        ConfigurationSpec(
            self.ids
                .iter()
                .zip(&self.points)
                .map(|(id, p)| (id.clone(), [0, 1, 2, 3].map(|mu| p[mu].to_string())))
                .collect(),
        )
    }

    pub fn from_spec(g: &FeynmanGraph, spec: &ConfigurationSpec) -> Result<Self, Error> {
        let mut points = Vec::with_capacity(g.num_vertices());
        for v in g.vertices() {
            let raw = spec
                .0
                .get(&v.id)
                .ok_or_else(|| Error::Input(format!("configuration lacks vertex '{}'", v.id)))?;
            let mut p: Point = Default::default();
            for mu in 0..4 {
                p[mu] = crate::poly::parse_rational(&raw[mu]).ok_or_else(|| {
                    Error::Input(format!(
                        "bad coordinate '{}' for vertex '{}'",
                        raw[mu], v.id
                    ))
                })?;
            }
            points.push(p);
        }
        if spec.0.len() != g.num_vertices() {
            return Err(Error::Input(
                "configuration names vertices absent from the graph".into(),
            ));
        }
        Ok(Configuration::for_graph(g, points))
    }
}

/// Valence-weighted mean of the vertices of `s` using the edges internal to `s`.
/// Sets without internal edges fall back to the plain mean.
pub fn weighted_center_weights(g: &FeynmanGraph, s: VSet) -> Vec<(usize, Q)> {
    let n_edges = g.num_induced_edges(s);
    if n_edges == 0 {
        let n = s.count_ones() as i64;
        return members(s)
            .map(|v| (v, Q::new(BigInt::one(), BigInt::from(n))))
            .collect();
    }
    let denom = BigInt::from(2 * n_edges);
    members(s)
        .map(|v| {
            (
                v,
                Q::new(BigInt::from(g.internal_valence(s, v)), denom.clone()),
            )
        })
        .filter(|(_, w)| !w.is_zero())
        .collect()
}

pub fn center_at(weights: &[(usize, Q)], pts: &[Point]) -> Point {
    let mut out: Point = Default::default();
    for (v, w) in weights {
        for mu in 0..4 {
            out[mu] += w * &pts[*v][mu];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundingBox {
    pub half_width: i64,
    pub max_denominator: i64,
}

impl Default for BoundingBox {
    fn default() -> Self {
        BoundingBox {
            half_width: 4,
            max_denominator: 64,
        }
    }
}

const MAX_ATTEMPTS: usize = 10_000;

/// Draw `n` configurations with small-denominator rational coordinates.
/// A draw is rejected when two distinct weighted centers of vertex subsets
/// coincide (single vertices included), which keeps every Taylor expansion
/// point off every propagator singularity.
pub fn random_configurations(
    g: &FeynmanGraph,
    seed: u64,
    n: usize,
    bbox: &BoundingBox,
) -> Result<Vec<Configuration>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets: BTreeSet<Vec<(usize, Q)>> = (1..=g.all())
        .map(|s| weighted_center_weights(g, s))
        .collect();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::Sampling(format!(
                "no admissible configuration after {MAX_ATTEMPTS} draws"
            )));
        }
        let points: Vec<Point> = (0..g.num_vertices())
            .map(|_| {
                let mut p: Point = Default::default();
                for c in p.iter_mut() {
                    let d = rng.random_range(1..=bbox.max_denominator);
                    let k = rng.random_range(-bbox.half_width * d..=bbox.half_width * d);
                    *c = Q::new(BigInt::from(k), BigInt::from(d));
                }
                p
            })
            .collect();
        let mut seen: BTreeSet<Point> = BTreeSet::new();
        if subsets.iter().all(|w| seen.insert(center_at(w, &points))) {
            out.push(Configuration::for_graph(g, points));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn seeded_sampling_is_reproducible() {
        let g = fixtures::join2();
        let a = random_configurations(&g, 7, 5, &BoundingBox::default()).unwrap();
        let b = random_configurations(&g, 7, 5, &BoundingBox::default()).unwrap();
        assert_eq!(a, b);
        let c = random_configurations(&g, 8, 5, &BoundingBox::default()).unwrap();
        assert_ne!(a, c);
        for cfg in &a {
            for p in &cfg.points {
                for x in p {
                    assert!(x.denom() <= &BigInt::from(64));
                    assert!(num_traits::Signed::abs(x) <= q(4));
                }
            }
        }
    }

    #[test]
    fn fish_samples_are_off_diagonal() {
        let g = fixtures::fish();
        for c in random_configurations(&g, 1, 50, &BoundingBox::default()).unwrap() {
            assert_ne!(c.points[0], c.points[1]);
        }
    }

    #[test]
    fn nest_center_weights() {
        let g = fixtures::nest();
        let w = weighted_center_weights(&g, g.all());
        assert_eq!(
            w,
            vec![
                (0, Q::new(3.into(), 8.into())),
                (1, Q::new(3.into(), 8.into())),
                (2, q(1) / q(4))
            ]
        );
    }

    #[test]
    fn spec_round_trip() {
        let g = fixtures::nest();
        let c = random_configurations(&g, 3, 1, &BoundingBox::default())
            .unwrap()
            .remove(0);
        let back = Configuration::from_spec(&g, &c.to_spec()).unwrap();
        assert_eq!(back, c);
    }
}
