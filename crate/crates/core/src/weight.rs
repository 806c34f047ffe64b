//! Exact rational weights `P / prod_D sigma_D^k` in the flat Euclidean picture.
//!
//! A denominator factor is keyed by a linear form `D` over vertices; its value
//! is `sigma_D(x) = sum_mu (sum_v d_v x_v^mu)^2`. Forms are normalized so the
//! leading coefficient is 1, which keeps keys canonical under substitution.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::config::{Configuration, Point};
use crate::graph::{Edge, FeynmanGraph};
use crate::poly::{pow_q, q, q_to_f64, Poly, Q};

pub fn var(v: usize, mu: usize) -> u32 {
    (4 * v + mu) as u32
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SepKey(Vec<(usize, Q)>);

impl SepKey {
    /// Normalize a linear form, returning the key and the scale `lambda`
    /// with `form = lambda * key`. Returns `None` for the zero form.
    pub fn normalize(form: Vec<(usize, Q)>) -> Option<(SepKey, Q)> {
        let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
        for (v, c) in form {
            *acc.entry(v).or_insert_with(Q::zero) += c;
        }
        acc.retain(|_, c| !c.is_zero());
        let lead = acc.values().next()?.clone();
        let key = acc.into_iter().map(|(v, c)| (v, c / &lead)).collect();
        Some((SepKey(key), lead))
    }

    pub fn edge(e: &Edge) -> Option<SepKey> {
        SepKey::normalize(vec![(e.src, q(1)), (e.dst, q(-1))]).map(|(k, _)| k)
    }

    pub fn form(&self) -> &[(usize, Q)] {
        &self.0
    }

    pub fn coeff(&self, v: usize) -> Q {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn linear_poly(&self, mu: usize) -> Poly {
        let coeffs: Vec<(u32, Q)> = self
            .0
            .iter()
            .map(|(v, c)| (var(*v, mu), c.clone()))
            .collect();
        Poly::linear(&coeffs, Q::zero())
    }

    pub fn sigma_poly(&self) -> Poly {
        (0..4).fold(Poly::zero(), |acc, mu| {
            let l = self.linear_poly(mu);
            acc.add(&l.mul(&l))
        })
    }

    pub fn sigma_at(&self, pts: &[Point]) -> Q {
        (0..4)
            .map(|mu| {
                let l: Q = self.0.iter().map(|(v, c)| c * &pts[*v][mu]).sum();
                &l * &l
            })
            .sum()
    }

    pub fn sigma_at_f64(&self, pts: &[[f64; 4]]) -> f64 {
        (0..4)
            .map(|mu| {
                let l: f64 = self.0.iter().map(|(v, c)| q_to_f64(c) * pts[*v][mu]).sum();
                l * l
            })
            .sum()
    }

    pub fn render(&self, ids: &[String]) -> String {
        let mut s = String::from("sigma(");
        for (i, (v, c)) in self.0.iter().enumerate() {
            let name = ids.get(*v).cloned().unwrap_or_else(|| format!("#{v}"));
            let neg = c < &Q::zero();
            if i > 0 {
                s.push_str(if neg { " - " } else { " + " });
            } else if neg {
                s.push('-');
            }
            let a = if neg { -c.clone() } else { c.clone() };
            if !a.is_one() {
                s.push_str(&format!("{a}*"));
            }
            s.push_str(&format!("x_{name}"));
        }
        s.push(')');
        s
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("denominator {factor} vanishes at this configuration")]
    Vanishing { factor: String },
    #[error("substitution makes denominator {factor} identically zero")]
    DegenerateSubstitution { factor: String },
    #[error("self-loop edge {0} has no off-diagonal weight")]
    SelfLoop(String),
}

/// `numerator / prod sigma_D^{k_D}`; kept unreduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    pub numerator: Poly,
    pub denominator: BTreeMap<SepKey, u32>,
}

/// Affine vertex substitution: vertex `v` is replaced by `sum_u c_u x_u`.
pub type VertexSubstitution = BTreeMap<usize, Vec<(usize, Q)>>;

impl Weight {
    pub fn one() -> Self {
        Weight::poly(Poly::one())
    }

    pub fn poly(p: Poly) -> Self {
        Weight {
            numerator: p,
            denominator: BTreeMap::new(),
        }
    }

    pub fn sigma_inverse(key: SepKey, k: u32) -> Self {
        let mut denominator = BTreeMap::new();
        if k > 0 {
            denominator.insert(key, k);
        }
        Weight {
            numerator: Poly::one(),
            denominator,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn multiply(&self, other: &Weight) -> Weight {
        let mut denominator = self.denominator.clone();
        for (k, e) in &other.denominator {
            *denominator.entry(k.clone()).or_insert(0) += e;
        }
        Weight {
            numerator: self.numerator.mul(&other.numerator),
            denominator,
        }
    }

    pub fn scale(&self, s: &Q) -> Weight {
        Weight {
            numerator: self.numerator.scale(s),
            denominator: self.denominator.clone(),
        }
    }

    /// Sum over a common denominator.
    pub fn add(&self, other: &Weight) -> Weight {
        let mut denominator = self.denominator.clone();
        for (k, &e) in &other.denominator {
            let slot = denominator.entry(k.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
        let lift = |w: &Weight| {
            denominator
                .iter()
                .fold(w.numerator.clone(), |acc, (k, &e)| {
                    let have = w.denominator.get(k).copied().unwrap_or(0);
                    if e > have {
                        acc.mul(&k.sigma_poly().pow(e - have))
                    } else {
                        acc
                    }
                })
        };
        let numerator = lift(self).add(&lift(other));
        Weight {
            numerator,
            denominator,
        }
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        self.add(&other.scale(&q(-1)))
    }

    /// Partial derivative with respect to `x_v^mu` by the quotient rule.
    pub fn differentiate(&self, v: usize, mu: usize) -> Weight {
        let x = var(v, mu);
        let touched: Vec<&SepKey> = self
            .denominator
            .keys()
            .filter(|k| !k.coeff(v).is_zero())
            .collect();
        let sigmas: Vec<Poly> = touched.iter().map(|k| k.sigma_poly()).collect();
        let all_sigma = sigmas.iter().fold(Poly::one(), |acc, s| acc.mul(s));
        let mut numerator = self.numerator.derivative(x).mul(&all_sigma);
        for (i, key) in touched.iter().enumerate() {
            let k = self.denominator[*key];
            let others = sigmas
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(Poly::one(), |acc, (_, s)| acc.mul(s));
            let dsigma = key.linear_poly(mu).scale(&(key.coeff(v) * q(2)));
            let term = self
                .numerator
                .mul(&dsigma)
                .mul(&others)
                .scale(&q(-(k as i64)));
            numerator = numerator.add(&term);
        }
        let mut denominator = self.denominator.clone();
        for key in touched {
            *denominator.get_mut(key).unwrap() += 1;
        }
        Weight {
            numerator,
            denominator,
        }
    }

    /// Simultaneous affine substitution of vertex positions.
    pub fn substitute_vertices(&self, map: &VertexSubstitution) -> Result<Weight, WeightError> {
        if map.is_empty() {
            return Ok(self.clone());
        }
        let mut var_map = BTreeMap::new();
        for (&v, combo) in map {
            for mu in 0..4 {
                let coeffs: Vec<(u32, Q)> = combo
                    .iter()
                    .map(|(u, c)| (var(*u, mu), c.clone()))
                    .collect();
                var_map.insert(var(v, mu), Poly::linear(&coeffs, Q::zero()));
            }
        }
        let mut numerator = self.numerator.substitute(&var_map);
        let mut denominator: BTreeMap<SepKey, u32> = BTreeMap::new();
        for (key, &k) in &self.denominator {
            let mut form = Vec::new();
            for (v, c) in key.form() {
                match map.get(v) {
                    Some(combo) => form.extend(combo.iter().map(|(u, d)| (*u, c * d))),
                    None => form.push((*v, c.clone())),
                }
            }
            let (new_key, lambda) =
                SepKey::normalize(form).ok_or_else(|| WeightError::DegenerateSubstitution {
                    factor: key.render(&[]),
                })?;
            // sigma_{lambda K} = lambda^2 sigma_K
            numerator = numerator.scale(&pow_q(&lambda, 2 * k).recip());
            *denominator.entry(new_key).or_insert(0) += k;
        }
        Ok(Weight {
            numerator,
            denominator,
        })
    }

    pub fn evaluate(&self, c: &Configuration) -> Result<Q, WeightError> {
        let mut den = Q::one();
        for (key, &k) in &self.denominator {
            let s = key.sigma_at(&c.points);
            if s.is_zero() {
                return Err(WeightError::Vanishing {
                    factor: key.render(&c.ids),
                });
            }
            den *= pow_q(&s, k);
        }
        let num = self
            .numerator
            .eval(|x| c.points[(x / 4) as usize][(x % 4) as usize].clone());
        Ok(num / den)
    }

    pub fn evaluate_float(&self, pts: &[[f64; 4]]) -> f64 {
        let den: f64 = self
            .denominator
            .iter()
            .map(|(key, &k)| key.sigma_at_f64(pts).powi(k as i32))
            .product();
        self.numerator
            .eval_f64(|x| pts[(x / 4) as usize][(x % 4) as usize])
            / den
    }

    /// Vertices whose coordinates the weight depends on syntactically.
    pub fn support(&self) -> std::collections::BTreeSet<usize> {
        let mut out: std::collections::BTreeSet<usize> = self
            .numerator
            .variables()
            .into_iter()
            .map(|x| (x / 4) as usize)
            .collect();
        for key in self.denominator.keys() {
            out.extend(key.form().iter().map(|(v, _)| *v));
        }
        out
    }
}

/// Propagator of one edge: `1/sigma` with every slot derivative taken along
/// the 0-direction at the corresponding endpoint.
pub fn edge_weight(g: &FeynmanGraph, k: usize) -> Result<Weight, WeightError> {
    let e = &g.edges()[k];
    let key = SepKey::edge(e).ok_or_else(|| WeightError::SelfLoop(g.edge_label(k)))?;
    let mut w = Weight::sigma_inverse(key, 1);
    let a = g.vertices()[e.src].monomial.slot_derivs[e.src_slot];
    let b = g.vertices()[e.dst].monomial.slot_derivs[e.dst_slot];
    for _ in 0..a {
        w = w.differentiate(e.src, 0);
    }
    for _ in 0..b {
        w = w.differentiate(e.dst, 0);
    }
    Ok(w)
}

pub fn test_weight(g: &FeynmanGraph, v: usize) -> Weight {
    match &g.vertices()[v].monomial.test_factor {
        Some(p) => Weight::poly(p.clone()),
        None => Weight::one(),
    }
}

/// Product of all edge weights and all vertex test factors.
pub fn graph_weight(g: &FeynmanGraph) -> Result<Weight, WeightError> {
    let mut w = Weight::one();
    for k in 0..g.edges().len() {
        w = w.multiply(&edge_weight(g, k)?);
    }
    for v in 0..g.num_vertices() {
        if g.vertices()[v].monomial.test_factor.is_some() {
            w = w.multiply(&test_weight(g, v));
        }
    }
    Ok(w)
}
