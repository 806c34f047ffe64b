//! Truncated multivariate power series in a handful of formal scalars.
//!
//! Exponent vectors are packed one byte per variable into a `u128`, so at most
//! 16 variables with per-variable caps below 128 are supported. Multiplication
//! drops every term whose exponent exceeds its variable's cap.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::Q;

pub const MAX_VARS: usize = 16;
pub const MAX_CAP: u32 = 127;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps(u128);

impl Caps {
    pub fn new(caps: &[u32]) -> Caps {
        assert!(caps.len() <= MAX_VARS, "too many series variables");
        let mut packed = 0u128;
        for (i, &c) in caps.iter().enumerate() {
            assert!(c <= MAX_CAP, "series cap too large");
            packed |= (c as u128) << (8 * i);
        }
        Caps(packed)
    }

    pub fn cap(&self, var: usize) -> u32 {
        ((self.0 >> (8 * var)) & 0xff) as u32
    }

    fn admits(&self, exps: u128) -> bool {
        let (mut e, mut c) = (exps, self.0);
        while e != 0 {
            if (e & 0xff) > (c & 0xff) {
                return false;
            }
            e >>= 8;
            c >>= 8;
        }
        true
    }

    fn total(&self) -> u32 {
        (0..MAX_VARS).map(|i| self.cap(i)).sum()
    }
}

pub fn exponent(exps: u128, var: usize) -> u32 {
    ((exps >> (8 * var)) & 0xff) as u32
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    caps: Caps,
    terms: BTreeMap<u128, Q>,
}

impl Jet {
    pub fn zero(caps: Caps) -> Jet {
        Jet {
            caps,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(caps: Caps, c: Q) -> Jet {
        let mut j = Jet::zero(caps);
        j.add_term(0, c);
        j
    }

    /// `a + b * s_var`.
    pub fn affine(caps: Caps, a: Q, var: usize, b: Q) -> Jet {
        let mut j = Jet::constant(caps, a);
        if caps.cap(var) > 0 {
            j.add_term(1u128 << (8 * var), b);
        }
        j
    }

    fn add_term(&mut self, exps: u128, c: Q) {
        if c.is_zero() || !self.caps.admits(exps) {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, &Q)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&0).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn add_scalar(&self, c: &Q) -> Jet {
        let mut out = self.clone();
        out.add_term(0, c.clone());
        out
    }

    pub fn scale(&self, s: &Q) -> Jet {
        if s.is_zero() {
            return Jet::zero(self.caps);
        }
        Jet {
            caps: self.caps,
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut out = Jet::zero(self.caps);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Jet {
        let mut base = self.clone();
        let mut acc = Jet::constant(self.caps, Q::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse; `None` when the constant term vanishes.
    pub fn recip(&self) -> Option<Jet> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return None;
        }
        let inv = c0.recip();
        let mut g = self.scale(&inv);
        g.terms.remove(&0);
        if g.is_zero() {
            return Some(Jet::constant(self.caps, inv));
        }
        let neg_g = g.scale(&-Q::one());
        // 1/(1+g) = sum_n (-g)^n; g is nilpotent under the caps.
        let mut acc = Jet::constant(self.caps, Q::one());
        let mut power = Jet::constant(self.caps, Q::one());
        for _ in 0..self.caps.total() {
            power = power.mul(&neg_g);
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        Some(acc.scale(&inv))
    }

    /// Sum of the coefficients whose exponent of each variable lies in its
    /// inclusive window.
    pub fn window_sum(&self, windows: &[(u32, u32)]) -> Q {
        self.terms
            .iter()
            .filter(|(e, _)| {
                windows
                    .iter()
                    .enumerate()
                    .all(|(v, &(lo, hi))| (lo..=hi).contains(&exponent(**e, v)))
            })
            .map(|(_, c)| c.clone())
            .sum()
    }
}
