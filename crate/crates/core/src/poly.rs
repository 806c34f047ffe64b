//! Sparse multivariate polynomials with arbitrary-precision rational coefficients.
//!
//! Variables are plain `u32` indices. The graph layer maps coordinate `x_v^mu`
//! to index `4 * v + mu`; nothing in this module depends on that convention.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// A monomial as sorted `(variable, exponent)` pairs with positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono(Vec<(u32, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(v: u32) -> Self {
        Mono(vec![(v, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += e,
                _ => out.push((v, e)),
            }
        }
        Mono(out)
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: u32) -> u32 {
        self.0
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// Lower the exponent of `v` by one, returning the old exponent.
    fn lowered(&self, v: u32) -> Option<(u32, Mono)> {
        let idx = self.0.binary_search_by_key(&v, |&(w, _)| w).ok()?;
        let e = self.0[idx].1;
        let mut out = self.0.clone();
        if e == 1 {
            out.remove(idx);
        } else {
            out[idx].1 -= 1;
        }
        Some((e, Mono(out)))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        p.add_term(Mono::one(), c);
        p
    }

    pub fn var(v: u32) -> Self {
        let mut p = Poly::zero();
        p.add_term(Mono::var(v), Q::one());
        p
    }

    /// `sum_i c_i x_{v_i}` plus a constant.
    pub fn linear(coeffs: &[(u32, Q)], constant: Q) -> Self {
        let mut p = Poly::constant(constant);
        for (v, c) in coeffs {
            p.add_term(Mono::var(*v), c.clone());
        }
        p
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Mono::one()).cloned(),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    pub fn variables(&self) -> Vec<u32> {
        let mut vs: Vec<u32> = self
            .terms
            .keys()
            .flat_map(|m| m.pairs().iter().map(|&(v, _)| v))
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
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

    pub fn derivative(&self, v: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some((e, lowered)) = m.lowered(v) {
                out.add_term(lowered, c * Q::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Simultaneous substitution: every variable in `map` is replaced by its image.
    pub fn substitute(&self, map: &BTreeMap<u32, Poly>) -> Poly {
        let mut power_cache: BTreeMap<(u32, u32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut factor = Poly::constant(c.clone());
            for &(v, e) in m.pairs() {
                match map.get(&v) {
                    Some(img) => {
                        let pw = power_cache
                            .entry((v, e))
                            .or_insert_with(|| img.pow(e))
                            .clone();
                        factor = factor.mul(&pw);
                    }
                    None => kept.push((v, e)),
                }
            }
            let kept = Poly {
                terms: std::iter::once((Mono(kept), Q::one())).collect(),
            };
            for (fm, fc) in factor.mul(&kept).terms {
                out.add_term(fm, fc);
            }
        }
        out
    }

    /// Rename variables; the map must be injective on the variables present.
    pub fn remap(&self, f: impl Fn(u32) -> u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let pairs = m.pairs().iter().map(|&(v, e)| (f(v), e)).collect();
            out.add_term(Mono::from_pairs(pairs), c.clone());
        }
        out
    }

    pub fn eval(&self, point: impl Fn(u32) -> Q) -> Q {
        let mut cache: BTreeMap<u32, Q> = BTreeMap::new();
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.pairs() {
                let x = cache.entry(v).or_insert_with(|| point(v));
                t *= pow_q(x, e);
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: impl Fn(u32) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = q_to_f64(c);
                for &(v, e) in m.pairs() {
                    t *= point(v).powi(e as i32);
                }
                t
            })
            .sum()
    }

    pub fn fmt_with(&self, name: &dyn Fn(u32) -> String) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let is_one = a.is_one();
            if !is_one || m.pairs().is_empty() {
                if a.is_integer() {
                    s.push_str(&a.to_string());
                } else {
                    s.push_str(&format!("({a})"));
                }
            }
            for (k, &(v, e)) in m.pairs().iter().enumerate() {
                if k > 0 || !is_one {
                    s.push('*');
                }
                s.push_str(&name(v));
                if e > 1 {
                    s.push_str(&format!("^{e}"));
                }
            }
        }
        s
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&|v| format!("x{v}")))
    }
}

pub fn pow_q(x: &Q, e: u32) -> Q {
    num_traits::pow::pow(x.clone(), e as usize)
}

pub fn q_to_f64(x: &Q) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both parts down so the quotient survives conversion.
            let nb = x.numer().bits() as i64;
            let db = x.denom().bits() as i64;
            let shift_n = (nb - 900).max(0) as usize;
            let shift_d = (db - 900).max(0) as usize;
            let n = (x.numer() >> shift_n).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> shift_d).to_f64().unwrap_or(1.0);
            n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("polynomial syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parse the `x_<vertex>_<mu>` polynomial syntax. `resolve` maps a vertex id
/// and component to a variable index or rejects it with a message.
pub fn parse_poly(
    src: &str,
    resolve: &dyn Fn(&str, u32) -> Result<u32, String>,
) -> Result<Poly, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        resolve,
    };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    resolve: &'a dyn Fn(&str, u32) -> Result<u32, String>,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                b'/' => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    match d.as_constant() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                        _ => {
                            return Err(ParseError {
                                pos: at,
                                msg: "division only by a nonzero constant".into(),
                            })
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected a non-negative integer exponent"));
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.variable(),
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Poly, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value = parse_decimal(text).ok_or(ParseError {
            pos: start,
            msg: format!("malformed number '{text}'"),
        })?;
        Ok(Poly::constant(value))
    }

    fn variable(&mut self) -> Result<Poly, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let bad = |msg: String| ParseError { pos: start, msg };
        let rest = name
            .strip_prefix("x_")
            .ok_or_else(|| bad(format!("unknown symbol '{name}'")))?;
        let split = rest
            .rfind('_')
            .ok_or_else(|| bad(format!("variable '{name}' lacks a component index")))?;
        let (vid, mu) = (&rest[..split], &rest[split + 1..]);
        let mu: u32 = mu
            .parse()
            .map_err(|_| bad(format!("bad component index in '{name}'")))?;
        if mu > 3 || vid.is_empty() {
            return Err(bad(format!("bad variable '{name}'")));
        }
        let v = (self.resolve)(vid, mu).map_err(bad)?;
        Ok(Poly::var(v))
    }
}

/// Parse `123`, `1.25` or `a/b` style rationals exactly.
pub fn parse_rational(text: &str) -> Option<Q> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_decimal_signed(n)?;
        let d = parse_decimal_signed(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    parse_decimal_signed(text)
}

fn parse_decimal_signed(text: &str) -> Option<Q> {
    let text = text.trim();
    match text.strip_prefix('-') {
        Some(rest) => parse_decimal(rest).map(|x| -x),
        None => parse_decimal(text),
    }
}

fn parse_decimal(text: &str) -> Option<Q> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow::pow(BigInt::from(10), frac_part.len());
    Some(Q::new(n, d))
}
