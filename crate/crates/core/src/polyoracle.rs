//! Laurent polynomials, the Kauffman bracket by brute-force state sum, the
//! unnormalized Jones polynomial and the colored Jones polynomial by cabling.
//!
//! This module deliberately shares no smoothing code with `khovanov`: it is the
//! independent side of every Euler-characteristic comparison.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diagram::{cable_with, ColorTuple, DiagramError, FramedLinkDiagram, StrandOrder};
use crate::pairing::k_vectors;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("state space of {required} exceeds the cap {cap}")]
    CapExceeded { required: u128, cap: u128 },
    #[error("half-integer exponent A^{exponent} survives the q substitution")]
    HalfInteger { exponent: i64 },
    #[error("k = {k:?} out of range for colors {n:?}")]
    OutOfRange { n: Vec<u32>, k: Vec<u32> },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    A,
    Q,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::A => "A",
            Variable::Q => "q",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    var: Variable,
    terms: BTreeMap<i64, i64>,
}

impl LaurentPoly {
    pub fn zero(var: Variable) -> Self {
        LaurentPoly {
            var,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(var: Variable) -> Self {
        Self::monomial(var, 0, 1)
    }

    pub fn monomial(var: Variable, exp: i64, coeff: i64) -> Self {
        let mut p = Self::zero(var);
        p.add_term(exp, coeff);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, i64)>>(var: Variable, terms: I) -> Self {
        let mut p = Self::zero(var);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn var(&self) -> Variable {
        self.var
    }

    pub fn terms(&self) -> &BTreeMap<i64, i64> {
        &self.terms
    }

    pub fn coeff(&self, exp: i64) -> i64 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: i64, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let e = self.terms.entry(exp).or_insert(0);
        *e += coeff;
        if *e == 0 {
            self.terms.remove(&exp);
        }
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.var, other.var);
        let mut p = self.clone();
        for (&e, &c) in &other.terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn scale(&self, k: i64) -> LaurentPoly {
        LaurentPoly::from_terms(self.var, self.terms.iter().map(|(&e, &c)| (e, c * k)))
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.var, other.var);
        let mut p = LaurentPoly::zero(self.var);
        for (&e1, &c1) in &self.terms {
            for (&e2, &c2) in &other.terms {
                p.add_term(e1 + e2, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, n: u32) -> LaurentPoly {
        let mut p = LaurentPoly::one(self.var);
        for _ in 0..n {
            p = p.mul(self);
        }
        p
    }

    /// JSON form `{"variable": "q", "terms": {"-1": 1, "1": 1}}`, exponents ascending.
    pub fn to_json(&self) -> serde_json::Value {
        let mut terms = serde_json::Map::new();
        for (&e, &c) in &self.terms {
            terms.insert(e.to_string(), serde_json::Value::from(c));
        }
        serde_json::json!({ "variable": self.var.name(), "terms": terms })
    }
}

/// Highest exponent first, e.g. `q + q^-1`, `-q^9 + q^5 + q^3 + q`.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let v = self.var.name();
        for (i, (&e, &c)) in self.terms.iter().rev().enumerate() {
            let mag = c.unsigned_abs();
            if i == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0 { '-' } else { '+' })?;
            }
            match (e, mag) {
                (0, m) => write!(f, "{m}")?,
                (1, 1) => write!(f, "{v}")?,
                (1, m) => write!(f, "{m}{v}")?,
                (e, 1) => write!(f, "{v}^{e}")?,
                (e, m) => write!(f, "{m}{v}^{e}")?,
            }
        }
        Ok(())
    }
}

pub const DEFAULT_CAP: u128 = 1 << 24;

fn check_cap(required: u128, cap: u128) -> Result<(), OracleError> {
    if required > cap {
        Err(OracleError::CapExceeded { required, cap })
    } else {
        Ok(())
    }
}

/// Number of loops in the smoothing with B-smoothings at the set bits of `word`.
fn loop_count(d: &FramedLinkDiagram, word: u64, parent: &mut Vec<usize>) -> usize {
    let n = d.arcs().len();
    parent.clear();
    parent.extend(0..n);
    fn root(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    let mut loops = n;
    for x in 0..d.crossing_count() {
        let [a, b, c, dd] = d.slot_arcs(x);
        let pairs = if word >> x & 1 == 0 {
            [(a, b), (c, dd)]
        } else {
            [(a, dd), (b, c)]
        };
        for (p, q) in pairs {
            let (rp, rq) = (root(parent, p), root(parent, q));
            if rp != rq {
                parent[rp] = rq;
                loops -= 1;
            }
        }
    }
    loops + d.free_loop_total()
}

/// ⟨D⟩ = Σ_states A^{#A − #B} (−A² − A^{−2})^{#loops}.
pub fn bracket(d: &FramedLinkDiagram, cap: u128) -> Result<LaurentPoly, OracleError> {
    let c = d.crossing_count();
    if c >= 127 {
        return Err(OracleError::CapExceeded {
            required: u128::MAX,
            cap,
        });
    }
    check_cap(1u128 << c, cap)?;
    let max_loops = d.arcs().len() + d.free_loop_total() + 1;
    // tally[r][loops]
    let mut tally = vec![vec![0i64; max_loops + 1]; c + 1];
    let mut parent = Vec::new();
    for word in 0..(1u64 << c) {
        let r = word.count_ones() as usize;
        tally[r][loop_count(d, word, &mut parent)] += 1;
    }
    let delta = LaurentPoly::from_terms(Variable::A, [(2, -1), (-2, -1)]);
    let mut powers = vec![LaurentPoly::one(Variable::A)];
    for k in 1..=max_loops {
        powers.push(powers[k - 1].mul(&delta));
    }
    let mut out = LaurentPoly::zero(Variable::A);
    for (r, row) in tally.iter().enumerate() {
        for (k, &count) in row.iter().enumerate() {
            if count != 0 {
                let shift = c as i64 - 2 * r as i64;
                for (&e, &v) in powers[k].terms() {
                    out.add_term(e + shift, v * count);
                }
            }
        }
    }
    Ok(out)
}

/// Unnormalized Jones polynomial: (−A)^{−3w}⟨D⟩ with A^e ↦ (−1)^{e/2} q^{−e/2}.
pub fn jones(d: &FramedLinkDiagram, cap: u128) -> Result<LaurentPoly, OracleError> {
    let br = bracket(d, cap)?;
    let w = d.writhe();
    let sign = if w % 2 == 0 { 1 } else { -1 };
    let mut out = LaurentPoly::zero(Variable::Q);
    for (&e, &c) in br.terms() {
        let e = e - 3 * w;
        if e % 2 != 0 {
            return Err(OracleError::HalfInteger { exponent: e });
        }
        let half = e / 2;
        let s = if half % 2 == 0 { 1 } else { -1 };
        out.add_term(-half, sign * s * c);
    }
    Ok(out)
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as u64
}

/// Π_i C(n_i − k_i, k_i).
pub fn binom_tuple(n: &ColorTuple, k: &[u32]) -> Result<u64, OracleError> {
    if k.len() != n.0.len() || k.iter().zip(&n.0).any(|(&ki, &ni)| 2 * ki > ni) {
        return Err(OracleError::OutOfRange {
            n: n.0.clone(),
            k: k.to_vec(),
        });
    }
    Ok(n
        .0
        .iter()
        .zip(k)
        .map(|(&ni, &ki)| binomial(u64::from(ni - ki), u64::from(ki)))
        .product())
}

/// J_n = Σ_k (−1)^{|k|} Π C(n_i − k_i, k_i) J(cable(D, n − 2k)).
pub fn colored_jones(
    d: &FramedLinkDiagram,
    n: &ColorTuple,
    cap: u128,
) -> Result<LaurentPoly, OracleError> {
    colored_jones_with(d, n, cap, StrandOrder::Leftmost)
}

pub fn colored_jones_with(
    d: &FramedLinkDiagram,
    n: &ColorTuple,
    cap: u128,
    order: StrandOrder,
) -> Result<LaurentPoly, OracleError> {
    if n.0.len() != d.components() {
        return Err(DiagramError::ColorLength {
            expected: d.components(),
            got: n.0.len(),
        }
        .into());
    }
    let mut out = LaurentPoly::zero(Variable::Q);
    for k in k_vectors(n) {
        let coeff = binom_tuple(n, &k)? as i64;
        let size: u32 = k.iter().sum();
        let reduced = ColorTuple(n.0.iter().zip(&k).map(|(&ni, &ki)| ni - 2 * ki).collect());
        let j = jones(&cable_with(d, &reduced, order)?.diagram, cap)?;
        let sign = if size % 2 == 0 { 1 } else { -1 };
        out = out.add(&j.scale(sign * coeff));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_json() {
        let p = LaurentPoly::from_terms(Variable::Q, [(1, 1), (-1, 1)]);
        assert_eq!(p.to_string(), "q + q^-1");
        let p = LaurentPoly::from_terms(Variable::Q, [(9, -1), (0, 2), (1, 1)]);
        assert_eq!(p.to_string(), "-q^9 + q + 2");
        assert_eq!(LaurentPoly::zero(Variable::A).to_string(), "0");
        let j = LaurentPoly::from_terms(Variable::Q, [(-1, 1), (1, 1)]).to_json();
        assert_eq!(j.to_string(), r#"{"variable":"q","terms":{"-1":1,"1":1}}"#);
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_tuple(&ColorTuple(vec![2]), &[1]).unwrap(), 1);
        assert_eq!(binom_tuple(&ColorTuple(vec![3]), &[1]).unwrap(), 2);
        assert_eq!(binom_tuple(&ColorTuple(vec![4, 2]), &[1, 1]).unwrap(), 3);
        assert!(binom_tuple(&ColorTuple(vec![3]), &[2]).is_err());
        assert_eq!(binomial(10, 3), 120);
    }

    #[test]
    fn arithmetic() {
        let x = LaurentPoly::from_terms(Variable::Q, [(1, 1), (-1, 1)]);
        let sq = x.pow(2);
        assert_eq!(sq, LaurentPoly::from_terms(Variable::Q, [(2, 1), (0, 2), (-2, 1)]));
        assert!(x.add(&x.scale(-1)).is_zero());
    }
}
