//! Gaussian rationals and truncated bigraded series in ε and ħ.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{format_gaussian, format_rational, gr, parse_rational, GaussianRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrOp {
    Add,
    Mul,
    Neg,
    Inv,
}

/// Field arithmetic in ℚ(i). Unary operations ignore `b`.
pub fn gr_arith(a: &GaussianRational, b: &GaussianRational, op: GrOp) -> Result<GaussianRational> {
    Ok(match op {
        GrOp::Add => a + b,
        GrOp::Mul => a * b,
        GrOp::Neg => -a.clone(),
        GrOp::Inv => gr_inv(a)?,
    })
}

pub fn gr_inv(a: &GaussianRational) -> Result<GaussianRational> {
    let norm = a.norm_sqr();
    if norm.is_zero() {
        return Err(Error::Domain("inverse of zero".into()));
    }
    Ok(gr(&a.re / &norm, -&a.im / &norm))
}

pub fn gr_to_json(z: &GaussianRational) -> Value {
    json!({ "re": format_rational(&z.re), "im": format_rational(&z.im) })
}

pub fn gr_from_json(v: &Value) -> Result<GaussianRational> {
    let field = |k: &str| -> Result<_> {
        match v.get(k) {
            Some(Value::String(s)) => parse_rational(s),
            None => Ok(Zero::zero()),
            _ => Err(Error::Invalid(format!("gaussian rational field {k} must be a string"))),
        }
    };
    Ok(gr(field("re")?, field("im")?))
}

/// Truncation window of a [`CoeffSeries`]: ε-power ≤ `eps`, ħ-power ≤ `hbar`
/// and `e + 2h ≤ weight`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub eps: u32,
    pub hbar: u32,
    pub weight: u32,
}

impl Bounds {
    pub fn new(eps: u32, hbar: u32) -> Self {
        Bounds { eps, hbar, weight: eps + 2 * hbar }
    }

    pub fn with_weight(eps: u32, hbar: u32, weight: u32) -> Self {
        Bounds { eps, hbar, weight: weight.min(eps + 2 * hbar) }
    }

    /// Everything up to genus `g`: ε^{2l} ħ^{g'-l} with g' ≤ g.
    pub fn genus(g: u32) -> Self {
        Bounds::with_weight(2 * g, g, 2 * g)
    }

    pub fn exact() -> Self {
        Bounds::new(0, 0)
    }

    pub fn meet(&self, other: &Bounds) -> Bounds {
        Bounds::with_weight(
            self.eps.min(other.eps),
            self.hbar.min(other.hbar),
            self.weight.min(other.weight),
        )
    }

    pub fn admits(&self, e: u32, h: u32) -> bool {
        e <= self.eps && h <= self.hbar && e + 2 * h <= self.weight
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct CoeffSeries {
    terms: BTreeMap<(u32, u32), GaussianRational>,
    bounds: Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsOp {
    Add,
    Mul,
}

pub fn cs_arith(a: &CoeffSeries, b: &CoeffSeries, op: CsOp) -> CoeffSeries {
    match op {
        CsOp::Add => a + b,
        CsOp::Mul => a * b,
    }
}

pub fn cs_coeff(a: &CoeffSeries, e: u32, h: u32) -> Result<GaussianRational> {
    a.coeff(e, h)
}

impl CoeffSeries {
    pub fn zero(bounds: Bounds) -> Self {
        CoeffSeries { terms: BTreeMap::new(), bounds }
    }

    pub fn constant(c: GaussianRational, bounds: Bounds) -> Self {
        Self::monomial(c, 0, 0, bounds)
    }

    pub fn one(bounds: Bounds) -> Self {
        Self::constant(GaussianRational::one(), bounds)
    }

    /// `c ε^e ħ^h`, or zero if the monomial falls outside `bounds`.
    pub fn monomial(c: GaussianRational, e: u32, h: u32, bounds: Bounds) -> Self {
        let mut s = Self::zero(bounds);
        s.add_term(e, h, c);
        s
    }

    pub fn from_terms<I>(terms: I, bounds: Bounds) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), GaussianRational)>,
    {
        let mut s = Self::zero(bounds);
        for ((e, h), c) in terms {
            s.add_term(e, h, c);
        }
        s
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn eps_order(&self) -> u32 {
        self.bounds.eps
    }

    pub fn hbar_order(&self) -> u32 {
        self.bounds.hbar
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), GaussianRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Accumulates `c ε^e ħ^h`; out-of-window monomials are discarded.
    pub fn add_term(&mut self, e: u32, h: u32, c: GaussianRational) {
        if !self.bounds.admits(e, h) || c.is_zero() {
            return;
        }
        let slot = self.terms.entry((e, h)).or_insert_with(GaussianRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(e, h));
        }
    }

    pub fn add_assign_ref(&mut self, other: &CoeffSeries) {
        self.bounds = self.bounds.meet(&other.bounds);
        self.terms.retain(|&(e, h), _| self.bounds.admits(e, h));
        for (&(e, h), c) in &other.terms {
            self.add_term(e, h, c.clone());
        }
    }

    pub fn coeff(&self, e: u32, h: u32) -> Result<GaussianRational> {
        if !self.bounds.admits(e, h) {
            return Err(Error::OutOfWindow { e, h });
        }
        Ok(self.get(e, h))
    }

    /// Stored coefficient or zero, without a window check.
    pub fn get(&self, e: u32, h: u32) -> GaussianRational {
        self.terms.get(&(e, h)).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn scale(&self, c: &GaussianRational) -> CoeffSeries {
        if c.is_zero() {
            return CoeffSeries::zero(self.bounds);
        }
        CoeffSeries {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
            bounds: self.bounds,
        }
    }

    /// Multiplication by `ε^de ħ^dh`.
    pub fn shift(&self, de: u32, dh: u32) -> CoeffSeries {
        let mut out = CoeffSeries::zero(self.bounds);
        for (&(e, h), c) in &self.terms {
            out.add_term(e + de, h + dh, c.clone());
        }
        out
    }

    pub fn truncate(&self, bounds: Bounds) -> CoeffSeries {
        let bounds = self.bounds.meet(&bounds);
        CoeffSeries {
            terms: self
                .terms
                .iter()
                .filter(|((e, h), _)| bounds.admits(*e, *h))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            bounds,
        }
    }

    /// Replaces the bounds, possibly enlarging them (terms outside are dropped).
    pub fn with_bounds(&self, bounds: Bounds) -> CoeffSeries {
        CoeffSeries::from_terms(self.terms.iter().map(|(k, v)| (*k, v.clone())), bounds)
    }

    /// Only the `ε^e ħ^h` part.
    pub fn slice(&self, e: u32, h: u32) -> CoeffSeries {
        CoeffSeries::monomial(self.get(e, h), e, h, self.bounds)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "eps_order": self.bounds.eps,
            "hbar_order": self.bounds.hbar,
            "weight": self.bounds.weight,
            "terms": self.terms.iter().map(|(&(e, h), c)| json!({"e": e, "h": h, "c": gr_to_json(c)})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<CoeffSeries> {
        let n = |k: &str| -> Result<u32> {
            v.get(k)
                .and_then(Value::as_u64)
                .map(|x| x as u32)
                .ok_or_else(|| Error::Invalid(format!("series field {k} missing")))
        };
        let (eps, hbar) = (n("eps_order")?, n("hbar_order")?);
        let weight = v.get("weight").and_then(Value::as_u64).map(|w| w as u32).unwrap_or(eps + 2 * hbar);
        let mut s = CoeffSeries::zero(Bounds::with_weight(eps, hbar, weight));
        for t in v.get("terms").and_then(Value::as_array).into_iter().flatten() {
            let e = t.get("e").and_then(Value::as_u64).unwrap_or(0) as u32;
            let h = t.get("h").and_then(Value::as_u64).unwrap_or(0) as u32;
            let c = gr_from_json(t.get("c").unwrap_or(&Value::Null))?;
            if !s.bounds.admits(e, h) {
                return Err(Error::OutOfWindow { e, h });
            }
            s.add_term(e, h, c);
        }
        Ok(s)
    }
}

impl fmt::Debug for CoeffSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CoeffSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(e, h), c)| {
                let mut s = format!("({})", format_gaussian(c));
                if e > 0 {
                    s += &format!("·ε^{e}");
                }
                if h > 0 {
                    s += &format!("·ħ^{h}");
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for &CoeffSeries {
    type Output = CoeffSeries;
    fn add(self, rhs: &CoeffSeries) -> CoeffSeries {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Neg for &CoeffSeries {
    type Output = CoeffSeries;
    fn neg(self) -> CoeffSeries {
        CoeffSeries {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
            bounds: self.bounds,
        }
    }
}

impl Sub for &CoeffSeries {
    type Output = CoeffSeries;
    fn sub(self, rhs: &CoeffSeries) -> CoeffSeries {
        self + &(-rhs)
    }
}

impl Mul for &CoeffSeries {
    type Output = CoeffSeries;
    fn mul(self, rhs: &CoeffSeries) -> CoeffSeries {
        let mut out = CoeffSeries::zero(self.bounds.meet(&rhs.bounds));
        for (&(e1, h1), a) in &self.terms {
            for (&(e2, h2), b) in &rhs.terms {
                out.add_term(e1 + e2, h1 + h2, a * b);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{gr_int, int, rat};

    fn eps_poly(cs: &[i64], eps: u32) -> CoeffSeries {
        CoeffSeries::from_terms(
            cs.iter().enumerate().map(|(k, &c)| ((k as u32, 0), gr_int(c))),
            Bounds::new(eps, 0),
        )
    }

    #[test]
    fn gaussian_examples() {
        let i = gr(int(0), int(1));
        let half = gr(rat(1, 2), int(0));
        assert_eq!(gr_arith(&half, &i, GrOp::Mul).unwrap(), gr(int(0), rat(1, 2)));
        assert_eq!(gr_arith(&i, &i, GrOp::Mul).unwrap(), gr_int(-1));
        let z = gr(rat(3, 4), rat(1, 4));
        let inv = gr_arith(&z, &z, GrOp::Inv).unwrap();
        assert_eq!(inv, gr(rat(6, 5), rat(-2, 5)));
        assert_eq!(&z * &inv, gr_int(1));
        assert!(matches!(gr_inv(&gr_int(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn series_examples() {
        let a = eps_poly(&[1, 1], 2);
        let b = eps_poly(&[1, -1], 2);
        assert_eq!(&a * &b, eps_poly(&[1, 0, -1], 2));
        let h = CoeffSeries::monomial(gr_int(1), 0, 1, Bounds::new(0, 1));
        assert!((&h * &h).is_zero());
        let c = eps_poly(&[1, 1, 1], 2);
        assert_eq!(&c * &a, eps_poly(&[1, 2, 2], 2));
    }

    #[test]
    fn coeff_reads() {
        let b = Bounds::new(2, 1);
        let s = &CoeffSeries::one(b) + &CoeffSeries::monomial(gr_int(3), 2, 1, Bounds::new(2, 1));
        assert_eq!(s.coeff(2, 1).unwrap(), gr_int(3));
        let e = CoeffSeries::monomial(gr_int(1), 1, 0, b);
        assert_eq!(e.coeff(0, 0).unwrap(), gr_int(0));
        let cube = eps_poly(&[0, 0, 0, 1], 2);
        assert!(cube.is_zero());
        assert_eq!(cube.coeff(3, 0), Err(Error::OutOfWindow { e: 3, h: 0 }));
    }

    #[test]
    fn weight_bound_drops_incomplete_terms() {
        let b = Bounds::genus(1);
        let s = CoeffSeries::monomial(gr_int(1), 2, 1, b);
        assert!(s.is_zero());
        assert!(CoeffSeries::monomial(gr_int(1), 0, 1, b).coeff(0, 1).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = CoeffSeries::from_terms(
            [((0, 0), gr(rat(1, 3), rat(-2, 7))), ((2, 1), gr_int(5))],
            Bounds::new(2, 1),
        );
        assert_eq!(CoeffSeries::from_json(&s.to_json()).unwrap(), s);
    }
}
