//! Sparse multivariate polynomials over an exact field.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};


use crate::scalar::{Field, Rational};

#[derive(Clone, PartialEq, Eq)]
pub struct MPoly<C> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

pub type RatPoly = MPoly<Rational>;

impl<C: Field> MPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, C::one());
        p
    }

    /// `c + Σ coeffs[i]·x_i`.
    pub fn affine(c: C, coeffs: &[C]) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c);
        for (i, a) in coeffs.iter().enumerate() {
            p = &p + &Self::var(n, i).scale(a);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, C> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: C) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(slot) => {
                *slot = slot.clone() + c;
                if slot.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.clone() * c.clone())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.nvars), |acc, _| &acc * self)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<u32>() == degree)
    }

    pub fn eval(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.nvars);
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Substitutes the last `values.len()` variables by constants.
    pub fn specialize_tail(&self, values: &[C]) -> Self {
        let keep = self.nvars - values.len();
        let mut out = Self::zero(keep);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in values.iter().zip(&e[keep..]) {
                for _ in 0..k {
                    t = t * x.clone();
                }
            }
            out.add_term(e[..keep].to_vec(), t);
        }
        out
    }

    /// Substitutes every variable by a polynomial in `nvars` new variables.
    pub fn compose(&self, images: &[MPoly<C>], nvars: usize) -> Self {
        assert_eq!(images.len(), self.nvars);
        let mut powers: Vec<Vec<MPoly<C>>> = images.iter().map(|p| vec![MPoly::one(nvars), p.clone()]).collect();
        let mut out = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][k as usize];
            }
            out = &out + &t;
        }
        out
    }

    pub fn map_coeffs<D: Field>(&self, f: impl Fn(&C) -> D) -> MPoly<D> {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }
}

impl RatPoly {
    pub fn eval_int(&self, point: &[i64]) -> Rational {
        let pt: Vec<Rational> = point.iter().map(|&m| crate::scalar::int(m)).collect();
        self.eval(&pt)
    }
}

impl<C: Field> Add for &MPoly<C> {
    type Output = MPoly<C>;
    fn add(self, rhs: &MPoly<C>) -> MPoly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Field> Neg for &MPoly<C> {
    type Output = MPoly<C>;
    fn neg(self) -> MPoly<C> {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }
}

impl<C: Field> Sub for &MPoly<C> {
    type Output = MPoly<C>;
    fn sub(self, rhs: &MPoly<C>) -> MPoly<C> {
        self + &(-rhs)
    }
}

impl<C: Field> Mul for &MPoly<C> {
    type Output = MPoly<C>;
    fn mul(self, rhs: &MPoly<C>) -> MPoly<C> {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Field + fmt::Display> fmt::Debug for MPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<C: Field + fmt::Display> fmt::Display for MPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let vars: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("m{}", i + 1) } else { format!("m{}^{k}", i + 1) })
                    .collect();
                if vars.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
