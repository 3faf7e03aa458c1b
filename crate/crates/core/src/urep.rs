//! Differential polynomials in the jet variables u_k^α (possibly singular in x),
//! the falling-factorial basis, and the bridge φ to q-variables with its inverse.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::coeffring::{Bounds, CoeffSeries};
use crate::error::{Error, Result};
use crate::linalg;
use crate::loopspace::{PhaseFrame, QElement, QMonomial, QVar, TruncationSpec};
use crate::poly::RatPoly;
use crate::scalar::{
    falling, falling_i128, format_rational, gr_real, i_pow, parse_rational, GaussianRational, Rational,
};

/// `u_k^α`: derivative order and 1-based component.
pub type UVar = (u32, u16);

/// `u_{k_1}^{α_1} ⋯ u_{k_n}^{α_n} x^{−xneg}` with sorted variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UMonomial {
    uvars: Vec<UVar>,
    xneg: u32,
}

impl UMonomial {
    pub fn new(mut uvars: Vec<UVar>, xneg: u32) -> Self {
        uvars.sort_unstable();
        UMonomial { uvars, xneg }
    }

    pub fn one() -> Self {
        UMonomial { uvars: Vec::new(), xneg: 0 }
    }

    /// Single-component shorthand: `u_{k_1} ⋯ u_{k_n} x^{−xneg}`.
    pub fn scalar(ks: &[u32], xneg: u32) -> Self {
        UMonomial::new(ks.iter().map(|&k| (k, 1)).collect(), xneg)
    }

    pub fn uvars(&self) -> &[UVar] {
        &self.uvars
    }

    pub fn xneg(&self) -> u32 {
        self.xneg
    }

    pub fn degree(&self) -> usize {
        self.uvars.len()
    }

    pub fn is_singular(&self) -> bool {
        self.xneg > 0
    }

    /// Total derivative-plus-pole order `Σk + j`.
    pub fn order(&self) -> u32 {
        self.uvars.iter().map(|v| v.0).sum::<u32>() + self.xneg
    }

    pub fn mul(&self, o: &UMonomial) -> UMonomial {
        let mut v = self.uvars.clone();
        v.extend_from_slice(&o.uvars);
        UMonomial::new(v, self.xneg + o.xneg)
    }

    pub fn count(&self, v: UVar) -> usize {
        self.uvars.iter().filter(|&&w| w == v).count()
    }

    pub fn distinct_vars(&self) -> Vec<UVar> {
        let mut vs = self.uvars.clone();
        vs.dedup();
        vs
    }

    /// `∂/∂v` of the monomial: multiplicity and the monomial with one `v` removed.
    pub fn remove_one(&self, v: UVar) -> Option<(usize, UMonomial)> {
        let k = self.count(v);
        if k == 0 {
            return None;
        }
        let pos = self.uvars.iter().position(|&w| w == v).unwrap();
        let mut uvars = self.uvars.clone();
        uvars.remove(pos);
        Some((k, UMonomial { uvars, xneg: self.xneg }))
    }

    pub fn replace_one(&self, from: UVar, to: UVar) -> UMonomial {
        let pos = self.uvars.iter().position(|&w| w == from).expect("variable present");
        let mut uvars = self.uvars.clone();
        uvars[pos] = to;
        UMonomial::new(uvars, self.xneg)
    }

    pub fn with_xneg(&self, xneg: u32) -> UMonomial {
        UMonomial { uvars: self.uvars.clone(), xneg }
    }

    /// Product of factorials of variable multiplicities.
    pub fn symmetry_factor(&self) -> BigInt {
        let mut out = BigInt::one();
        let mut i = 0;
        while i < self.uvars.len() {
            let j = (i..self.uvars.len()).find(|&j| self.uvars[j] != self.uvars[i]).unwrap_or(self.uvars.len());
            out *= crate::scalar::factorial((j - i) as u64);
            i = j;
        }
        out
    }
}

impl fmt::Display for UMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for v in self.distinct_vars() {
            let name = if v.1 == 1 { format!("u{}", v.0) } else { format!("u{}_{}", v.0, v.1) };
            match self.count(v) {
                1 => parts.push(name),
                k => parts.push(format!("{name}^{k}")),
            }
        }
        let mut s = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
        match self.xneg {
            0 => {}
            1 => s += "/x",
            j => s += &format!("/x^{j}"),
        }
        write!(f, "{s}")
    }
}

/// A (singular) differential polynomial with coefficients in ℚ(i)[ε, ħ].
#[derive(Clone, PartialEq, Eq)]
pub struct UPolynomial {
    frame: PhaseFrame,
    bounds: Bounds,
    terms: BTreeMap<UMonomial, CoeffSeries>,
}

impl UPolynomial {
    pub fn zero(frame: PhaseFrame, bounds: Bounds) -> Self {
        UPolynomial { frame, bounds, terms: BTreeMap::new() }
    }

    pub fn scalar_zero(bounds: Bounds) -> Self {
        Self::zero(PhaseFrame::trivial(), bounds)
    }

    /// Single-component polynomial from `(k-list, xneg, coefficient, ε-power, ħ-power)` rows.
    pub fn from_scalar_terms(rows: &[(&[u32], u32, GaussianRational, u32, u32)], bounds: Bounds) -> Self {
        let mut p = Self::scalar_zero(bounds);
        for (ks, j, c, e, h) in rows {
            p.add_scalar_term(UMonomial::scalar(ks, *j), c.clone(), *e, *h);
        }
        p
    }

    pub fn from_monomial(m: UMonomial, bounds: Bounds) -> Self {
        let mut p = UPolynomial::scalar_zero(bounds);
        p.add_term(m, &CoeffSeries::one(bounds));
        p
    }

    pub fn frame(&self) -> &PhaseFrame {
        &self.frame
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn terms(&self) -> &BTreeMap<UMonomial, CoeffSeries> {
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

    pub fn coeff(&self, m: &UMonomial) -> CoeffSeries {
        self.terms.get(m).cloned().unwrap_or_else(|| CoeffSeries::zero(self.bounds))
    }

    pub fn add_term(&mut self, m: UMonomial, c: &CoeffSeries) {
        if c.is_zero() {
            return;
        }
        let bounds = self.bounds;
        let slot = self.terms.entry(m.clone()).or_insert_with(|| CoeffSeries::zero(bounds));
        slot.add_assign_ref(&c.truncate(bounds));
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add_scalar_term(&mut self, m: UMonomial, c: GaussianRational, e: u32, h: u32) {
        let s = CoeffSeries::monomial(c, e, h, self.bounds);
        self.add_term(m, &s);
    }

    pub fn add(&self, o: &UPolynomial) -> UPolynomial {
        let mut out = self.clone();
        out.add_assign(o);
        out
    }

    pub fn add_assign(&mut self, o: &UPolynomial) {
        self.bounds = self.bounds.meet(&o.bounds);
        let b = self.bounds;
        self.terms = std::mem::take(&mut self.terms)
            .into_iter()
            .map(|(m, c)| (m, c.truncate(b)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn sub(&self, o: &UPolynomial) -> UPolynomial {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> UPolynomial {
        self.scale(&-GaussianRational::one())
    }

    pub fn scale(&self, c: &GaussianRational) -> UPolynomial {
        self.map_coeffs(|s| s.scale(c))
    }

    pub fn scale_series(&self, c: &CoeffSeries) -> UPolynomial {
        self.map_coeffs(|s| s * c)
    }

    /// Multiplication by `ε^e ħ^h`.
    pub fn shift(&self, e: u32, h: u32) -> UPolynomial {
        self.map_coeffs(|s| s.shift(e, h))
    }

    pub fn map_coeffs(&self, f: impl Fn(&CoeffSeries) -> CoeffSeries) -> UPolynomial {
        let mut out = UPolynomial::zero(self.frame.clone(), self.bounds);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    pub fn with_bounds(&self, bounds: Bounds) -> UPolynomial {
        let mut out = UPolynomial::zero(self.frame.clone(), bounds);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &c.with_bounds(bounds));
        }
        out
    }

    pub fn mul(&self, o: &UPolynomial) -> UPolynomial {
        let mut out = UPolynomial::zero(self.frame.clone(), self.bounds.meet(&o.bounds));
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }

    /// `∂/∂u_k^α`.
    pub fn partial(&self, v: UVar) -> UPolynomial {
        let mut out = UPolynomial::zero(self.frame.clone(), self.bounds);
        for (m, c) in &self.terms {
            if let Some((k, rest)) = m.remove_one(v) {
                out.add_term(rest, &c.scale(&gr_real(Rational::from_integer(BigInt::from(k)))));
            }
        }
        out
    }

    /// Variables occurring in some monomial, with their maximal multiplicity.
    pub fn variables(&self) -> BTreeMap<UVar, usize> {
        let mut out = BTreeMap::new();
        for m in self.terms.keys() {
            for v in m.distinct_vars() {
                let k = m.count(v);
                let slot = out.entry(v).or_insert(0);
                *slot = (*slot).max(k);
            }
        }
        out
    }

    pub fn is_nonsingular(&self) -> bool {
        self.terms.keys().all(|m| !m.is_singular())
    }

    /// Degree of `mon · ε^e ħ^h`: `Σk + j − e − 2h`.
    pub fn term_degree(m: &UMonomial, e: u32, h: u32) -> i64 {
        m.order() as i64 - e as i64 - 2 * h as i64
    }

    /// All degrees present.
    pub fn degrees(&self) -> BTreeSet<i64> {
        self.terms
            .iter()
            .flat_map(|(m, c)| c.terms().keys().map(move |&(e, h)| Self::term_degree(m, e, h)))
            .collect()
    }

    pub fn extract_degree(&self, d: i64) -> UPolynomial {
        self.filter_terms(|m, e, h| Self::term_degree(m, e, h) == d)
    }

    /// The `ε^e ħ^h` slice as a polynomial with trivial bounds.
    pub fn slice(&self, e: u32, h: u32) -> UPolynomial {
        let mut out = UPolynomial::zero(self.frame.clone(), Bounds::exact());
        for (m, c) in &self.terms {
            out.add_scalar_term(m.clone(), c.get(e, h), 0, 0);
        }
        out
    }

    pub fn filter_terms(&self, keep: impl Fn(&UMonomial, u32, u32) -> bool) -> UPolynomial {
        let mut out = UPolynomial::zero(self.frame.clone(), self.bounds);
        for (m, c) in &self.terms {
            let kept = CoeffSeries::from_terms(
                c.terms().iter().filter(|(&(e, h), _)| keep(m, e, h)).map(|(k, v)| (*k, v.clone())),
                c.bounds(),
            );
            out.add_term(m.clone(), &kept);
        }
        out
    }

    /// Evaluates at `u_k^α = values[(k, α)]` (absent variables are zero); requires no poles.
    pub fn evaluate(&self, values: &BTreeMap<UVar, CoeffSeries>) -> Result<CoeffSeries> {
        let mut acc = CoeffSeries::zero(self.bounds);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for v in &m.uvars {
                match values.get(v) {
                    Some(x) => t = &t * x,
                    None => {
                        t = CoeffSeries::zero(self.bounds);
                        break;
                    }
                }
            }
            if t.is_zero() {
                continue;
            }
            if m.is_singular() {
                return Err(Error::Invalid(format!("cannot evaluate the singular monomial {m} at x = 0")));
            }
            acc.add_assign_ref(&t);
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "terms": self.terms.iter().map(|(m, c)| json!({
                "u": m.uvars.iter().map(|(k, a)| json!([k, a])).collect::<Vec<_>>(),
                "xneg": m.xneg,
                "display": m.to_string(),
                "coeff": c.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Debug for UPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for UPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("[{c}]·{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Stirling numbers of the second kind `S(n, k)`.
pub fn stirling2(n: u32, k: u32) -> BigInt {
    let mut row = vec![BigInt::one()];
    for i in 1..=n as usize {
        let mut next = vec![BigInt::zero(); i + 1];
        for j in 1..=i {
            let prev = if j < row.len() { row[j].clone() } else { BigInt::zero() };
            next[j] = BigInt::from(j) * prev + row[j - 1].clone();
        }
        row = next;
    }
    row.get(k as usize).cloned().unwrap_or_else(BigInt::zero)
}

/// Signed Stirling numbers of the first kind `s(n, k)`.
pub fn stirling1(n: u32, k: u32) -> BigInt {
    let mut row = vec![BigInt::one()];
    for i in 1..=n as usize {
        let mut next = vec![BigInt::zero(); i + 1];
        for j in 1..=i {
            let prev = if j < row.len() { row[j].clone() } else { BigInt::zero() };
            next[j] = row[j - 1].clone() - BigInt::from(i - 1) * prev;
        }
        row = next;
    }
    row.get(k as usize).cloned().unwrap_or_else(BigInt::zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    MonomialToFactorial,
    FactorialToMonomial,
}

/// Basis change between ordinary monomials and falling factorials; exponent
/// vectors are read in the source basis and written in the target basis.
pub fn stirling_convert(p: &RatPoly, direction: Basis) -> RatPoly {
    let table = |a: u32, b: u32| match direction {
        Basis::MonomialToFactorial => stirling2(a, b),
        Basis::FactorialToMonomial => stirling1(a, b),
    };
    let n = p.nvars();
    let mut out = RatPoly::zero(n);
    for (e, c) in p.terms() {
        let mut partial: Vec<(Vec<u32>, BigInt)> = vec![(Vec::new(), BigInt::one())];
        for &k in e {
            let mut next = Vec::new();
            for (pre, w) in &partial {
                for j in 0..=k {
                    let s = table(k, j);
                    if s.is_zero() {
                        continue;
                    }
                    let mut v = pre.clone();
                    v.push(j);
                    next.push((v, w * s));
                }
            }
            partial = next;
        }
        for (v, w) in partial {
            out.add_term(v, c * Rational::from_integer(w));
        }
    }
    out
}

/// Polynomial stored in the falling-factorial basis `m_1^{\underline{s_1}} ⋯`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorialPolynomial {
    nvars: usize,
    coeffs: BTreeMap<Vec<u32>, Rational>,
}

impl FactorialPolynomial {
    pub fn zero(nvars: usize) -> Self {
        FactorialPolynomial { nvars, coeffs: BTreeMap::new() }
    }

    pub fn from_monomial(p: &RatPoly) -> Self {
        let f = stirling_convert(p, Basis::MonomialToFactorial);
        FactorialPolynomial { nvars: p.nvars(), coeffs: f.terms().clone() }
    }

    pub fn from_coeffs(nvars: usize, coeffs: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut out = Self::zero(nvars);
        for (s, c) in coeffs {
            assert_eq!(s.len(), nvars);
            if c.is_zero() {
                continue;
            }
            let slot = out.coeffs.entry(s.clone()).or_insert_with(Rational::zero);
            *slot += c;
            if slot.is_zero() {
                out.coeffs.remove(&s);
            }
        }
        out
    }

    pub fn to_monomial(&self) -> RatPoly {
        let mut p = RatPoly::zero(self.nvars);
        for (s, c) in &self.coeffs {
            p.add_term(s.clone(), c.clone());
        }
        stirling_convert(&p, Basis::FactorialToMonomial)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn coeffs(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, s: &[u32]) -> Rational {
        self.coeffs.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|s| s.iter().sum()).max()
    }

    pub fn is_homogeneous(&self, degree: u32) -> bool {
        self.coeffs.keys().all(|s| s.iter().sum::<u32>() == degree)
    }

    pub fn evaluate(&self, point: &[i64]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rational::zero();
        for (s, c) in &self.coeffs {
            let w: BigInt = point.iter().zip(s).map(|(&m, &k)| falling(m, k)).product();
            acc += c * Rational::from_integer(w);
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nvars": self.nvars,
            "basis": "falling",
            "coeffs": self.coeffs.iter().map(|(s, c)| json!({"s": s, "c": format_rational(c)})).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let nvars = v.get("nvars").and_then(Value::as_u64).ok_or_else(|| Error::Invalid("nvars missing".into()))?
            as usize;
        let basis = v.get("basis").and_then(Value::as_str).unwrap_or("falling");
        let mut rows = Vec::new();
        for t in v.get("coeffs").and_then(Value::as_array).into_iter().flatten() {
            let s: Vec<u32> = t
                .get("s")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid("coefficient exponent missing".into()))?
                .iter()
                .map(|x| x.as_u64().map(|k| k as u32).ok_or_else(|| Error::Invalid("bad exponent".into())))
                .collect::<Result<_>>()?;
            if s.len() != nvars {
                return Err(Error::Invalid("exponent length differs from nvars".into()));
            }
            let c = parse_rational(t.get("c").and_then(Value::as_str).unwrap_or(""))?;
            rows.push((s, c));
        }
        match basis {
            "falling" => Ok(Self::from_coeffs(nvars, rows)),
            "monomial" => {
                let mut p = RatPoly::zero(nvars);
                for (s, c) in rows {
                    p.add_term(s, c);
                }
                Ok(Self::from_monomial(&p))
            }
            other => Err(Error::Invalid(format!("unknown polynomial basis {other:?}"))),
        }
    }
}

fn odometer(n: usize, lo: i64, hi: i64, mut f: impl FnMut(&[i64])) {
    if n == 0 {
        f(&[]);
        return;
    }
    if lo > hi {
        return;
    }
    let mut t = vec![lo; n];
    loop {
        f(&t);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if t[i] < hi {
                t[i] += 1;
                for x in t.iter_mut().skip(i + 1) {
                    *x = lo;
                }
                break;
            }
        }
    }
}

fn falling_product(ms: &[i64], ks: &[u32]) -> BigInt {
    let mut acc: i128 = 1;
    for (&m, &k) in ms.iter().zip(ks) {
        let f = falling_i128(m, k);
        match acc.checked_mul(f) {
            Some(v) => acc = v,
            None => return ms.iter().zip(ks).map(|(&m, &k)| falling(m, k)).product(),
        }
    }
    BigInt::from(acc)
}

/// Image of a single u-monomial: `i^σ Σ_{m ∈ window^n} Π m_i^{\underline{k_i}} q_{m_1}⋯q_{m_n} (ix)^{Σm−σ}`
/// with `σ = Σk + j`, as integer weights per q-monomial.
fn phi_monomial(mon: &UMonomial, trunc: &TruncationSpec, indices: &[i64]) -> (HashMap<QMonomial, BigInt>, u64) {
    let n = mon.uvars.len();
    let ks: Vec<u32> = mon.uvars.iter().map(|v| v.0).collect();
    let sigma = mon.order() as i64;
    let mut out: HashMap<QMonomial, BigInt> = HashMap::new();
    let mut drops = 0u64;
    let last = indices.len() as i64 - 1;
    let mut ms = vec![0i64; n];
    odometer(n, 0, last, |pos| {
        for (m, &i) in ms.iter_mut().zip(pos) {
            *m = indices[i as usize];
        }
        let ms = &ms[..];
        if ms.iter().zip(&ks).any(|(&m, &k)| m >= 0 && m < k as i64) {
            return;
        }
        let w = falling_product(ms, &ks);
        let qvars: Vec<QVar> = ms.iter().zip(&mon.uvars).map(|(&m, v)| (m, v.1)).collect();
        let q = QMonomial::new(qvars, ms.iter().sum::<i64>() - sigma);
        if !trunc.admits(&q) {
            drops += 1;
            return;
        }
        *out.entry(q).or_insert_with(BigInt::zero) += w;
    });
    (out, drops)
}

/// The bridge φ: substitutes `u_s^α = Σ_m m^{\underline{s}} q_m^α i^m x^{m−s}` and
/// `x^{−j} = i^j (ix)^{−j}`, restricted to the window. Index tuples that are
/// inside the m-window but exceed `n_max` or the (ix)-range are counted as drops.
pub fn phi_to_q(p: &UPolynomial, trunc: &TruncationSpec) -> QElement {
    phi_to_q_filtered(p, trunc, |_| true)
}

/// As [`phi_to_q`], keeping only q-monomials accepted by `keep`.
pub fn phi_to_q_filtered(p: &UPolynomial, trunc: &TruncationSpec, keep: impl Fn(&QMonomial) -> bool) -> QElement {
    let indices: Vec<i64> = (trunc.m_min..=trunc.m_max).collect();
    phi_on_indices(p, trunc, &indices, keep)
}

/// As [`phi_to_q`], with every q-index drawn from `support` (intersected with the window).
pub fn phi_to_q_support(p: &UPolynomial, trunc: &TruncationSpec, support: &[i64]) -> QElement {
    let mut indices: Vec<i64> = support.iter().copied().filter(|&m| trunc.contains_index(m)).collect();
    indices.sort_unstable();
    indices.dedup();
    phi_on_indices(p, trunc, &indices, |_| true)
}

fn phi_on_indices(p: &UPolynomial, trunc: &TruncationSpec, indices: &[i64], keep: impl Fn(&QMonomial) -> bool) -> QElement {
    let trunc = TruncationSpec { bounds: trunc.bounds.meet(&p.bounds), ..*trunc };
    let mut out = QElement::zero(p.frame.clone(), trunc, false);
    for (mon, c) in &p.terms {
        if mon.uvars.len() > trunc.n_max as usize {
            out.note_drops(1);
            continue;
        }
        let phase = c.scale(&i_pow(mon.order() as i64));
        let (weights, drops) = phi_monomial(mon, &trunc, indices);
        out.note_drops(drops);
        let mut sorted: Vec<_> = weights.into_iter().filter(|(q, w)| !w.is_zero() && keep(q)).collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (q, w) in sorted {
            out.add_term(q, &phase.scale(&gr_real(Rational::from_integer(w))));
        }
    }
    out
}

/// Coefficient of the sorted q-monomial `q` in the image of the u-monomial with slots `slots`.
fn bridge_weight(slots: &[UVar], q: &[QVar]) -> BigInt {
    let n = slots.len();
    let mut total = BigInt::zero();
    let mut used = vec![false; n];
    let mut assign = vec![0i64; n];
    fn rec(
        i: usize,
        slots: &[UVar],
        q: &[QVar],
        used: &mut [bool],
        assign: &mut [i64],
        total: &mut BigInt,
    ) {
        if i == slots.len() {
            let ks: Vec<u32> = slots.iter().map(|s| s.0).collect();
            *total += falling_product(assign, &ks);
            return;
        }
        let mut tried: Vec<QVar> = Vec::new();
        for j in 0..q.len() {
            if used[j] || q[j].1 != slots[i].1 || tried.contains(&q[j]) {
                continue;
            }
            tried.push(q[j]);
            used[j] = true;
            assign[i] = q[j].0;
            rec(i + 1, slots, q, used, assign, total);
            used[j] = false;
        }
    }
    rec(0, slots, q, &mut used, &mut assign, &mut total);
    total
}

/// Multisets of `n` nonnegative integers with sum ≤ `max_sum`, sorted ascending.
fn bounded_multisets(n: usize, max_sum: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, min: u32, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        let mut k = min;
        while k as u64 * n as u64 <= left as u64 {
            cur.push(k);
            rec(n - 1, k, left - k, cur, out);
            cur.pop();
            k += 1;
        }
    }
    let mut out = Vec::new();
    rec(n, 0, max_sum, &mut Vec::new(), &mut out);
    out
}

/// Candidate u-monomials with component multiset `alphas` and total order exactly `sigma`.
fn candidate_monomials(alphas: &[u16], sigma: u32) -> Vec<UMonomial> {
    let mut groups: Vec<(u16, usize)> = Vec::new();
    for &a in alphas {
        match groups.last_mut() {
            Some((b, k)) if *b == a => *k += 1,
            _ => groups.push((a, 1)),
        }
    }
    let mut partial: Vec<(Vec<UVar>, u32)> = vec![(Vec::new(), 0)];
    for (a, k) in groups {
        let mut next = Vec::new();
        for (vars, used) in &partial {
            for ms in bounded_multisets(k, sigma - used) {
                let s: u32 = ms.iter().sum();
                let mut v = vars.clone();
                v.extend(ms.iter().map(|&d| (d, a)));
                next.push((v, used + s));
            }
        }
        partial = next;
    }
    partial.into_iter().map(|(v, used)| UMonomial::new(v, sigma - used)).collect()
}

/// Sorted multisets of q-variables with the given components and indices in `[lo, hi]`.
fn lattice(alphas: &[u16], lo: i64, hi: i64) -> Vec<Vec<QVar>> {
    let mut partial: Vec<Vec<QVar>> = vec![Vec::new()];
    let mut i = 0;
    while i < alphas.len() {
        let a = alphas[i];
        let j = (i..alphas.len()).find(|&j| alphas[j] != a).unwrap_or(alphas.len());
        let k = j - i;
        let mut next = Vec::new();
        for pre in &partial {
            let mut cur = vec![lo; k];
            loop {
                let mut v = pre.clone();
                v.extend(cur.iter().map(|&m| (m, a)));
                next.push(v);
                let mut p = k;
                let mut advanced = false;
                while p > 0 {
                    p -= 1;
                    if cur[p] < hi {
                        cur[p] += 1;
                        for x in p + 1..k {
                            cur[x] = cur[p];
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
        partial = next;
        i = j;
    }
    partial.into_iter().map(|mut v| {
        v.sort_unstable();
        v
    }).collect()
}

/// Reconstructs the u-side preimage of a non-integrated q-element by fitting
/// falling-factorial coefficients on the window lattice, then validating on all
/// lattice points of each slice.
pub fn recognize_u(f: &QElement) -> Result<UPolynomial> {
    if f.is_integrated() {
        return Err(Error::Invalid("recognize_u needs an element of B, not B̄".into()));
    }
    let trunc = *f.trunc();
    let bounds = trunc.bounds;
    // slice key: component multiset, ε-power, ħ-power, total order σ
    let mut slices: BTreeSet<(Vec<u16>, u32, u32, i64)> = BTreeSet::new();
    for (q, c) in f.terms() {
        let alphas: Vec<u16> = q.qvars().iter().map(|v| v.1).collect();
        let mut alphas_sorted = alphas.clone();
        alphas_sorted.sort_unstable();
        let sigma = q.m_sum() - q.xpow();
        for &(e, h) in c.terms().keys() {
            slices.insert((alphas_sorted.clone(), e, h, sigma));
        }
    }
    let mut out = UPolynomial::zero(f.frame().clone(), bounds);
    for (alphas, e, h, sigma) in slices {
        if sigma < 0 {
            return Err(Error::NotInImage(format!(
                "positive power of x in a slice with {} q-variables",
                alphas.len()
            )));
        }
        let phase_inv = i_pow(-sigma);
        let basis = candidate_monomials(&alphas, sigma as u32);
        let points: Vec<Vec<QVar>> = lattice(&alphas, trunc.m_min, trunc.m_max)
            .into_iter()
            .filter(|q| {
                let x = q.iter().map(|v| v.0).sum::<i64>() - sigma;
                trunc.xpow_min <= x && x <= trunc.xpow_max
            })
            .collect();
        let mut rows: Vec<Vec<GaussianRational>> = Vec::with_capacity(points.len());
        let mut rhs: Vec<GaussianRational> = Vec::with_capacity(points.len());
        for q in &points {
            let mon = QMonomial::new(q.clone(), q.iter().map(|v| v.0).sum::<i64>() - sigma);
            rows.push(
                basis
                    .iter()
                    .map(|b| gr_real(Rational::from_integer(bridge_weight(b.uvars(), q))))
                    .collect(),
            );
            rhs.push(&f.coeff(&mon).get(e, h) * &phase_inv);
        }
        let sol = linalg::solve(&rows, &rhs, basis.len()).ok_or_else(|| {
            Error::NotInImage(format!(
                "no polynomial of degree ≤ {sigma} fits the slice (components {alphas:?}, ε^{e} ħ^{h})"
            ))
        })?;
        if sol.rank < basis.len() {
            return Err(Error::WindowTooSmall(format!(
                "slice (components {alphas:?}, order {sigma}) needs a wider m-window"
            )));
        }
        for (b, x) in basis.into_iter().zip(sol.x) {
            out.add_scalar_term(b, x, e, h);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{gr, gr_int, int, rat};

    fn single(ks: &[u32], j: u32) -> UPolynomial {
        UPolynomial::from_scalar_terms(&[(ks, j, gr_int(1), 0, 0)], Bounds::exact())
    }

    fn win(m: i64, n: u32) -> TruncationSpec {
        TruncationSpec::symmetric(m, n, Bounds::exact())
    }

    #[test]
    fn stirling_examples() {
        let m = RatPoly::var(1, 0);
        let f = stirling_convert(&m.pow(2), Basis::MonomialToFactorial);
        assert_eq!(f.coeff(&[2]), int(1));
        assert_eq!(f.coeff(&[1]), int(1));
        let mut fall3 = RatPoly::zero(1);
        fall3.add_term(vec![3], int(1));
        let back = stirling_convert(&fall3, Basis::FactorialToMonomial);
        let want = &(&m.pow(3) - &m.pow(2).scale(&int(3))) + &m.scale(&int(2));
        assert_eq!(back, want);
        let one = RatPoly::one(1);
        assert_eq!(stirling_convert(&one, Basis::MonomialToFactorial), one);
    }

    #[test]
    fn phi_examples() {
        let t = win(3, 2);
        let u1 = phi_to_q(&single(&[1], 0), &t);
        for m in -3..=3i64 {
            let c = u1.coeff(&QMonomial::scalar(&[m], m - 1)).get(0, 0);
            assert_eq!(c, gr(int(0), int(m)), "coefficient of q[{m}] in u1");
        }
        let u00 = phi_to_q(&single(&[0, 0], 0), &t);
        assert_eq!(u00.coeff(&QMonomial::scalar(&[1, 2], 3)).get(0, 0), gr_int(2));
        assert_eq!(u00.coeff(&QMonomial::scalar(&[2, 2], 4)).get(0, 0), gr_int(1));
        let ux = phi_to_q(&single(&[0], 1), &t);
        assert_eq!(ux.coeff(&QMonomial::scalar(&[2], 1)).get(0, 0), gr(int(0), int(1)));
    }

    #[test]
    fn recognize_round_trips() {
        let t = win(6, 3);
        for p in [single(&[0, 2], 0), single(&[1, 1], 1), single(&[0, 0, 3], 2)] {
            assert_eq!(recognize_u(&phi_to_q(&p, &t)).unwrap(), p);
        }
        let mixed = UPolynomial::from_scalar_terms(
            &[(&[0, 2], 0, gr(rat(1, 24), int(0)), 2, 0), (&[0, 1], 1, gr(rat(1, 24), int(0)), 2, 0), (&[0, 0], 2, gr(rat(-1, 48), int(3)), 2, 0)],
            Bounds::new(2, 0),
        );
        let t2 = TruncationSpec::symmetric(6, 3, Bounds::new(2, 0));
        assert_eq!(recognize_u(&phi_to_q(&mixed, &t2)).unwrap(), mixed);
    }

    #[test]
    fn lone_delta_is_not_in_image() {
        let t = win(6, 2);
        let mut f = QElement::zero(PhaseFrame::trivial(), t, false);
        f.add_scalar_term(QMonomial::scalar(&[1], 0), gr_int(1), 0, 0);
        assert!(matches!(recognize_u(&f), Err(Error::NotInImage(_))));
    }

    #[test]
    fn factorial_polynomial_evaluation_agrees_with_monomial_form() {
        let m1 = RatPoly::var(2, 0);
        let m2 = RatPoly::var(2, 1);
        let p = (&m1.pow(2) + &m2.pow(2)).scale(&rat(1, 24));
        let f = FactorialPolynomial::from_monomial(&p);
        assert_eq!(f.coeff(&[2, 0]), rat(1, 24));
        assert_eq!(f.coeff(&[1, 0]), rat(1, 24));
        for a in -4..5 {
            for b in -4..5 {
                assert_eq!(f.evaluate(&[a, b]), p.eval_int(&[a, b]));
            }
        }
        assert_eq!(f.to_monomial(), p);
        assert_eq!(FactorialPolynomial::from_json(&f.to_json()).unwrap(), f);
    }
}
