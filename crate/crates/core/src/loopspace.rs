//! The loop algebra B in q-variables: truncated series in q_m^α and (ix),
//! its integrated image B̄, the degree grading and evaluation.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde_json::{json, Value};

use crate::coeffring::{Bounds, CoeffSeries};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{format_rational, int, parse_rational, GaussianRational, Rational};

/// Phase space `(V, η, 1)` in a chosen basis. Components are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseFrame {
    dim: usize,
    eta: Vec<Vec<Rational>>,
    eta_inv: Vec<Vec<Rational>>,
    unit: Vec<Rational>,
}

impl PhaseFrame {
    pub fn new(eta: Vec<Vec<Rational>>, unit: Vec<Rational>) -> Result<Self> {
        let dim = eta.len();
        if dim == 0 || eta.iter().any(|r| r.len() != dim) || unit.len() != dim {
            return Err(Error::Invalid("eta must be a square matrix matching the unit vector".into()));
        }
        for a in 0..dim {
            for b in 0..dim {
                if eta[a][b] != eta[b][a] {
                    return Err(Error::Invalid("eta must be symmetric".into()));
                }
            }
        }
        let eta_inv = linalg::inverse(&eta).ok_or_else(|| Error::Invalid("eta is degenerate".into()))?;
        Ok(PhaseFrame { dim, eta, eta_inv, unit })
    }

    /// The frame of the trivial CohFT: N = 1, η = [1], unit = [1].
    pub fn trivial() -> Self {
        PhaseFrame { dim: 1, eta: vec![vec![int(1)]], eta_inv: vec![vec![int(1)]], unit: vec![int(1)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eta(&self) -> &[Vec<Rational>] {
        &self.eta
    }

    pub fn eta_inv(&self) -> &[Vec<Rational>] {
        &self.eta_inv
    }

    pub fn unit(&self) -> &[Rational] {
        &self.unit
    }

    /// η^{αβ} for 1-based components.
    pub fn eta_up(&self, a: u16, b: u16) -> &Rational {
        &self.eta_inv[a as usize - 1][b as usize - 1]
    }

    pub fn to_json(&self) -> Value {
        let mat = |m: &[Vec<Rational>]| -> Value {
            m.iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>().into()
        };
        json!({
            "dim": self.dim,
            "eta": mat(&self.eta),
            "unit": self.unit.iter().map(format_rational).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let strs = |v: &Value| -> Result<Vec<Rational>> {
            v.as_array()
                .ok_or_else(|| Error::Invalid("expected an array of rationals".into()))?
                .iter()
                .map(|x| parse_rational(x.as_str().unwrap_or("")))
                .collect()
        };
        let eta = v
            .get("eta")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Invalid("frame.eta missing".into()))?
            .iter()
            .map(strs)
            .collect::<Result<Vec<_>>>()?;
        let unit = strs(v.get("unit").unwrap_or(&Value::Null))?;
        PhaseFrame::new(eta, unit)
    }
}

/// A q-variable `q_m^α`.
pub type QVar = (i64, u16);

/// `q_{m_1}^{α_1} ⋯ q_{m_n}^{α_n} (ix)^{xpow}` with sorted variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QMonomial {
    qvars: Vec<QVar>,
    xpow: i64,
}

impl QMonomial {
    pub fn new(mut qvars: Vec<QVar>, xpow: i64) -> Self {
        qvars.sort_unstable();
        QMonomial { qvars, xpow }
    }

    pub fn one() -> Self {
        QMonomial { qvars: Vec::new(), xpow: 0 }
    }

    /// Single-component shorthand: `q[m_1] ⋯ q[m_n] (ix)^xpow`.
    pub fn scalar(ms: &[i64], xpow: i64) -> Self {
        QMonomial::new(ms.iter().map(|&m| (m, 1)).collect(), xpow)
    }

    pub fn qvars(&self) -> &[QVar] {
        &self.qvars
    }

    pub fn xpow(&self) -> i64 {
        self.xpow
    }

    pub fn degree(&self) -> usize {
        self.qvars.len()
    }

    pub fn m_sum(&self) -> i64 {
        self.qvars.iter().map(|v| v.0).sum()
    }

    pub fn mul(&self, other: &QMonomial) -> QMonomial {
        let mut qvars = self.qvars.clone();
        qvars.extend_from_slice(&other.qvars);
        QMonomial::new(qvars, self.xpow + other.xpow)
    }

    pub fn with_xpow(&self, xpow: i64) -> QMonomial {
        QMonomial { qvars: self.qvars.clone(), xpow }
    }

    pub fn count(&self, v: QVar) -> usize {
        self.qvars.iter().filter(|&&w| w == v).count()
    }

    /// Removes one copy of `v`, returning its multiplicity before removal.
    pub fn remove_one(&self, v: QVar) -> Option<(usize, QMonomial)> {
        let k = self.count(v);
        if k == 0 {
            return None;
        }
        let pos = self.qvars.iter().position(|&w| w == v).unwrap();
        let mut qvars = self.qvars.clone();
        qvars.remove(pos);
        Some((k, QMonomial { qvars, xpow: self.xpow }))
    }

    pub fn distinct_vars(&self) -> Vec<QVar> {
        let mut vs = self.qvars.clone();
        vs.dedup();
        vs
    }
}

impl fmt::Display for QMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, a) in &self.qvars {
            if *a == 1 {
                write!(f, "q[{m}]")?;
            } else {
                write!(f, "q[{m};{a}]")?;
            }
        }
        if self.xpow != 0 || self.qvars.is_empty() {
            write!(f, "(ix)^{}", self.xpow)?;
        }
        Ok(())
    }
}

/// `u`-side degree of `mon · ε^e ħ^h`: `Σm − xpow − e − 2h`.
pub fn md_degree(mon: &QMonomial, e: u32, h: u32) -> i64 {
    mon.m_sum() - mon.xpow - e as i64 - 2 * h as i64
}

/// Finite window in which q-series are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncationSpec {
    pub m_min: i64,
    pub m_max: i64,
    pub n_max: u32,
    pub xpow_min: i64,
    pub xpow_max: i64,
    pub bounds: Bounds,
}

impl TruncationSpec {
    /// Window `m ∈ [−m, m]` with an (ix)-range wide enough for every product of
    /// `n_max` variables and poles up to order `n_max + m`.
    pub fn symmetric(m: i64, n_max: u32, bounds: Bounds) -> Self {
        let reach = (n_max as i64 + 2) * (m + 2) + 8;
        TruncationSpec { m_min: -m, m_max: m, n_max, xpow_min: -reach, xpow_max: reach, bounds }
    }

    pub fn eps_order(&self) -> u32 {
        self.bounds.eps
    }

    pub fn hbar_order(&self) -> u32 {
        self.bounds.hbar
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_min > self.m_max || self.xpow_min > self.xpow_max {
            return Err(Error::Invalid("empty truncation window".into()));
        }
        Ok(())
    }

    pub fn meet(&self, o: &TruncationSpec) -> TruncationSpec {
        TruncationSpec {
            m_min: self.m_min.max(o.m_min),
            m_max: self.m_max.min(o.m_max),
            n_max: self.n_max.min(o.n_max),
            xpow_min: self.xpow_min.max(o.xpow_min),
            xpow_max: self.xpow_max.min(o.xpow_max),
            bounds: self.bounds.meet(&o.bounds),
        }
    }

    /// Doubles the m-window, `n_max` and the (ix)-range.
    pub fn doubled(&self) -> TruncationSpec {
        TruncationSpec {
            m_min: 2 * self.m_min,
            m_max: 2 * self.m_max,
            n_max: 2 * self.n_max,
            xpow_min: 2 * self.xpow_min.min(-1),
            xpow_max: 2 * self.xpow_max.max(1),
            bounds: self.bounds,
        }
    }

    pub fn contains_index(&self, m: i64) -> bool {
        self.m_min <= m && m <= self.m_max
    }

    pub fn admits(&self, mon: &QMonomial) -> bool {
        mon.qvars.len() <= self.n_max as usize
            && mon.qvars.iter().all(|v| self.contains_index(v.0))
            && self.xpow_min <= mon.xpow
            && mon.xpow <= self.xpow_max
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m_min": self.m_min, "m_max": self.m_max, "n_max": self.n_max,
            "xpow_min": self.xpow_min, "xpow_max": self.xpow_max,
            "eps_order": self.bounds.eps, "hbar_order": self.bounds.hbar, "weight": self.bounds.weight,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let i = |k: &str| -> Result<i64> {
            v.get(k).and_then(Value::as_i64).ok_or_else(|| Error::Invalid(format!("trunc.{k} missing")))
        };
        let eps = i("eps_order")? as u32;
        let hbar = i("hbar_order")? as u32;
        let weight = v.get("weight").and_then(Value::as_i64).map(|w| w as u32).unwrap_or(eps + 2 * hbar);
        let t = TruncationSpec {
            m_min: i("m_min")?,
            m_max: i("m_max")?,
            n_max: i("n_max")? as u32,
            xpow_min: i("xpow_min")?,
            xpow_max: i("xpow_max")?,
            bounds: Bounds::with_weight(eps, hbar, weight),
        };
        t.validate()?;
        Ok(t)
    }
}

/// Truncated element of B (or of B̄ when `integrated`).
#[derive(Clone, PartialEq, Eq)]
pub struct QElement {
    frame: PhaseFrame,
    trunc: TruncationSpec,
    terms: BTreeMap<QMonomial, CoeffSeries>,
    integrated: bool,
    drops: u64,
}

impl QElement {
    pub fn zero(frame: PhaseFrame, trunc: TruncationSpec, integrated: bool) -> Self {
        QElement { frame, trunc, terms: BTreeMap::new(), integrated, drops: 0 }
    }

    pub fn frame(&self) -> &PhaseFrame {
        &self.frame
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn terms(&self) -> &BTreeMap<QMonomial, CoeffSeries> {
        &self.terms
    }

    pub fn is_integrated(&self) -> bool {
        self.integrated
    }

    /// Number of monomials discarded because they left the window.
    pub fn drops(&self) -> u64 {
        self.drops
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

    pub fn bounds(&self) -> Bounds {
        self.trunc.bounds
    }

    pub fn coeff(&self, mon: &QMonomial) -> CoeffSeries {
        self.terms.get(mon).cloned().unwrap_or_else(|| CoeffSeries::zero(self.trunc.bounds))
    }

    pub(crate) fn note_drops(&mut self, k: u64) {
        self.drops += k;
    }

    /// Accumulates `c · mon`, counting the term as dropped if `mon` leaves the window.
    pub fn add_term(&mut self, mon: QMonomial, c: &CoeffSeries) {
        if c.is_zero() {
            return;
        }
        if self.integrated && mon.xpow != 0 {
            panic!("integrated elements carry no (ix)-powers");
        }
        if !self.trunc.admits(&mon) {
            self.drops += 1;
            return;
        }
        let bounds = self.trunc.bounds;
        let slot = self.terms.entry(mon.clone()).or_insert_with(|| CoeffSeries::zero(bounds));
        slot.add_assign_ref(&c.truncate(bounds));
        if slot.is_zero() {
            self.terms.remove(&mon);
        }
    }

    pub fn add_scalar_term(&mut self, mon: QMonomial, c: GaussianRational, e: u32, h: u32) {
        let s = CoeffSeries::monomial(c, e, h, self.trunc.bounds);
        self.add_term(mon, &s);
    }

    pub fn from_terms<I>(frame: PhaseFrame, trunc: TruncationSpec, integrated: bool, terms: I) -> Self
    where
        I: IntoIterator<Item = (QMonomial, CoeffSeries)>,
    {
        let mut out = QElement::zero(frame, trunc, integrated);
        for (m, c) in terms {
            out.add_term(m, &c);
        }
        out
    }

    fn check_frame(&self, other: &QElement) -> Result<()> {
        if self.frame != other.frame {
            return Err(Error::FrameMismatch);
        }
        Ok(())
    }

    fn empty_like(&self, other: &QElement, integrated: bool) -> QElement {
        let mut out = QElement::zero(self.frame.clone(), self.trunc.meet(&other.trunc), integrated);
        out.drops = self.drops + other.drops;
        out
    }

    pub fn add(&self, other: &QElement) -> Result<QElement> {
        self.check_frame(other)?;
        if self.integrated != other.integrated {
            return Err(Error::Invalid("cannot add elements of B and B̄".into()));
        }
        let mut out = self.empty_like(other, self.integrated);
        for (m, c) in self.terms.iter().chain(&other.terms) {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &QElement) -> Result<QElement> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QElement {
        self.scale(&-GaussianRational::one())
    }

    pub fn scale(&self, c: &GaussianRational) -> QElement {
        self.map_coeffs(|s| s.scale(c))
    }

    pub fn scale_series(&self, c: &CoeffSeries) -> QElement {
        self.map_coeffs(|s| s * c)
    }

    pub fn map_coeffs(&self, f: impl Fn(&CoeffSeries) -> CoeffSeries) -> QElement {
        let mut out = QElement::zero(self.frame.clone(), self.trunc, self.integrated);
        out.drops = self.drops;
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    /// Same terms in a (possibly different) window; leaving terms are counted as drops.
    pub fn rewindow(&self, trunc: TruncationSpec) -> QElement {
        let mut out = QElement::zero(self.frame.clone(), trunc, self.integrated);
        out.drops = self.drops;
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn with_integrated_flag(&self, integrated: bool) -> QElement {
        let mut out = self.clone();
        if integrated {
            assert!(out.terms.keys().all(|m| m.xpow == 0));
        }
        out.integrated = integrated;
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "frame": self.frame.to_json(),
            "trunc": self.trunc.to_json(),
            "integrated": self.integrated,
            "drops": self.drops,
            "terms": self.terms.iter().map(|(m, c)| json!({
                "q": m.qvars.iter().map(|(k, a)| json!([k, a])).collect::<Vec<_>>(),
                "xpow": m.xpow,
                "coeff": c.to_json(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<QElement> {
        let frame = PhaseFrame::from_json(v.get("frame").unwrap_or(&Value::Null))?;
        let trunc = TruncationSpec::from_json(v.get("trunc").unwrap_or(&Value::Null))?;
        let integrated = v.get("integrated").and_then(Value::as_bool).unwrap_or(false);
        let mut out = QElement::zero(frame, trunc, integrated);
        for t in v.get("terms").and_then(Value::as_array).into_iter().flatten() {
            let qvars = t
                .get("q")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid("term.q missing".into()))?
                .iter()
                .map(|p| {
                    let m = p.get(0).and_then(Value::as_i64);
                    let a = p.get(1).and_then(Value::as_u64);
                    match (m, a) {
                        (Some(m), Some(a)) if a >= 1 => Ok((m, a as u16)),
                        _ => Err(Error::Invalid("q entries are [m, alpha] pairs".into())),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let xpow = t.get("xpow").and_then(Value::as_i64).unwrap_or(0);
            let c = CoeffSeries::from_json(t.get("coeff").unwrap_or(&Value::Null))?;
            let mon = QMonomial::new(qvars, xpow);
            if integrated && xpow != 0 {
                return Err(Error::Invalid("integrated element with nonzero xpow".into()));
            }
            if !trunc.admits(&mon) {
                return Err(Error::Invalid(format!("monomial {mon} outside the declared window")));
            }
            out.add_term(mon, &c);
        }
        Ok(out)
    }
}

impl fmt::Debug for QElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("[{c}]·{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Product in B (or in B̄ when both factors are integrated).
pub fn q_mul(a: &QElement, b: &QElement) -> Result<QElement> {
    a.check_frame(b)?;
    if a.integrated != b.integrated {
        return Err(Error::Invalid("q_mul needs both factors in B or both in B̄".into()));
    }
    let mut out = a.empty_like(b, a.integrated);
    for (m1, c1) in &a.terms {
        for (m2, c2) in &b.terms {
            out.add_term(m1.mul(m2), &(c1 * c2));
        }
    }
    Ok(out)
}

/// `∫ f dx = Coef_{(ix)^{-1}} (f − f|_{q=0})`.
pub fn integrate_dx(f: &QElement) -> Result<QElement> {
    if f.integrated {
        return Err(Error::Invalid("element is already integrated".into()));
    }
    let mut out = QElement::zero(f.frame.clone(), f.trunc, true);
    out.drops = f.drops;
    for (m, c) in &f.terms {
        if m.xpow == -1 && !m.qvars.is_empty() {
            out.add_term(m.with_xpow(0), c);
        }
    }
    Ok(out)
}

/// Keeps exactly the terms of degree `d`.
pub fn extract_degree(f: &QElement, d: i64) -> QElement {
    let mut out = QElement::zero(f.frame.clone(), f.trunc, f.integrated);
    out.drops = f.drops;
    for (m, c) in &f.terms {
        let kept = CoeffSeries::from_terms(
            c.terms().iter().filter(|(&(e, h), _)| md_degree(m, e, h) == d).map(|(k, v)| (*k, v.clone())),
            c.bounds(),
        );
        out.add_term(m.clone(), &kept);
    }
    out
}

/// All degrees occurring in `f`.
pub fn degrees(f: &QElement) -> Vec<i64> {
    let mut ds: Vec<i64> =
        f.terms.iter().flat_map(|(m, c)| c.terms().keys().map(move |&(e, h)| md_degree(m, e, h))).collect();
    ds.sort_unstable();
    ds.dedup();
    ds
}

/// Values of the q-variables; keys absent from the map are zero.
pub type Assignment = BTreeMap<QVar, CoeffSeries>;

/// Substitutes the q-variables. The result maps each surviving (ix)-exponent to its
/// coefficient; with `at_x_zero` only the exponent 0 is kept.
pub fn evaluate(f: &QElement, assign: &Assignment, at_x_zero: bool) -> Result<BTreeMap<i64, CoeffSeries>> {
    if let Some(((m, a), _)) = assign.iter().find(|((m, _), v)| !f.trunc.contains_index(*m) && !v.is_zero()) {
        return Err(Error::Invalid(format!(
            "assignment of q[{m};{a}] lies outside the window [{}, {}]",
            f.trunc.m_min, f.trunc.m_max
        )));
    }
    let bounds = f.trunc.bounds;
    let mut out: BTreeMap<i64, CoeffSeries> = BTreeMap::new();
    for (m, c) in &f.terms {
        if at_x_zero && m.xpow != 0 {
            continue;
        }
        let mut val = c.clone();
        for v in &m.qvars {
            match assign.get(v) {
                Some(x) => val = &val * x,
                None => {
                    val = CoeffSeries::zero(bounds);
                    break;
                }
            }
        }
        if val.is_zero() {
            continue;
        }
        let slot = out.entry(m.xpow).or_insert_with(|| CoeffSeries::zero(bounds));
        slot.add_assign_ref(&val);
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

pub fn evaluate_at_x_zero(f: &QElement, assign: &Assignment) -> Result<CoeffSeries> {
    Ok(evaluate(f, assign, true)?.remove(&0).unwrap_or_else(|| CoeffSeries::zero(f.trunc.bounds)))
}
