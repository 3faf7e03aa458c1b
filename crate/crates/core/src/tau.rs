//! Correlators of the Witten–Kontsevich, BGW and quantum Witten–Kontsevich tau structures,
//! read off nested brackets of the hamiltonian densities `H_d` of the trivial CohFT.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::brackets::{commutator_closed, poisson_u};
use crate::coeffring::{Bounds, CoeffSeries};
use crate::error::{Error, Result};
use crate::hierarchy::density_terms;
use crate::loopspace::{evaluate_at_x_zero, Assignment, QElement, TruncationSpec};
use crate::providers::{CycleKind, IntegralProvider, Shape};
use crate::scalar::{format_rational, gr_real, i_pow, neg_i_pow, parse_rational, rat, GaussianRational, Rational};
use crate::urep::{phi_to_q, phi_to_q_support, UPolynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Model {
    WK,
    BGW,
    QWK,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::WK => "WK",
            Model::BGW => "BGW",
            Model::QWK => "QWK",
        })
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "WK" => Ok(Model::WK),
            "BGW" => Ok(Model::BGW),
            "QWK" => Ok(Model::QWK),
            _ => Err(Error::Invalid(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelatorQuery {
    pub model: Model,
    pub d: Vec<u32>,
    pub g: u32,
    pub l: u32,
}

impl CorrelatorQuery {
    pub fn new(model: Model, d: Vec<u32>, g: u32, l: u32) -> Result<Self> {
        let q = CorrelatorQuery { model, d, g, l };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.is_empty() {
            return Err(Error::Domain("a correlator needs at least one insertion".into()));
        }
        if self.model == Model::QWK && self.l > self.g {
            return Err(Error::Domain(format!("l = {} exceeds g = {}", self.l, self.g)));
        }
        if 2 * self.g as i64 - 1 + self.d.len() as i64 <= 0 {
            return Err(Error::Domain("unstable correlator (2g − 1 + n ≤ 0)".into()));
        }
        Ok(())
    }

    /// `Σd_i = 4g − 2 + n − l`.
    pub fn on_gate(&self) -> bool {
        self.d.iter().map(|&x| x as i64).sum::<i64>() == 4 * self.g as i64 - 2 + self.d.len() as i64 - self.l as i64
    }

    fn mode(&self) -> Mode {
        match self.model {
            Model::QWK => Mode::Quantum,
            _ => Mode::Classical,
        }
    }

    /// Scalar bounds of the nested bracket.
    fn bounds(&self) -> Bounds {
        let n = self.d.len() as u32;
        match self.mode() {
            Mode::Classical => Bounds::with_weight(2 * self.g, 0, 2 * self.g),
            Mode::Quantum => Bounds::with_weight(2 * self.g, self.g + n - 1, 2 * self.g + 2 * (n - 1)),
        }
    }

    fn support(&self, max_index: i64) -> Vec<i64> {
        match self.model {
            Model::BGW => (0..=max_index).collect(),
            _ => vec![1],
        }
    }

    pub fn to_json(&self, value: &Rational) -> Value {
        let mut v = json!({"model": self.model.to_string(), "d": self.d, "g": self.g, "value": format_rational(value)});
        if self.model == Model::QWK {
            v["l"] = json!(self.l);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let model: Model = v.get("model").and_then(Value::as_str).ok_or_else(|| Error::Invalid("query.model missing".into()))?.parse()?;
        let d = v
            .get("d")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Invalid("query.d missing".into()))?
            .iter()
            .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| Error::Invalid("query.d entries must be nonnegative integers".into())))
            .collect::<Result<Vec<u32>>>()?;
        let g = v.get("g").and_then(Value::as_u64).ok_or_else(|| Error::Invalid("query.g missing".into()))? as u32;
        let l = v.get("l").and_then(Value::as_u64).map(|x| x as u32).unwrap_or(if model == Model::QWK { 0 } else { g });
        Self::new(model, d, g, l)
    }
}

/// `H_d` with genus ≤ `gmax`; with `kind = DR` the degree-0 part of `H_d^{DR}`.
fn hamiltonian_density(kind: CycleKind, d: i64, gmax: u32, bounds: Bounds, provider: &dyn IntegralProvider) -> Result<UPolynomial> {
    let h = density_terms(kind, Shape::H, d, gmax, bounds, provider)?;
    Ok(match kind {
        CycleKind::DR => h.extract_degree(0),
        _ => h,
    })
}

/// `{⋯{h_{d₁−1}, h̄_{d₂}}⋯, h̄_{dₙ}}` or `[⋯[H_{d₁−1}, H̄_{d₂}]⋯, H̄_{dₙ}]` in u-variables.
pub fn iterated_bracket_u(
    dlist: &[u32],
    mode: Mode,
    kind: CycleKind,
    gmax: u32,
    bounds: Bounds,
    provider: &dyn IntegralProvider,
) -> Result<UPolynomial> {
    let (&first, rest) = dlist.split_first().ok_or_else(|| Error::Domain("empty insertion list".into()))?;
    let mut acc = hamiltonian_density(kind, first as i64 - 1, gmax, bounds, provider)?;
    for &d in rest {
        let h = hamiltonian_density(kind, d as i64, gmax, bounds, provider)?;
        acc = match mode {
            Mode::Classical => poisson_u(&acc, &h),
            Mode::Quantum => commutator_closed(&acc, &h),
        };
    }
    Ok(acc)
}

/// The nested bracket as a non-integrated element of B in the window `trunc`.
pub fn iterated_bracket(
    dlist: &[u32],
    mode: Mode,
    kind: CycleKind,
    gmax: u32,
    trunc: &TruncationSpec,
    provider: &dyn IntegralProvider,
) -> Result<QElement> {
    Ok(phi_to_q(&iterated_bracket_u(dlist, mode, kind, gmax, trunc.bounds, provider)?, trunc))
}

fn assignment(model: Model, indices: &[i64], bounds: Bounds) -> Assignment {
    indices
        .iter()
        .map(|&m| {
            let v = match model {
                Model::BGW => CoeffSeries::monomial(neg_i_pow(m) * gr_real(rat(m + 1, 8)), 2, 0, bounds),
                _ => CoeffSeries::constant(neg_i_pow(1), bounds),
            };
            ((m, 1u16), v)
        })
        .collect()
}

/// Smallest window through which every term of `p` reaches its evaluation.
fn required_window(q: &CorrelatorQuery, p: &UPolynomial) -> (i64, u32) {
    let mut m_need = 1i64;
    let mut n_need = 1u32;
    for mon in p.terms().keys() {
        n_need = n_need.max(mon.degree() as u32);
        if q.model == Model::BGW {
            let top = mon.uvars().iter().map(|v| v.0).max().unwrap_or(0);
            m_need = m_need.max((top + mon.xneg()) as i64);
        }
    }
    (m_need, n_need)
}

/// Default window for `q`: the m-window and `n_max` its nested bracket needs, and at least
/// `m ∈ [−(2g+1), 2g+1]`, `n_max ≥ 2g + n`.
pub fn default_window(q: &CorrelatorQuery, provider: &dyn IntegralProvider) -> Result<TruncationSpec> {
    let p = iterated_bracket_u(&q.d, q.mode(), CycleKind::MD, q.g, q.bounds(), provider)?;
    let (m, n) = required_window(q, &p);
    let m = m.max(2 * q.g as i64 + 1);
    let n = n.max(2 * q.g + q.d.len() as u32);
    Ok(TruncationSpec::symmetric(m, n, q.bounds()))
}

fn extract(q: &CorrelatorQuery, kind: CycleKind, trunc: &TruncationSpec, provider: &dyn IntegralProvider) -> Result<Rational> {
    q.validate()?;
    let bounds = q.bounds();
    let p = iterated_bracket_u(&q.d, q.mode(), kind, q.g, bounds, provider)?;
    let (m_need, n_need) = required_window(q, &p);
    if trunc.n_max < n_need || !trunc.contains_index(1) || (q.model == Model::BGW && trunc.m_max < m_need) {
        return Err(Error::WindowTooSmall(format!(
            "correlator needs n_max ≥ {n_need} and m ∈ [{}, {m_need}], window is n_max = {}, m ∈ [{}, {}]",
            if q.model == Model::BGW { 0 } else { 1 },
            trunc.n_max,
            trunc.m_min,
            trunc.m_max
        )));
    }
    let trunc = TruncationSpec { bounds, ..*trunc };
    let support = q.support(trunc.m_max);
    let f = phi_to_q_support(&p, &trunc, &support);
    let val = evaluate_at_x_zero(&f, &assignment(q.model, &support, bounds))?;
    let n = q.d.len() as u32;
    let z: GaussianRational = match q.mode() {
        Mode::Classical => val.get(2 * q.g, 0),
        Mode::Quantum => i_pow((q.g - q.l) as i64) * val.get(2 * q.l, q.g - q.l + n - 1),
    };
    if !z.im.is_zero() {
        return Err(Error::Consistency(format!("{} correlator {:?} at g={} has imaginary part {}", q.model, q.d, q.g, z.im)));
    }
    Ok(z.re)
}

/// Value of `q` in the window `trunc`, from the MD densities.
pub fn correlator_in(q: &CorrelatorQuery, trunc: &TruncationSpec, provider: &dyn IntegralProvider) -> Result<Rational> {
    let v = extract(q, CycleKind::MD, trunc, provider)?;
    if q.model == Model::QWK && !q.on_gate() && !v.is_zero() {
        return Err(Error::Consistency(format!("QWK correlator {:?} at g={}, l={} is off the gate but equals {v}", q.d, q.g, q.l)));
    }
    Ok(v)
}

/// Value of `q` computed from the degree-0 part of the DR densities.
pub fn correlator_from_dr(q: &CorrelatorQuery, trunc: &TruncationSpec, provider: &dyn IntegralProvider) -> Result<Rational> {
    extract(q, CycleKind::DR, trunc, provider)
}

pub fn correlator(q: &CorrelatorQuery, provider: &dyn IntegralProvider) -> Result<Rational> {
    let w = default_window(q, provider)?;
    correlator_in(q, &w, provider)
}

/// `∫_{M̄_{g,n+1}} ψ₁^{d₁}⋯ψₙ^{dₙ}`.
pub fn wk_correlator(dlist: &[u32], g: u32, provider: &dyn IntegralProvider) -> Result<Rational> {
    correlator(&CorrelatorQuery::new(Model::WK, dlist.to_vec(), g, g)?, provider)
}

/// `∫_{M̄_{g,n+1}} Θ_{g,n+1} ψ₁^{d₁}⋯ψₙ^{dₙ}`.
pub fn bgw_correlator(dlist: &[u32], g: u32, provider: &dyn IntegralProvider) -> Result<Rational> {
    correlator(&CorrelatorQuery::new(Model::BGW, dlist.to_vec(), g, g)?, provider)
}

/// `⟨τ₀τ_{d₁}⋯τ_{dₙ}⟩_{l,g−l}`, zero off the gate `Σd_i = 4g−2+n−l`.
pub fn qwk_correlator(dlist: &[u32], g: u32, l: u32, provider: &dyn IntegralProvider) -> Result<Rational> {
    correlator(&CorrelatorQuery::new(Model::QWK, dlist.to_vec(), g, l)?, provider)
}

/// Answers a JSON array of queries, in input order.
pub fn batch(queries: &Value, provider: &dyn IntegralProvider) -> Result<Value> {
    let rows = queries.as_array().ok_or_else(|| Error::Invalid("batch input must be a JSON array".into()))?;
    let qs = rows.iter().map(CorrelatorQuery::from_json).collect::<Result<Vec<_>>>()?;
    let out: Vec<Value> = qs
        .par_iter()
        .map(|q| correlator(q, provider).map(|v| q.to_json(&v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Value::Array(out))
}

/// Reads the `value` field of a batch row.
pub fn row_value(row: &Value) -> Result<Rational> {
    parse_rational(row.get("value").and_then(Value::as_str).ok_or_else(|| Error::Invalid("row.value missing".into()))?)
}

/// `∫_{M̄_{g,n}} Πψ_i^{d_i}` in genus 0: `(n−3)!/Πd_i!`.
pub fn genus0_psi_oracle(d: &[u32]) -> Rational {
    let n = d.len() as i64;
    if n < 3 || d.iter().map(|&x| x as i64).sum::<i64>() != n - 3 {
        return Rational::zero();
    }
    let den: BigInt = d.iter().map(|&x| crate::scalar::factorial(x as u64)).product();
    Rational::new(crate::scalar::factorial((n - 3) as u64), den)
}
