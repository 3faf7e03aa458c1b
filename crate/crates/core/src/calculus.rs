//! Total x-derivative and variational derivatives in both representations.

use num_bigint::BigInt;

use crate::coeffring::CoeffSeries;
use crate::error::{Error, Result};
use crate::loopspace::{QElement, QMonomial};
use crate::scalar::{gr, gr_int, gr_real, int, Rational};
use crate::urep::{UMonomial, UPolynomial};

/// `∂ₓ` on B: `(ix)^k ↦ i k (ix)^{k−1}`.
pub fn dx_q(f: &QElement) -> Result<QElement> {
    if f.is_integrated() {
        return Err(Error::Invalid("dx_q acts on B, not on B̄".into()));
    }
    let mut out = QElement::zero(f.frame().clone(), *f.trunc(), false);
    out.note_drops(f.drops());
    for (m, c) in f.terms() {
        let k = m.xpow();
        if k == 0 {
            continue;
        }
        out.add_term(m.with_xpow(k - 1), &c.scale(&gr(int(0), int(k))));
    }
    Ok(out)
}

/// Total derivative `∂/∂x + Σ u_{k+1} ∂/∂u_k` on singular differential polynomials.
pub fn dx_u(p: &UPolynomial) -> UPolynomial {
    let mut out = UPolynomial::zero(p.frame().clone(), p.bounds());
    for (m, c) in p.terms() {
        for v in m.distinct_vars() {
            let k = m.count(v) as i64;
            out.add_term(m.replace_one(v, (v.0 + 1, v.1)), &c.scale(&gr_int(k)));
        }
        if m.xneg() > 0 {
            out.add_term(m.with_xneg(m.xneg() + 1), &c.scale(&gr_int(-(m.xneg() as i64))));
        }
    }
    out
}

pub fn dx_u_pow(p: &UPolynomial, k: u32) -> UPolynomial {
    (0..k).fold(p.clone(), |acc, _| dx_u(&acc))
}

/// `Σ_m (ix)^{−m−1} ∂F̄/∂q_m^α` for an integrated element.
pub fn variational_derivative(f: &QElement, alpha: u16) -> Result<QElement> {
    if !f.is_integrated() {
        return Err(Error::Invalid("variational derivative needs an element of B̄".into()));
    }
    let mut out = QElement::zero(f.frame().clone(), *f.trunc(), false);
    out.note_drops(f.drops());
    for (m, c) in f.terms() {
        for v in m.distinct_vars() {
            if v.1 != alpha {
                continue;
            }
            let (k, rest) = m.remove_one(v).unwrap();
            let mon = QMonomial::new(rest.qvars().to_vec(), -v.0 - 1);
            out.add_term(mon, &c.scale(&gr_int(k as i64)));
        }
    }
    Ok(out)
}

/// `Σ_s (−∂ₓ)^s ∂p/∂u_s^α`.
pub fn variational_derivative_u(p: &UPolynomial, alpha: u16) -> UPolynomial {
    let vars: Vec<u32> = p.variables().keys().filter(|v| v.1 == alpha).map(|v| v.0).collect();
    let mut out = UPolynomial::zero(p.frame().clone(), p.bounds());
    for s in vars {
        let mut t = p.partial((s, alpha));
        for _ in 0..s {
            t = dx_u(&t).neg();
        }
        out.add_assign(&t);
    }
    out
}

/// Whether `∫ p dx = 0`, decided through the variational derivative in every component.
pub fn integrates_to_zero_u(p: &UPolynomial) -> bool {
    (1..=p.frame().dim() as u16).all(|a| variational_derivative_u(p, a).is_zero())
}

/// A first differing monomial of two local functionals, decided u-side.
pub fn functional_witness_u(a: &UPolynomial, b: &UPolynomial) -> Option<String> {
    let d = a.sub(b);
    for alpha in 1..=d.frame().dim() as u16 {
        let v = variational_derivative_u(&d, alpha);
        if let Some((m, c)) = v.terms().iter().next() {
            return Some(format!("δ/δu^{alpha} differs at {m}: {c}"));
        }
    }
    None
}

/// Outcome of a structural comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub equal: bool,
    pub witness: Option<String>,
}

/// Equality of local functionals through their canonical B̄ images.
pub fn functional_equal(f: &QElement, g: &QElement) -> Result<Comparison> {
    if !f.is_integrated() || !g.is_integrated() {
        return Err(Error::Invalid("functional_equal compares integrated elements".into()));
    }
    if f.frame() != g.frame() {
        return Err(Error::FrameMismatch);
    }
    if f.trunc() != g.trunc() {
        return Err(Error::Incomparable("windows differ".into()));
    }
    let d = f.sub(g)?;
    Ok(match d.terms().iter().next() {
        None => Comparison { equal: true, witness: None },
        Some((m, c)) => Comparison { equal: false, witness: Some(format!("{m}: {c}")) },
    })
}

/// `u(x) ↦ u(x) + c/x²` on the u-side, with `c` a series (the DR¹ shift uses `c = ε²/24`).
pub fn shift_by_inverse_square(p: &UPolynomial, c: &CoeffSeries) -> UPolynomial {
    let mut out = UPolynomial::zero(p.frame().clone(), p.bounds());
    for (m, coeff) in p.terms() {
        // expand Π (u_{k} + c ∂ₓ^k x^{−2}) with ∂ₓ^k x^{−2} = (−1)^k (k+1)! x^{−2−k}
        let mut partial: Vec<(UMonomial, CoeffSeries)> = vec![(UMonomial::new(Vec::new(), m.xneg()), coeff.clone())];
        for &v in m.uvars() {
            let k = v.0;
            let w: BigInt = crate::scalar::factorial(k as u64 + 1) * BigInt::from(crate::scalar::sign(k as i64));
            let shift = c.scale(&gr_real(Rational::from_integer(w)));
            let mut next = Vec::with_capacity(partial.len() * 2);
            for (mon, s) in partial {
                next.push((mon.mul(&UMonomial::new(vec![v], 0)), s.clone()));
                let t = &s * &shift;
                if !t.is_zero() {
                    next.push((mon.with_xneg(mon.xneg() + 2 + k), t));
                }
            }
            partial = next;
        }
        for (mon, s) in partial {
            out.add_term(mon, &s);
        }
    }
    out
}
