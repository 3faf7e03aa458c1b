//! Hamiltonian densities of the MD, DR and DR¹ hierarchies of the trivial CohFT and
//! verifiers for their structural identities.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::brackets::commutator_closed;
use crate::calculus::{shift_by_inverse_square, variational_derivative_u};
use crate::coeffring::{Bounds, CoeffSeries};
use crate::error::{Error, Result};
use crate::loopspace::{integrate_dx, QElement, QMonomial, TruncationSpec};
use crate::providers::{CycleKind, IntegralKey, IntegralProvider, Shape};
use crate::scalar::{factorial, gr_real, i_pow, neg_i_pow, rat, sign, GaussianRational, Rational};
use crate::urep::{phi_to_q, UMonomial, UPolynomial};

/// Which density to build and in which window. Family H admits `d ≥ −1`, family G `d ≥ 0`;
/// the genus range is read off the scalar bounds of `trunc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DensitySpec {
    pub kind: CycleKind,
    pub family: Shape,
    pub d: i64,
    pub trunc: TruncationSpec,
}

impl DensitySpec {
    pub fn new(kind: CycleKind, family: Shape, d: i64, trunc: TruncationSpec) -> Self {
        DensitySpec { kind, family, d, trunc }
    }

    fn psi_pow(&self) -> Result<u32> {
        let p = match self.family {
            Shape::H => self.d + 1,
            Shape::G => self.d,
        };
        u32::try_from(p).map_err(|_| {
            Error::Domain(format!("family {} needs d ≥ {}", self.family, if self.family == Shape::H { -1 } else { 0 }))
        })
    }
}

fn top_genus(bounds: &Bounds) -> u32 {
    bounds.weight / 2
}

/// `(g, l)`-term prefactor times `1/n!` for the given kind, before the `(−i)^{Σs}` of DR.
fn prefactor(kind: CycleKind, g: u32, l: u32, n: u32) -> GaussianRational {
    let s = match kind {
        CycleKind::DR => sign(l as i64),
        _ => sign((g + l) as i64),
    };
    i_pow((g - l) as i64) * gr_real(Rational::new(BigInt::from(s), factorial(n as u64)))
}

/// u-side density with genus ≤ `gmax`, stored with scalar bounds `bounds`.
pub fn density_terms(
    kind: CycleKind,
    family: Shape,
    d: i64,
    gmax: u32,
    bounds: Bounds,
    provider: &dyn IntegralProvider,
) -> Result<UPolynomial> {
    let spec = DensitySpec::new(kind, family, d, TruncationSpec::symmetric(1, 1, bounds));
    let p = spec.psi_pow()?;
    let mut out = UPolynomial::scalar_zero(bounds);
    let mut missing = Vec::new();
    for g in 0..=gmax {
        for l in 0..=g {
            if !bounds.admits(2 * l, g - l) {
                continue;
            }
            let Some(n) = IntegralKey::dimensional_n(family, g, p, l) else { continue };
            let key = IntegralKey::new(kind, family, g, n, p, l);
            let served = match provider.integral(&key) {
                Ok(s) => s,
                Err(Error::Coverage { missing: m }) => {
                    missing.extend(m);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let pre = prefactor(kind, g, l, n);
            if kind == CycleKind::DR {
                for (s, c) in served.monomial().terms() {
                    let big_s: u32 = s.iter().sum();
                    let coeff = pre.clone() * neg_i_pow(big_s as i64) * gr_real(c.clone());
                    out.add_scalar_term(UMonomial::scalar(s, 0), coeff, 2 * l, g - l);
                }
            } else {
                for (s, c) in served.poly.coeffs() {
                    let big_s: u32 = s.iter().sum();
                    let xneg = (2 * g).checked_sub(big_s).ok_or_else(|| {
                        Error::Consistency(format!("{key}: factorial degree {big_s} exceeds 2g"))
                    })?;
                    out.add_scalar_term(UMonomial::scalar(s, xneg), pre.clone() * gr_real(c.clone()), 2 * l, g - l);
                }
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::Coverage { missing });
    }
    Ok(out)
}

/// The density of `spec` in u-variables.
pub fn density_u(spec: &DensitySpec, provider: &dyn IntegralProvider) -> Result<UPolynomial> {
    let b = spec.trunc.bounds;
    density_terms(spec.kind, spec.family, spec.d, top_genus(&b), b, provider)
}

/// u-side density with everything up to genus `gmax`.
pub fn density_genus(
    kind: CycleKind,
    family: Shape,
    d: i64,
    gmax: u32,
    provider: &dyn IntegralProvider,
) -> Result<UPolynomial> {
    density_terms(kind, family, d, gmax, Bounds::genus(gmax), provider)
}

/// The density as a truncated element of B.
pub fn build_density(spec: &DensitySpec, provider: &dyn IntegralProvider) -> Result<QElement> {
    spec.trunc.validate()?;
    Ok(phi_to_q(&density_u(spec, provider)?, &spec.trunc))
}

pub fn hamiltonian(spec: &DensitySpec, provider: &dyn IntegralProvider) -> Result<QElement> {
    integrate_dx(&build_density(spec, provider)?)
}

/// Terms of a density without any u-factor (the `n = 0` contributions); they lie in `ker ∫`.
pub fn scalar_part(p: &UPolynomial) -> UPolynomial {
    p.filter_terms(|m, _, _| m.uvars().is_empty())
}

fn eps2_over_24(bounds: Bounds) -> CoeffSeries {
    CoeffSeries::monomial(gr_real(rat(1, 24)), 2, 0, bounds)
}

/// `q_{−2} ↦ q_{−2} − ε²/24` in every component carrying the unit, by a terminating Taylor shift.
pub fn dr1_substitute(f: &QElement) -> Result<QElement> {
    if !f.trunc().contains_index(-2) {
        return Err(Error::WindowTooSmall("the DR¹ shift needs q[−2] inside the window".into()));
    }
    let unit = f.frame().unit().to_vec();
    let mut out = QElement::zero(f.frame().clone(), *f.trunc(), f.is_integrated());
    for (mon, c) in f.terms() {
        let mut partial: Vec<(QMonomial, CoeffSeries)> = vec![(QMonomial::new(Vec::new(), mon.xpow()), c.clone())];
        for &v in mon.qvars() {
            let mut next = Vec::with_capacity(partial.len() * 2);
            for (m, s) in partial {
                next.push((m.mul(&QMonomial::new(vec![v], 0)), s.clone()));
                let a = v.1 as usize - 1;
                if v.0 == -2 && !unit[a].is_zero() {
                    let shift = eps2_over_24(s.bounds()).scale(&gr_real(-unit[a].clone()));
                    let t = &s * &shift;
                    if !t.is_zero() {
                        next.push((m, t));
                    }
                }
            }
            partial = next;
        }
        for (m, s) in partial {
            if f.is_integrated() && m.qvars().is_empty() {
                continue;
            }
            out.add_term(m, &s);
        }
    }
    Ok(out)
}

/// `u(x) ↦ u(x) + ε²/(24x²)` on a u-side density.
pub fn dr1_substitute_u(p: &UPolynomial) -> UPolynomial {
    shift_by_inverse_square(p, &eps2_over_24(p.bounds()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub check: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
    pub window: Value,
    pub drops: u64,
    pub detail: Value,
}

impl Report {
    pub fn new(check: impl Into<String>, window: Value) -> Self {
        Report { check: check.into(), verdict: Verdict::Pass, witness: None, window, drops: 0, detail: Value::Null }
    }

    pub fn fail(mut self, witness: impl Into<String>) -> Self {
        self.verdict = Verdict::Fail;
        self.witness = Some(witness.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "check": self.check,
            "verdict": self.verdict.to_string(),
            "witness": self.witness,
            "window": self.window,
            "drops": self.drops,
        });
        if !self.detail.is_null() {
            v["detail"] = self.detail.clone();
        }
        v
    }
}

fn genus_window(gmax: u32, bounds: Bounds) -> Value {
    json!({"gmax": gmax, "eps_order": bounds.eps, "hbar_order": bounds.hbar, "weight": bounds.weight})
}

/// Bounds at which brackets of genus-≤`gmax` densities are complete.
fn bracket_bounds(gmax: u32) -> Bounds {
    Bounds::with_weight(2 * gmax + 2, gmax + 1, 2 * gmax + 2)
}

fn first_term(p: &UPolynomial) -> Option<String> {
    p.terms().iter().next().map(|(m, c)| format!("{m}: {c}"))
}

/// `[H̄_{d₁}, H̄_{d₂}] = 0`, decided through the variational derivative of the closed commutator.
pub fn verify_integrability(
    kind: CycleKind,
    d1: i64,
    d2: i64,
    gmax: u32,
    provider: &dyn IntegralProvider,
) -> Result<Report> {
    let b = bracket_bounds(gmax);
    let h1 = density_terms(kind, Shape::H, d1, gmax, b, provider)?;
    let h2 = density_terms(kind, Shape::H, d2, gmax, b, provider)?;
    let c = commutator_closed(&h1, &h2);
    let mut rep = Report::new(format!("integrability/{kind}/d1={d1}/d2={d2}"), genus_window(gmax, b));
    rep.detail = json!({"max_hbar_order": b.hbar});
    for alpha in 1..=c.frame().dim() as u16 {
        if let Some(w) = first_term(&variational_derivative_u(&c, alpha)) {
            return Ok(rep.fail(format!("δ/δu of the commutator: {w}")));
        }
    }
    Ok(rep)
}

/// `[H_{d₁−1}, H̄_{d₂}] = [H_{d₂−1}, H̄_{d₁}]` as densities.
pub fn verify_tau_symmetry(
    kind: CycleKind,
    d1: i64,
    d2: i64,
    gmax: u32,
    provider: &dyn IntegralProvider,
) -> Result<Report> {
    if d1 < 0 || d2 < 0 {
        return Err(Error::Domain("tau symmetry needs d₁, d₂ ≥ 0".into()));
    }
    let b = bracket_bounds(gmax);
    let h = |d: i64| density_terms(kind, Shape::H, d, gmax, b, provider);
    let left = commutator_closed(&h(d1 - 1)?, &h(d2)?);
    let right = commutator_closed(&h(d2 - 1)?, &h(d1)?);
    let rep = Report::new(format!("tau-symmetry/{kind}/d1={d1}/d2={d2}"), genus_window(gmax, b));
    Ok(match first_term(&left.sub(&right)) {
        None => rep,
        Some(w) => rep.fail(format!("densities differ at {w}")),
    })
}

/// `H_d = (H_d^{DR})^{[0]}` and every DR term has degree ≤ 0.
pub fn verify_degree_zero(d: i64, gmax: u32, provider: &dyn IntegralProvider) -> Result<Report> {
    let md = density_genus(CycleKind::MD, Shape::H, d, gmax, provider)?;
    let dr = density_genus(CycleKind::DR, Shape::H, d, gmax, provider)?;
    let rep = Report::new(format!("degree-zero/d={d}"), genus_window(gmax, md.bounds()));
    if let Some(&top) = dr.degrees().iter().next_back() {
        if top > 0 {
            return Ok(rep.fail(format!("DR density has a term of degree {top}")));
        }
    }
    if let Some(&neg) = md.degrees().iter().find(|&&x| x != 0) {
        return Ok(rep.fail(format!("MD density has a term of degree {neg}")));
    }
    if !md.is_nonsingular() {
        return Ok(rep.fail("MD density is singular"));
    }
    Ok(match first_term(&md.sub(&dr.extract_degree(0))) {
        None => rep,
        Some(w) => rep.fail(format!("H_d − (H_d^DR)^[0] has {w}")),
    })
}

/// `H_d^{DR¹} = H_d|_{u ↦ u + ε²/(24x²)}`.
pub fn verify_dr1_link(d: i64, gmax: u32, provider: &dyn IntegralProvider) -> Result<Report> {
    let md = density_genus(CycleKind::MD, Shape::H, d, gmax, provider)?;
    let dr1 = density_genus(CycleKind::DR1, Shape::H, d, gmax, provider)?;
    let rep = Report::new(format!("dr1-link/d={d}"), genus_window(gmax, md.bounds()));
    Ok(match first_term(&dr1_substitute_u(&md).sub(&dr1)) {
        None => rep,
        Some(w) => rep.fail(format!("shifted H_d − H_d^DR1 has {w}")),
    })
}

/// Coefficient transfer between an MD entry (falling factorials) and a DR entry (monomials)
/// in factorial/monomial degree `2g`; with `homogeneous` the MD entry must have no other part.
fn transfer(
    key: IntegralKey,
    md: &dyn IntegralProvider,
    dr: &dyn IntegralProvider,
    homogeneous: bool,
) -> Result<std::result::Result<Value, String>> {
    let mk = IntegralKey { kind: CycleKind::MD, ..key };
    let dk = IntegralKey { kind: CycleKind::DR, ..key };
    let mp = md.integral(&mk)?.poly;
    let dp = dr.integral(&dk)?.monomial();
    let top = 2 * key.g;
    if homogeneous && !mp.is_homogeneous(top) {
        return Ok(Err(format!("{mk} is not homogeneous of factorial degree {top}")));
    }
    let mut rows = Vec::new();
    let mut keys: Vec<&Vec<u32>> = mp.coeffs().keys().chain(dp.terms().keys()).collect();
    keys.sort();
    keys.dedup();
    for s in keys {
        if s.iter().sum::<u32>() != top {
            continue;
        }
        let (a, b) = (mp.coeff(s), dp.coeff(s));
        if a != b {
            return Ok(Err(format!("{mk} vs {dk} at exponent {s:?}: {a} ≠ {b}")));
        }
        rows.push(json!({"s": s, "c": crate::scalar::format_rational(&a)}));
    }
    Ok(Ok(json!({"key": mk.to_string(), "transferred": rows})))
}

/// Main theorem at `(g, d, l)` with `n` free markings: the shape-H entries with `ψ₀^d` and
/// `ψ₀^{d+1}` are homogeneous of factorial degree `2g` and their coefficients equal the
/// DR monomial coefficients; the shape-G entries with the same ψ-powers transfer in top degree.
pub fn verify_main_theorem(
    g: u32,
    d: u32,
    l: u32,
    n: u32,
    md: &dyn IntegralProvider,
    dr: &dyn IntegralProvider,
) -> Result<Report> {
    let mut rep = Report::new(format!("main-theorem/g={g}/d={d}/l={l}/n={n}"), json!({"g": g, "n": n}));
    let mut checked = Vec::new();
    let mut vacuous = Vec::new();
    let mut uncovered = Vec::new();
    let cases = [(Shape::H, d, true), (Shape::H, d + 1, true), (Shape::G, d, false), (Shape::G, d + 1, false)];
    for (shape, p, homogeneous) in cases {
        let key = IntegralKey::new(CycleKind::MD, shape, g, n, p, l);
        if !key.is_dimensional() {
            vacuous.push(key.to_string());
            continue;
        }
        let outcome = match transfer(key, md, dr, homogeneous) {
            Err(Error::Coverage { missing }) if shape == Shape::G => {
                uncovered.extend(missing.iter().map(|k| k.to_string()));
                continue;
            }
            other => other?,
        };
        match outcome {
            Ok(v) => checked.push(v),
            Err(w) => return Ok(rep.fail(w)),
        }
    }
    if checked.is_empty() {
        rep.verdict = Verdict::Inconclusive;
        rep.witness = Some(if uncovered.is_empty() { "every key is dimensionally empty" } else { "no covered entry to transfer" }.into());
    }
    rep.detail = json!({"checked": checked, "vacuous": vacuous, "uncovered": uncovered});
    Ok(rep)
}

/// Whether `p` vanishes as a local functional, with a witness otherwise.
pub fn functional_zero_u(p: &UPolynomial) -> Option<String> {
    (1..=p.frame().dim() as u16).find_map(|a| first_term(&variational_derivative_u(p, a)))
}

/// The genus-0 part of `Ḡ_d`: `u^{d+2}/(d+2)!`.
pub fn genus0_g_density(d: u32, bounds: Bounds) -> UPolynomial {
    let ks = vec![0u32; d as usize + 2];
    let c = Rational::new(BigInt::one(), factorial(d as u64 + 2));
    UPolynomial::from_scalar_terms(&[(&ks, 0, gr_real(c), 0, 0)], bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::dx_u;
    use crate::providers::StandardProvider;
    use crate::scalar::gr_int;

    fn up(rows: &[(&[u32], u32, Rational, u32, u32)], b: Bounds) -> UPolynomial {
        let rows: Vec<_> = rows.iter().map(|(k, j, c, e, h)| (*k, *j, gr_real(c.clone()), *e, *h)).collect();
        UPolynomial::from_scalar_terms(&rows, b)
    }

    #[test]
    fn genus0_g_densities() {
        let p = StandardProvider::analytic();
        for d in 0..6 {
            let got = density_genus(CycleKind::MD, Shape::G, d, 0, &p).unwrap();
            assert_eq!(got, genus0_g_density(d as u32, Bounds::genus(0)));
        }
    }

    #[test]
    fn g1_eps2_slice() {
        let p = StandardProvider::analytic();
        let g1 = density_genus(CycleKind::MD, Shape::G, 1, 1, &p).unwrap();
        let e = Bounds::exact();
        let u2 = up(&[(&[0, 0], 1, rat(1, 48), 0, 0)], e);
        let want = up(&[(&[0, 2], 0, rat(1, 24), 0, 0)], e).add(&dx_u(&u2));
        assert_eq!(g1.slice(2, 0), want);
        assert!(g1.slice(0, 1).is_zero() || functional_zero_u(&g1.slice(0, 1)).is_none());
    }

    #[test]
    fn dr_g1_degree_zero_part() {
        let p = StandardProvider::analytic();
        let g1 = density_genus(CycleKind::DR, Shape::G, 1, 1, &p).unwrap();
        let b = Bounds::genus(1);
        let want = up(&[(&[0, 0, 0], 0, rat(1, 6), 0, 0), (&[0, 2], 0, rat(1, 24), 2, 0)], b);
        assert!(functional_zero_u(&g1.extract_degree(0).sub(&want)).is_none());
    }

    #[test]
    fn g_and_h_hamiltonians_agree() {
        let p = StandardProvider::analytic();
        for kind in [CycleKind::MD, CycleKind::DR] {
            for d in 0..4 {
                let g = density_genus(kind, Shape::G, d, 1, &p).unwrap();
                let h = density_genus(kind, Shape::H, d, 1, &p).unwrap();
                assert_eq!(functional_zero_u(&g.sub(&h)), None, "{kind} d={d}");
                let g_next = density_genus(kind, Shape::G, d + 1, 1, &p).unwrap();
                assert_eq!(variational_derivative_u(&g_next, 1), h, "{kind} d={d}");
            }
        }
    }

    #[test]
    fn md_h_densities_are_nonsingular() {
        let p = StandardProvider::analytic();
        for d in -1..4 {
            let h = density_genus(CycleKind::MD, Shape::H, d, 1, &p).unwrap();
            assert!(h.is_nonsingular());
            assert!(h.degrees().iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn dr1_shift_of_q_minus_two() {
        let t = TruncationSpec::symmetric(3, 3, Bounds::genus(1));
        let mut f = QElement::zero(crate::loopspace::PhaseFrame::trivial(), t, false);
        f.add_scalar_term(QMonomial::scalar(&[-2], 0), gr_int(1), 0, 0);
        let got = dr1_substitute(&f).unwrap();
        let mut want = f.clone();
        want.add_scalar_term(QMonomial::scalar(&[], 0), gr_real(rat(-1, 24)), 2, 0);
        assert_eq!(got, want);
        let narrow = TruncationSpec::symmetric(1, 3, Bounds::genus(1));
        let g = QElement::zero(crate::loopspace::PhaseFrame::trivial(), narrow, false);
        assert!(matches!(dr1_substitute(&g), Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn dr1_shift_q_and_u_sides_agree() {
        let p = StandardProvider::analytic();
        let t = TruncationSpec::symmetric(3, 3, Bounds::genus(1));
        let md = DensitySpec::new(CycleKind::MD, Shape::H, 0, t);
        let dr1 = DensitySpec::new(CycleKind::DR1, Shape::H, 0, t);
        let shifted = dr1_substitute(&build_density(&md, &p).unwrap()).unwrap();
        let direct = build_density(&dr1, &p).unwrap();
        assert_eq!(shifted, direct);
        let u = phi_to_q(&dr1_substitute_u(&density_u(&md, &p).unwrap()), &t);
        assert_eq!(u, direct);
    }

    #[test]
    fn verifiers_pass_in_genus_one() {
        let p = StandardProvider::analytic();
        for kind in [CycleKind::MD, CycleKind::DR1] {
            for (d1, d2) in [(0, 1), (1, 2)] {
                assert!(verify_integrability(kind, d1, d2, 1, &p).unwrap().passed());
                assert!(verify_tau_symmetry(kind, d1, d2, 1, &p).unwrap().passed());
            }
        }
        assert!(verify_degree_zero(1, 1, &p).unwrap().passed());
        assert!(verify_dr1_link(1, 1, &p).unwrap().passed());
        let rep = verify_main_theorem(1, 0, 1, 2, &p, &p).unwrap();
        assert!(rep.passed(), "{:?}", rep);
    }

    #[test]
    fn broken_density_fails_integrability() {
        struct Skewed(StandardProvider);
        impl IntegralProvider for Skewed {
            fn integral(&self, key: &IntegralKey) -> Result<crate::providers::Served> {
                let mut s = self.0.integral(key)?;
                if key.g == 1 && key.lam == 0 && !s.poly.is_zero() {
                    let bump = s.poly.coeffs().iter().map(|(k, c)| (k.clone(), c * rat(2, 1)));
                    s.poly = crate::urep::FactorialPolynomial::from_coeffs(s.poly.nvars(), bump);
                }
                Ok(s)
            }
        }
        let p = Skewed(StandardProvider::analytic());
        let rep = verify_integrability(CycleKind::MD, 1, 2, 1, &p).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.witness.is_some());
    }
}
