//! Higher-genus MD data from the commutativity `[Ḡ_d, Ḡ₁] = 0`, solved weight by weight
//! with `Ḡ₁ = ∫(u³/6 + ε²uu₂/24)dx`, and DR `λ_g`-entries from the compact-type expansion.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::brackets::commutator_closed;
use crate::calculus::variational_derivative_u;
use crate::coeffring::Bounds;
use crate::error::{Error, Result};
use crate::hierarchy::genus0_g_density;
use crate::linalg;
use crate::moduli::dr_lambda_top;
use crate::poly::RatPoly;
use crate::providers::{profile, CycleKind, IntegralKey, IntegralTable, Provenance, Served, Shape};
use crate::scalar::{factorial, gr_real, i_pow, rat, sign, GaussianRational, Rational};
use crate::urep::{FactorialPolynomial, UMonomial, UPolynomial};

fn bracket_bounds(gmax: u32) -> Bounds {
    Bounds::with_weight(2 * gmax + 2, gmax + 1, 2 * gmax + 2)
}

/// `∫(u³/6 + ε²uu₂/24)dx`.
pub fn g1_bar(bounds: Bounds) -> UPolynomial {
    UPolynomial::from_scalar_terms(
        &[(&[0, 0, 0], 0, gr_real(rat(1, 6)), 0, 0), (&[0, 2], 0, gr_real(rat(1, 24)), 2, 0)],
        bounds,
    )
}

/// Multisets of `n` derivative orders with sum `w`.
fn order_multisets(n: usize, w: u32) -> Vec<Vec<u32>> {
    fn rec(left: usize, w: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            if w == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in (0..=max.min(w)).rev() {
            if (k as u64) * (left as u64) < w as u64 {
                break;
            }
            cur.push(k);
            rec(left - 1, w - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, w, w, &mut Vec::new(), &mut out);
    out
}

fn coordinates(polys: &[UPolynomial]) -> BTreeMap<UMonomial, usize> {
    let mut idx = BTreeMap::new();
    for p in polys {
        for m in p.terms().keys() {
            let next = idx.len();
            idx.entry(m.clone()).or_insert(next);
        }
    }
    idx
}

fn vector(p: &UPolynomial, idx: &BTreeMap<UMonomial, usize>) -> Vec<GaussianRational> {
    let mut v = vec![GaussianRational::zero(); idx.len()];
    for (m, c) in p.terms() {
        v[idx[m]] = c.get(0, 0);
    }
    v
}

/// `Ḡ_d` for `d = 0..=dmax` up to genus `gmax`, as non-singular densities of degree 0.
pub fn solve_g_bar(dmax: u32, gmax: u32) -> Result<Vec<UPolynomial>> {
    let bc = bracket_bounds(gmax);
    let g1 = g1_bar(bc);
    let cubic = UPolynomial::from_scalar_terms(&[(&[0, 0, 0], 0, gr_real(rat(1, 6)), 0, 0)], Bounds::new(0, 1));
    let mut out = Vec::new();
    for d in 0..=dmax {
        let mut known = genus0_g_density(d, bc);
        for w in (2..=2 * gmax).step_by(2) {
            let comm = commutator_closed(&known, &g1);
            let mut found = UPolynomial::scalar_zero(bc);
            for b in 0..=w / 2 {
                let a = w - 2 * b;
                let n = d as i64 + 2 - a as i64 / 2 - 2 * b as i64;
                let rhs = variational_derivative_u(&comm.slice(a, b + 1), 1).neg();
                let basis: Vec<UMonomial> = if n >= 2 {
                    order_multisets(n as usize, w).into_iter().map(|ks| UMonomial::scalar(&ks, 0)).collect()
                } else {
                    Vec::new()
                };
                let images: Vec<UPolynomial> = basis
                    .iter()
                    .map(|m| {
                        let p = UPolynomial::from_monomial(m.clone(), Bounds::new(0, 1));
                        variational_derivative_u(&commutator_closed(&p, &cubic).slice(0, 1), 1)
                    })
                    .collect();
                let mut all = images.clone();
                all.push(rhs.clone());
                let idx = coordinates(&all);
                let ncols = basis.len();
                let rows = idx.len();
                let cols: Vec<Vec<GaussianRational>> = images.iter().map(|p| vector(p, &idx)).collect();
                let a_mat: Vec<Vec<GaussianRational>> =
                    (0..rows).map(|r| (0..ncols).map(|c| cols[c][r].clone()).collect()).collect();
                let b_vec = vector(&rhs, &idx);
                let sol = linalg::solve(&a_mat, &b_vec, ncols).ok_or_else(|| {
                    Error::Consistency(format!("no commuting correction for Ḡ_{d} at ε^{a}ħ^{b}"))
                })?;
                // the solution must be unique as a local functional
                let var_images: Vec<UPolynomial> = basis
                    .iter()
                    .map(|m| variational_derivative_u(&UPolynomial::from_monomial(m.clone(), Bounds::exact()), 1))
                    .collect();
                let vidx = coordinates(&var_images);
                let vcols: Vec<Vec<GaussianRational>> = var_images.iter().map(|p| vector(p, &vidx)).collect();
                let mut stacked = a_mat.clone();
                stacked.extend((0..vidx.len()).map(|r| (0..ncols).map(|c| vcols[c][r].clone()).collect()));
                if linalg::rank(&stacked, ncols) != sol.rank {
                    return Err(Error::Consistency(format!("commuting correction for Ḡ_{d} at ε^{a}ħ^{b} is not unique")));
                }
                for (m, x) in basis.iter().zip(&sol.x) {
                    if !x.is_zero() {
                        found.add_scalar_term(m.clone(), x.clone(), a, b);
                    }
                }
            }
            known.add_assign(&found);
        }
        out.push(known.with_bounds(Bounds::genus(gmax)));
    }
    Ok(out)
}

fn distinct_orderings(ks: &[u32]) -> Vec<Vec<u32>> {
    let mut v = ks.to_vec();
    v.sort_unstable();
    let mut out = vec![v.clone()];
    // lexicographic successor enumeration
    loop {
        let Some(i) = (0..v.len().saturating_sub(1)).rev().find(|&i| v[i] < v[i + 1]) else { break };
        let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).expect("successor exists");
        v.swap(i, j);
        v[i + 1..].reverse();
        out.push(v.clone());
    }
    out
}

/// MD shape-H entries of genus `g` read off `H_d = δḠ_{d+1}/δu`.
fn md_entries_from(h: &UPolynomial, g: u32, d: u32) -> Result<Vec<(IntegralKey, FactorialPolynomial)>> {
    let p = d + 1;
    let mut out = Vec::new();
    for l in 0..=g {
        let Some(n) = IntegralKey::dimensional_n(Shape::H, g, p, l) else { continue };
        let key = IntegralKey::new(CycleKind::MD, Shape::H, g, n, p, l);
        let pre = i_pow((g - l) as i64) * gr_real(Rational::from_integer(BigInt::from(sign((g + l) as i64))));
        let mut rows = Vec::new();
        for (m, c) in h.slice(2 * l, g - l).terms() {
            let coeff = c.get(0, 0);
            if m.xneg() != 0 || m.uvars().len() != n as usize {
                return Err(Error::Consistency(format!("{key}: unexpected monomial {m} in H_{d}")));
            }
            let ks: Vec<u32> = m.uvars().iter().map(|v| v.0).collect();
            let mults: BigInt = m.distinct_vars().iter().map(|&v| factorial(m.count(v) as u64)).product();
            let val = coeff * gr_real(Rational::from_integer(mults)) / pre.clone();
            if !val.im.is_zero() {
                return Err(Error::Consistency(format!("{key}: non-real coefficient at {m}")));
            }
            for s in distinct_orderings(&ks) {
                rows.push((s, val.re.clone()));
            }
        }
        out.push((key, FactorialPolynomial::from_coeffs(n as usize, rows)));
    }
    Ok(out)
}

/// DR entries `∫_{DR_g} λ_g ψ₀^p` for both shapes.
pub fn dr_lambda_entry(shape: Shape, g: u32, psi_pow: u32) -> Result<Option<(IntegralKey, FactorialPolynomial)>> {
    let Some(n) = IntegralKey::dimensional_n(shape, g, psi_pow, g) else { return Ok(None) };
    let key = IntegralKey::new(CycleKind::DR, shape, g, n, psi_pow, g);
    if n == 0 && shape == Shape::G {
        return Ok(None);
    }
    let prof = profile(&key);
    let mut e = vec![0; prof.len()];
    e[0] = psi_pow;
    let poly: RatPoly = dr_lambda_top(&prof, &e, g)?;
    Ok(Some((key, FactorialPolynomial::from_monomial(&poly))))
}

/// Table of genus-`g` MD shape-H entries with `ψ₀`-power up to `psi_max`, and DR `λ_g`
/// entries when `g ≤ 2`.
pub fn generate_table(g: u32, psi_max: u32) -> Result<IntegralTable> {
    let gbar = solve_g_bar(psi_max + 1, g)?;
    let mut table = IntegralTable::new();
    for d in 0..psi_max {
        let h = variational_derivative_u(&gbar[d as usize + 1], 1);
        for (key, poly) in md_entries_from(&h, g, d)? {
            table.insert(key, Served { poly, provenance: Provenance::Derived, source: "commuting-solve".into() })?;
        }
    }
    for p in (0..=psi_max).filter(|_| g <= 2) {
        for shape in [Shape::H, Shape::G] {
            if let Some((key, poly)) = dr_lambda_entry(shape, g, p)? {
                table.insert(key, Served { poly, provenance: Provenance::Derived, source: "compact-type-expansion".into() })?;
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{density_genus, functional_zero_u};
    use crate::providers::{IntegralProvider, StandardProvider};

    #[test]
    fn multisets() {
        assert_eq!(order_multisets(3, 2), vec![vec![2, 0, 0], vec![1, 1, 0]]);
        assert_eq!(distinct_orderings(&[1, 0, 0]).len(), 3);
    }

    #[test]
    fn g1_bar_is_the_md_functional() {
        let p = StandardProvider::analytic();
        let g1 = density_genus(CycleKind::MD, Shape::G, 1, 1, &p).unwrap();
        assert_eq!(functional_zero_u(&g1.sub(&g1_bar(Bounds::genus(1)))), None);
    }

    #[test]
    fn genus_one_solve_reproduces_analytic_data() {
        let p = StandardProvider::analytic();
        let gbar = solve_g_bar(4, 1).unwrap();
        for d in 0..4 {
            let h = variational_derivative_u(&gbar[d + 1], 1);
            assert_eq!(h, density_genus(CycleKind::MD, Shape::H, d as i64, 1, &p).unwrap(), "d={d}");
        }
        for d in 0..3u32 {
            let h = variational_derivative_u(&gbar[d as usize + 1], 1);
            for (key, poly) in md_entries_from(&h, 1, d).unwrap() {
                assert_eq!(p.integral(&key).unwrap().poly, poly, "{key}");
            }
        }
    }
}
