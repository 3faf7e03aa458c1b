//! Intersection numbers on M̄_{0,n} and M̄_{1,n}, and the genus-1 DR class
//! `DR₁(a) = −λ₁ + Σ a_j²ψ_j/2 − ½ Σ_S a_S² δ₀^S` integrated against ψ- and λ-classes.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::RatPoly;
use crate::scalar::{factorial, rat, Rational};

fn multinomial(total: u64, parts: &[u32]) -> Rational {
    let den: BigInt = parts.iter().map(|&d| factorial(d as u64)).product();
    Rational::new(factorial(total), den)
}

/// `∫_{M̄_{0,n}} Π ψ_i^{d_i} = (n−3)!/Π d_i!` when `Σd = n−3`.
pub fn genus0_psi(d: &[u32]) -> Rational {
    let n = d.len() as i64;
    if n < 3 || d.iter().map(|&x| x as i64).sum::<i64>() != n - 3 {
        return Rational::zero();
    }
    multinomial((n - 3) as u64, d)
}

/// `∫_{M̄_{1,n}} Π ψ_i^{d_i}` by string and dilaton reduction to `⟨τ₁⟩₁ = 1/24`.
pub fn genus1_psi(d: &[u32]) -> Rational {
    let n = d.len();
    if n == 0 || d.iter().map(|&x| x as usize).sum::<usize>() != n {
        return Rational::zero();
    }
    if let Some(z) = d.iter().position(|&x| x == 0) {
        let mut rest: Vec<u32> = d.to_vec();
        rest.remove(z);
        let mut acc = Rational::zero();
        for j in 0..rest.len() {
            if rest[j] > 0 {
                let mut e = rest.clone();
                e[j] -= 1;
                acc += genus1_psi(&e);
            }
        }
        return acc;
    }
    // every exponent equals one
    Rational::new(factorial(n as u64 - 1), BigInt::from(24))
}

/// `∫_{M̄_{1,n}} λ₁ Π ψ_i^{d_i} = (1/24)(n−1)!/Π d_i!` when `Σd = n−1`.
pub fn genus1_lambda(d: &[u32]) -> Rational {
    let n = d.len();
    if n == 0 || d.iter().map(|&x| x as usize).sum::<usize>() != n - 1 {
        return Rational::zero();
    }
    multinomial(n as u64 - 1, d) * rat(1, 24)
}

/// ψ/λ integral in genus 0 or 1; `lam ≤ g`.
pub fn psi_lambda(g: u32, lam: u32, d: &[u32]) -> Rational {
    match (g, lam) {
        (0, 0) => genus0_psi(d),
        (1, 0) => genus1_psi(d),
        (1, 1) => genus1_lambda(d),
        _ => Rational::zero(),
    }
}

/// `ψ`-integrals for the classical genus-0/1 oracle: `(n−3)!/Πd!` or the genus-1 reduction.
pub fn psi_genus01(g: u32, d: &[u32]) -> Rational {
    psi_lambda(g, 0, d)
}

/// `∫_{M̄_{1,N}} DR₁(a) Π ψ_i^{e_i} λ₁^{lam}` for a profile of affine forms `a` (with `Σa = 0`).
pub fn dr_genus1(a: &[RatPoly], e: &[u32], lam: u32) -> RatPoly {
    let nv = a[0].nvars();
    let big_n = a.len();
    assert_eq!(e.len(), big_n);
    let mut out = RatPoly::zero(nv);
    if lam > 1 {
        return out;
    }
    if lam == 0 {
        out = &out - &RatPoly::constant(nv, genus1_lambda(e));
    }
    let half = rat(1, 2);
    for j in 0..big_n {
        let mut ej = e.to_vec();
        ej[j] += 1;
        let v = psi_lambda(1, lam, &ej);
        if !v.is_zero() {
            out = &out + &a[j].pow(2).scale(&(v * &half));
        }
    }
    // δ₀^S: genus-0 component carries S and the node, genus-1 component the rest and the node
    for mask in 1u64..(1 << big_n) {
        let s: Vec<usize> = (0..big_n).filter(|i| mask >> i & 1 == 1).collect();
        if s.len() < 2 {
            continue;
        }
        let mut e0: Vec<u32> = s.iter().map(|&i| e[i]).collect();
        e0.push(0);
        let v0 = genus0_psi(&e0);
        if v0.is_zero() {
            continue;
        }
        let mut e1: Vec<u32> = (0..big_n).filter(|i| mask >> i & 1 == 0).map(|i| e[i]).collect();
        e1.push(0);
        let v1 = psi_lambda(1, lam, &e1);
        if v1.is_zero() {
            continue;
        }
        let a_s = s.iter().fold(RatPoly::zero(nv), |acc, &i| &acc + &a[i]);
        out = &out - &a_s.pow(2).scale(&(v0 * v1 * &half));
    }
    out
}

/// Bernoulli number `B_n` (with `B_1 = −1/2`).
pub fn bernoulli(n: u32) -> Rational {
    let mut b: Vec<Rational> = vec![Rational::one()];
    for m in 1..=n as u64 {
        let mut acc = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += Rational::from_integer(crate::scalar::binomial(m + 1, k as u64)) * bk;
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    b.swap_remove(n as usize)
}

/// `b_g = ∫_{M̄_{g,1}} ψ^{2g−2} λ_g = (2^{2g−1}−1)|B_{2g}| / (2^{2g−1}(2g)!)`, `b_0 = 1`.
pub fn lambda_g_constant(g: u32) -> Rational {
    if g == 0 {
        return Rational::one();
    }
    let p = BigInt::from(2).pow(2 * g - 1);
    let b = bernoulli(2 * g);
    let b = if b < Rational::zero() { -b } else { b };
    b * Rational::new(&p - BigInt::from(1), p * factorial(2 * g as u64))
}

/// `∫_{M̄_{g,n}} λ_g Π ψ_i^{d_i} = (2g−3+n choose d) b_g`.
pub fn lambda_top(g: u32, d: &[u32]) -> Rational {
    let n = d.len() as i64;
    let dim = 2 * g as i64 - 3 + n;
    if 2 * g as i64 - 2 + n <= 0 || dim < 0 || d.iter().map(|&x| x as i64).sum::<i64>() != dim {
        return Rational::zero();
    }
    multinomial(dim as u64, d) * lambda_g_constant(g)
}

/// Side of a separating node: genus and marking set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Side {
    h: u32,
    mask: u64,
}

fn stable(h: u32, points: u32) -> bool {
    2 * h as i64 - 2 + points as i64 > 0
}

/// Separating divisors of `M̄_{g,N}`, each listed once as a pair of sides.
fn separating_divisors(g: u32, big_n: usize) -> Vec<(Side, Side)> {
    let full = (1u64 << big_n) - 1;
    let mut out = Vec::new();
    for h in 0..=g {
        for mask in 0..=full {
            let a = Side { h, mask };
            let b = Side { h: g - h, mask: full & !mask };
            if !stable(a.h, a.mask.count_ones() + 1) || !stable(b.h, b.mask.count_ones() + 1) {
                continue;
            }
            if (a.h, a.mask) < (b.h, b.mask) {
                out.push((a, b));
            }
        }
    }
    out
}

/// λ-top integral over one vertex: its markings carry `e`, its node branches carry `nodes`.
fn vertex(h: u32, mask: u64, e: &[u32], nodes: &[u32]) -> Rational {
    let mut d: Vec<u32> = (0..e.len()).filter(|&i| mask >> i & 1 == 1).map(|i| e[i]).collect();
    d.extend_from_slice(nodes);
    lambda_top(h, &d)
}

fn bump(e: &[u32], j: usize) -> Vec<u32> {
    let mut f = e.to_vec();
    f[j] += 1;
    f
}

/// `∫ λ_g Πψ^e · [D]`, with an extra `−(ψ_• + ψ_•')` when `self_square`.
fn on_divisor(g: u32, d: &(Side, Side), e: &[u32], self_square: bool) -> Rational {
    let (a, b) = d;
    let _ = g;
    if !self_square {
        return vertex(a.h, a.mask, e, &[0]) * vertex(b.h, b.mask, e, &[0]);
    }
    -(vertex(a.h, a.mask, e, &[1]) * vertex(b.h, b.mask, e, &[0]) + vertex(a.h, a.mask, e, &[0]) * vertex(b.h, b.mask, e, &[1]))
}

/// `∫ λ_g Πψ^e · [D][D']` for distinct divisors: the chain stratum when they are nested, else 0.
fn on_two_divisors(d1: &(Side, Side), d2: &(Side, Side), e: &[u32]) -> Rational {
    for x in [d1.0, d1.1] {
        for (y, ybar) in [(d2.0, d2.1), (d2.1, d2.0)] {
            if x.mask & !y.mask != 0 || x.h > y.h || (x.h == y.h && x.mask == y.mask) {
                continue;
            }
            let mid_h = y.h - x.h;
            let mid_mask = y.mask & !x.mask;
            if !stable(mid_h, mid_mask.count_ones() + 2) {
                continue;
            }
            return vertex(x.h, x.mask, e, &[0]) * vertex(mid_h, mid_mask, e, &[0, 0]) * vertex(ybar.h, ybar.mask, e, &[0]);
        }
    }
    Rational::zero()
}

/// `∫_{DR_g(a)} λ_g Πψ_i^{e_i}` for `g ≤ 2`, from `λ_g DR_g = λ_g Θ^g/g!` with Hain's class
/// `Θ = Σ a_j²ψ_j/2 − ½ Σ_D a_D² δ_D` on compact type and the λ_g-formula on every vertex.
pub fn dr_lambda_top(a: &[RatPoly], e: &[u32], g: u32) -> Result<RatPoly> {
    if g > 2 {
        return Err(Error::Unsupported(format!("λ_g DR expansion in genus {g}")));
    }
    assert_eq!(a.len(), e.len());
    let nv = a[0].nvars();
    let big_n = a.len();
    let sq: Vec<RatPoly> = a.iter().map(|x| x.pow(2)).collect();
    let divs = separating_divisors(g, big_n);
    let dsq: Vec<RatPoly> = divs
        .iter()
        .map(|(s, _)| (0..big_n).filter(|i| s.mask >> i & 1 == 1).fold(RatPoly::zero(nv), |acc, i| &acc + &a[i]).pow(2))
        .collect();
    let half = rat(1, 2);
    let mut out = RatPoly::zero(nv);
    match g {
        0 => out = RatPoly::constant(nv, lambda_top(0, e)),
        1 => {
            for j in 0..big_n {
                out = &out + &sq[j].scale(&(lambda_top(1, &bump(e, j)) * &half));
            }
            for (d, w) in divs.iter().zip(&dsq) {
                out = &out - &w.scale(&(on_divisor(g, d, e, false) * &half));
            }
        }
        _ => {
            // Θ²/2 = (ΨΨ − ΨΔ + ΔΔ/4)/2 with Ψ = Σ a_j²ψ_j/2 and Δ = Σ_D a_D² δ_D
            for j in 0..big_n {
                for k in 0..big_n {
                    let v = lambda_top(2, &bump(&bump(e, j), k));
                    if !v.is_zero() {
                        out = &out + &(&sq[j] * &sq[k]).scale(&(v * rat(1, 8)));
                    }
                }
            }
            for (d, w) in divs.iter().zip(&dsq) {
                for j in 0..big_n {
                    let v = on_divisor(g, d, &bump(e, j), false);
                    if !v.is_zero() {
                        out = &out - &(w * &sq[j]).scale(&(v * rat(1, 4)));
                    }
                }
            }
            for (i1, (d1, w1)) in divs.iter().zip(&dsq).enumerate() {
                for (i2, (d2, w2)) in divs.iter().zip(&dsq).enumerate() {
                    let v = if i1 == i2 { on_divisor(g, d1, e, true) } else { on_two_divisors(d1, d2, e) };
                    if !v.is_zero() {
                        out = &out + &(w1 * w2).scale(&(v * rat(1, 8)));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn classical_values() {
        assert_eq!(genus0_psi(&[0, 0, 0]), int(1));
        assert_eq!(genus0_psi(&[0, 0, 0, 1]), int(1));
        assert_eq!(genus0_psi(&[0, 0, 0, 1, 1]), int(2));
        assert_eq!(genus1_psi(&[1]), rat(1, 24));
        assert_eq!(genus1_psi(&[1, 1]), rat(1, 24));
        assert_eq!(genus1_psi(&[2, 0]), rat(1, 24));
        assert_eq!(genus1_psi(&[2, 1, 0]), rat(1, 12));
        assert_eq!(genus1_lambda(&[0]), rat(1, 24));
        assert_eq!(genus1_lambda(&[1, 1, 0]), rat(1, 12));
    }

    fn var(n: usize, i: usize) -> RatPoly {
        RatPoly::var(n, i)
    }

    #[test]
    fn two_point_dr_matches_sinh_formula() {
        // ∫_{DR₁(a,−a)} ψ₁ = (a²−1)/24
        let a = var(1, 0);
        let got = dr_genus1(&[a.clone(), -&a], &[1, 0], 0);
        let want = &a.pow(2).scale(&rat(1, 24)) - &RatPoly::constant(1, rat(1, 24));
        assert_eq!(got, want);
    }

    #[test]
    fn three_point_dr_psi_squared() {
        // ∫_{DR₁(a₁,a₂,a₃)} ψ₁² = (a₂²+a₃²−1)/24
        let (x, y) = (var(2, 0), var(2, 1));
        let prof = [-&(&x + &y), x.clone(), y.clone()];
        let got = dr_genus1(&prof, &[2, 0, 0], 0);
        let want = &(&x.pow(2) + &y.pow(2)).scale(&rat(1, 24)) - &RatPoly::constant(2, rat(1, 24));
        assert_eq!(got, want);
    }

    #[test]
    fn hain_value() {
        let (x, y) = (var(2, 0), var(2, 1));
        let prof = [-&(&x + &y), x.clone(), y.clone()];
        let got = dr_genus1(&prof, &[1, 0, 0], 1);
        assert_eq!(got, (&x.pow(2) + &y.pow(2)).scale(&rat(1, 24)));
        assert_eq!(dr_lambda_top(&prof, &[1, 0, 0], 1).unwrap(), got);
    }

    #[test]
    fn lambda_constants() {
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(lambda_g_constant(1), rat(1, 24));
        assert_eq!(lambda_g_constant(2), rat(7, 5760));
        assert_eq!(lambda_top(1, &[1, 1, 0]), genus1_lambda(&[1, 1, 0]));
        assert_eq!(lambda_top(0, &[0, 0, 0, 1, 1]), genus0_psi(&[0, 0, 0, 1, 1]));
    }

    #[test]
    fn genus_two_lambda_dr_power_sums() {
        // −p₄/2880 + 7p₂²/5760 over the non-ψ weights
        for n in 1..=4usize {
            let nv = n;
            let vars: Vec<RatPoly> = (0..n).map(|i| RatPoly::var(nv, i)).collect();
            let sum = vars.iter().fold(RatPoly::zero(nv), |a, v| &a + v);
            let mut prof = vec![RatPoly::zero(nv)];
            prof.extend(vars.iter().cloned());
            prof.push(-&sum);
            let mut e = vec![0; n + 2];
            e[0] = n as u32 + 1;
            let pk = |k: u32| prof[1..].iter().fold(RatPoly::zero(nv), |a, v| &a + &v.pow(k));
            let want = &pk(4).scale(&rat(-1, 2880)) + &pk(2).pow(2).scale(&rat(7, 5760));
            assert_eq!(dr_lambda_top(&prof, &e, 2).unwrap(), want, "n={n}");
        }
    }

    #[test]
    fn lambda_top_agrees_with_genus_one_expansion() {
        for n in 1..4usize {
            let vars: Vec<RatPoly> = (0..n).map(|i| var(n, i)).collect();
            let sum = vars.iter().fold(RatPoly::zero(n), |a, v| &a + v);
            let mut g_prof = vec![-&sum];
            g_prof.extend(vars.iter().cloned());
            let mut e = vec![0u32; n + 1];
            e[0] = n as u32 - 1;
            assert_eq!(dr_genus1(&g_prof, &e, 1), dr_lambda_top(&g_prof, &e, 1).unwrap());
            let mut h_prof = vec![RatPoly::zero(n)];
            h_prof.extend(vars.iter().cloned());
            h_prof.push(-&sum);
            let mut e = vec![0u32; n + 2];
            e[0] = n as u32;
            assert_eq!(dr_genus1(&h_prof, &e, 1), dr_lambda_top(&h_prof, &e, 1).unwrap());
        }
    }
}
