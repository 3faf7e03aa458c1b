//! Poisson bracket, star product, quantum commutator (q-side and closed u-side form)
//! and the Ehrhart kernel.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::dx_u;
use crate::coeffring::{Bounds, CoeffSeries};
use crate::error::{Error, Result};
use crate::loopspace::{integrate_dx, QElement, QMonomial, QVar, TruncationSpec};
use crate::scalar::{factorial, falling, gr, gr_int, gr_real, int, neg_i_pow, GaussianRational, Rational};
use crate::urep::{phi_to_q_filtered, UMonomial, UPolynomial, UVar};

fn counts(m: &QMonomial) -> BTreeMap<QVar, usize> {
    let mut c = BTreeMap::new();
    for &v in m.qvars() {
        *c.entry(v).or_insert(0) += 1;
    }
    c
}

fn strip(c: &BTreeMap<QVar, usize>, taken: &BTreeMap<QVar, usize>) -> Vec<QVar> {
    let mut out = Vec::new();
    for (&v, &k) in c {
        let t = taken.get(&v).copied().unwrap_or(0);
        out.extend(std::iter::repeat(v).take(k - t));
    }
    out
}

/// One contraction type: `q_{k−1}^α` on the left paired with `q_{−k−1}^β` on the right.
struct PairType {
    left: QVar,
    right: QVar,
    weight: GaussianRational,
}

/// All terms of `L exp(Σ_{k>0} iħkη ←∂_{q_{k−1}} →∂_{q_{−k−1}}) R` with between
/// `n_min` and `n_max` contractions, added to `out`.
fn contract_into(l: &QElement, r: &QElement, n_min: u32, n_max: u32, out: &mut QElement) {
    let frame = l.frame().clone();
    let dim = frame.dim() as u16;
    let rterms: Vec<(&QMonomial, &CoeffSeries)> = r.terms().iter().collect();
    let mut index: HashMap<QVar, Vec<usize>> = HashMap::new();
    for (i, (m, _)) in rterms.iter().enumerate() {
        for v in m.distinct_vars() {
            index.entry(v).or_default().push(i);
        }
    }
    for (ml, cl) in l.terms() {
        let lc = counts(ml);
        let mut partners: BTreeSet<usize> = BTreeSet::new();
        for &(a, _) in lc.keys() {
            if a < 0 {
                continue;
            }
            for beta in 1..=dim {
                if let Some(ix) = index.get(&(-a - 2, beta)) {
                    partners.extend(ix.iter().copied());
                }
            }
        }
        for j in partners {
            let (mr, cr) = rterms[j];
            let rc = counts(mr);
            let mut types = Vec::new();
            for &(a, alpha) in lc.keys() {
                if a < 0 {
                    continue;
                }
                for beta in 1..=dim {
                    let rv = (-a - 2, beta);
                    let eta = frame.eta_up(alpha, beta);
                    if rc.contains_key(&rv) && !eta.is_zero() {
                        let k = a + 1;
                        types.push(PairType { left: (a, alpha), right: rv, weight: gr(int(0), eta * int(k)) });
                    }
                }
            }
            let prod = cl * cr;
            let xpow = ml.xpow() + mr.xpow();
            let mut taken_l = BTreeMap::new();
            let mut taken_r = BTreeMap::new();
            let mut acc = Vec::new();
            enumerate(&types, 0, n_max, &lc, &rc, &mut taken_l, &mut taken_r, &mut acc, &mut |n, coef, tl, tr| {
                if n < n_min {
                    return;
                }
                let mut c = coef.clone();
                for (v, &t) in tl {
                    c = c * gr_real(Rational::from_integer(falling(lc[v] as i64, t as u32)));
                }
                for (v, &t) in tr {
                    c = c * gr_real(Rational::from_integer(falling(rc[v] as i64, t as u32)));
                }
                let mut vars = strip(&lc, tl);
                vars.extend(strip(&rc, tr));
                out.add_term(QMonomial::new(vars, xpow), &prod.shift(0, n).scale(&c));
            });
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    types: &[PairType],
    i: usize,
    left_budget: u32,
    lc: &BTreeMap<QVar, usize>,
    rc: &BTreeMap<QVar, usize>,
    tl: &mut BTreeMap<QVar, usize>,
    tr: &mut BTreeMap<QVar, usize>,
    chosen: &mut Vec<(usize, u32)>,
    emit: &mut dyn FnMut(u32, &GaussianRational, &BTreeMap<QVar, usize>, &BTreeMap<QVar, usize>),
) {
    if i == types.len() {
        let n: u32 = chosen.iter().map(|c| c.1).sum();
        let mut coef = gr_int(1);
        for &(t, nj) in chosen.iter() {
            for _ in 0..nj {
                coef = coef * types[t].weight.clone();
            }
            coef = coef / gr_real(Rational::from_integer(factorial(nj as u64)));
        }
        emit(n, &coef, tl, tr);
        return;
    }
    let t = &types[i];
    let avail_l = lc[&t.left] - tl.get(&t.left).copied().unwrap_or(0);
    let avail_r = rc[&t.right] - tr.get(&t.right).copied().unwrap_or(0);
    let top = avail_l.min(avail_r).min(left_budget as usize);
    for nj in 0..=top {
        if nj > 0 {
            *tl.entry(t.left).or_insert(0) += 1;
            *tr.entry(t.right).or_insert(0) += 1;
            chosen.push((i, nj as u32));
        }
        enumerate(types, i + 1, left_budget - nj as u32, lc, rc, tl, tr, chosen, emit);
        if nj > 0 {
            chosen.pop();
        }
    }
    for (m, v) in [(tl, t.left), (tr, t.right)] {
        if top > 0 {
            let e = m.get_mut(&v).unwrap();
            *e -= top;
            if *e == 0 {
                m.remove(&v);
            }
        }
    }
}

/// `{f, ḡ} = Σ_{k∈ℤ} ik η^{αβ} ∂f/∂q_{k−1}^α ∂ḡ/∂q_{−k−1}^β`.
pub fn poisson(f: &QElement, g: &QElement) -> Result<QElement> {
    if f.frame() != g.frame() {
        return Err(Error::FrameMismatch);
    }
    if !g.is_integrated() {
        return Err(Error::Invalid("second argument of the bracket must be integrated".into()));
    }
    let trunc = f.trunc().meet(g.trunc());
    let mut out = QElement::zero(f.frame().clone(), trunc, f.is_integrated());
    out.note_drops(f.drops() + g.drops());
    let frame = f.frame();
    for (mf, cf) in f.terms() {
        for vf in mf.distinct_vars() {
            let k = vf.0 + 1;
            if k == 0 {
                continue;
            }
            let (cnt_f, rest_f) = mf.remove_one(vf).unwrap();
            for (mg, cg) in g.terms() {
                for beta in 1..=frame.dim() as u16 {
                    let vg = (-k - 1, beta);
                    let eta = frame.eta_up(vf.1, beta);
                    if eta.is_zero() {
                        continue;
                    }
                    let Some((cnt_g, rest_g)) = mg.remove_one(vg) else { continue };
                    let w = gr(int(0), eta * int(k * (cnt_f * cnt_g) as i64));
                    out.add_term(rest_f.mul(&rest_g).with_xpow(mf.xpow()), &(cf * cg).scale(&w));
                }
            }
        }
    }
    Ok(out)
}

/// Normal-ordered star product of two integrated elements, expanded to `ħ^{hbar_order}`.
pub fn star(f: &QElement, g: &QElement, hbar_order: u32) -> Result<QElement> {
    if f.frame() != g.frame() {
        return Err(Error::FrameMismatch);
    }
    if !f.is_integrated() || !g.is_integrated() {
        return Err(Error::Invalid("star acts on integrated elements".into()));
    }
    let mut trunc = f.trunc().meet(g.trunc());
    trunc.bounds.hbar = trunc.bounds.hbar.min(hbar_order);
    let mut out = QElement::zero(f.frame().clone(), trunc, true);
    out.note_drops(f.drops() + g.drops());
    for (m1, c1) in f.terms() {
        for (m2, c2) in g.terms() {
            out.add_term(m1.mul(m2), &(c1 * c2));
        }
    }
    contract_into(f, g, 1, trunc.bounds.hbar, &mut out);
    Ok(out)
}

/// The lifted quantum commutator `[f, ḡ] = f ⋆ ḡ − ḡ ⋆ f`.
pub fn commutator(f: &QElement, g: &QElement) -> Result<QElement> {
    if f.frame() != g.frame() {
        return Err(Error::FrameMismatch);
    }
    if !g.is_integrated() {
        return Err(Error::Invalid("second argument of the commutator must be integrated".into()));
    }
    let trunc = f.trunc().meet(g.trunc());
    let mut plus = QElement::zero(f.frame().clone(), trunc, f.is_integrated());
    plus.note_drops(f.drops() + g.drops());
    contract_into(f, g, 1, trunc.bounds.hbar, &mut plus);
    let mut minus = QElement::zero(f.frame().clone(), trunc, f.is_integrated());
    contract_into(g, f, 1, trunc.bounds.hbar, &mut minus);
    plus.sub(&minus)
}

/// Multisets of size `n` drawn from `vars` (with multiplicity caps), sorted.
fn sub_multisets(vars: &[(UVar, usize)], n: usize) -> Vec<Vec<UVar>> {
    fn rec(vars: &[(UVar, usize)], i: usize, n: usize, cur: &mut Vec<UVar>, out: &mut Vec<Vec<UVar>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        if i == vars.len() {
            return;
        }
        let (v, cap) = vars[i];
        for t in (0..=cap.min(n)).rev() {
            cur.extend(std::iter::repeat(v).take(t));
            rec(vars, i + 1, n - t, cur, out);
            cur.truncate(cur.len() - t);
        }
    }
    let mut out = Vec::new();
    rec(vars, 0, n, &mut Vec::new(), &mut out);
    out
}

fn distinct_perms(xs: &[UVar]) -> Vec<Vec<UVar>> {
    fn rec(pool: &mut BTreeMap<UVar, usize>, len: usize, cur: &mut Vec<UVar>, out: &mut Vec<Vec<UVar>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let keys: Vec<UVar> = pool.iter().filter(|(_, &c)| c > 0).map(|(k, _)| *k).collect();
        for k in keys {
            *pool.get_mut(&k).unwrap() -= 1;
            cur.push(k);
            rec(pool, len, cur, out);
            cur.pop();
            *pool.get_mut(&k).unwrap() += 1;
        }
    }
    let mut pool = BTreeMap::new();
    for &x in xs {
        *pool.entry(x).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    rec(&mut pool, xs.len(), &mut Vec::new(), &mut out);
    out
}

fn partial_multi(p: &UPolynomial, vs: &[UVar]) -> UPolynomial {
    vs.iter().fold(p.clone(), |acc, &v| acc.partial(v))
}

/// Kernel `Σ_{s,r} Π η^{α_iβ_i}(s_i+r_i+1)! (−1)^R / (S+R+2n−1)!` summed over
/// the distinct orderings of the multisets `a` and `b`.
fn kernel(frame: &crate::loopspace::PhaseFrame, a: &[UVar], b: &[UVar]) -> Rational {
    let n = a.len();
    let s: u32 = a.iter().map(|v| v.0).sum();
    let r: u32 = b.iter().map(|v| v.0).sum();
    let perms_a = distinct_perms(a).len();
    let mut total = Rational::zero();
    for pb in distinct_perms(b) {
        let mut term = Rational::one();
        for (x, y) in a.iter().zip(&pb) {
            term = term * frame.eta_up(x.1, y.1) * Rational::from_integer(factorial((x.0 + y.0 + 1) as u64));
            if term.is_zero() {
                break;
            }
        }
        total += term;
    }
    let sign = if r % 2 == 0 { int(1) } else { int(-1) };
    total * int(perms_a as i64) * sign / Rational::from_integer(factorial((s + r) as u64 + 2 * n as u64 - 1))
}

/// Closed u-variable form of `[f, ḡ]`, summed over `n` contractions in `orders`.
fn closed_orders(f: &UPolynomial, g: &UPolynomial, orders: std::ops::RangeInclusive<u32>, with_hbar: bool) -> UPolynomial {
    let bounds = f.bounds().meet(&g.bounds());
    let frame = f.frame().clone();
    let mut out = UPolynomial::zero(frame.clone(), bounds);
    let fv: Vec<(UVar, usize)> = f.variables().into_iter().collect();
    let gv: Vec<(UVar, usize)> = g.variables().into_iter().collect();
    for n in orders {
        if with_hbar && !bounds.admits(0, n) {
            break;
        }
        let df: Vec<(Vec<UVar>, UPolynomial)> = sub_multisets(&fv, n as usize)
            .into_iter()
            .map(|a| {
                let d = partial_multi(f, &a);
                (a, d)
            })
            .filter(|(_, d)| !d.is_zero())
            .collect();
        let dg: Vec<(Vec<UVar>, UPolynomial)> = sub_multisets(&gv, n as usize)
            .into_iter()
            .map(|b| {
                let d = partial_multi(g, &b);
                (b, d)
            })
            .filter(|(_, d)| !d.is_zero())
            .collect();
        let pre = neg_i_pow(n as i64 - 1) / gr_real(Rational::from_integer(factorial(n as u64)));
        let mut cache: Vec<Vec<UPolynomial>> = dg.iter().map(|(_, d)| vec![d.clone()]).collect();
        for (a, dfa) in &df {
            for (j, (b, _)) in dg.iter().enumerate() {
                let w = kernel(&frame, a, b);
                if w.is_zero() {
                    continue;
                }
                let order = (a.iter().map(|v| v.0).sum::<u32>() + b.iter().map(|v| v.0).sum::<u32>() + 2 * n - 1) as usize;
                while cache[j].len() <= order {
                    let next = dx_u(cache[j].last().unwrap());
                    cache[j].push(next);
                }
                let mut term = dfa.mul(&cache[j][order]).scale(&(pre.clone() * gr_real(w)));
                if with_hbar {
                    term = term.shift(0, n);
                }
                out.add_assign(&term);
            }
        }
    }
    out
}

/// `[f, ḡ]` through the closed commutator formula, up to the ħ-order of the bounds.
pub fn commutator_closed(f: &UPolynomial, g: &UPolynomial) -> UPolynomial {
    let hmax = f.bounds().meet(&g.bounds()).hbar;
    closed_orders(f, g, 1..=hmax, true)
}

/// The Poisson bracket `{f, ḡ} = Σ_s ∂f/∂u_s^α ∂ₓ^{s+1} η^{αβ} δḡ/δu^β` in u-variables.
pub fn poisson_u(f: &UPolynomial, g: &UPolynomial) -> UPolynomial {
    closed_orders(f, g, 1..=1, false)
}

/// `C^{d₁,…,dₙ}(A) = (Πd_i!/(D+n−1)!) (A+n−1)^{\underline{D+n−1}}`, `D = Σd_i`.
pub fn ehrhart(d: &[u32], a: u64) -> Rational {
    let n = d.len() as u64;
    if n == 0 {
        return if a == 0 { int(1) } else { int(0) };
    }
    let big_d: u64 = d.iter().map(|&x| x as u64).sum();
    let num: BigInt = d.iter().map(|&x| factorial(x as u64)).product();
    let top = a as i64 + n as i64 - 1;
    Rational::new(num * falling(top, (big_d + n - 1) as u32), factorial(big_d + n - 1))
}

/// Default cap on `A` for [`ehrhart_bruteforce`].
pub const EHRHART_CAP: u64 = 60;

/// Direct summation over compositions of `A` into `n` nonnegative parts.
pub fn ehrhart_bruteforce(d: &[u32], a: u64) -> Result<Rational> {
    ehrhart_bruteforce_capped(d, a, EHRHART_CAP)
}

pub fn ehrhart_bruteforce_capped(d: &[u32], a: u64, cap: u64) -> Result<Rational> {
    if a > cap {
        return Err(Error::Domain(format!("A = {a} exceeds the brute-force cap {cap}")));
    }
    fn rec(d: &[u32], left: u64, acc: BigInt, total: &mut BigInt) {
        match d {
            [] => {
                if left == 0 {
                    *total += acc;
                }
            }
            [last] => *total += acc * falling(left as i64, *last),
            [first, rest @ ..] => {
                for ai in 0..=left {
                    let f = falling(ai as i64, *first);
                    if !f.is_zero() {
                        rec(rest, left - ai, &acc * f, total);
                    }
                }
            }
        }
    }
    let mut total = BigInt::zero();
    rec(d, a, BigInt::one(), &mut total);
    Ok(Rational::from_integer(total))
}

/// A seeded singular differential monomial with derivative orders ≤ `kmax`,
/// `1..=nmax` factors and a pole of order ≤ `jmax`.
pub fn random_u_monomial(rng: &mut ChaCha8Rng, kmax: u32, nmax: usize, jmax: u32) -> UMonomial {
    let n = rng.gen_range(1..=nmax);
    let ks: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=kmax)).collect();
    UMonomial::scalar(&ks, rng.gen_range(0..=jmax))
}

/// Result of comparing the closed commutator with the q-side oracle on one pair.
#[derive(Debug, Clone, Default)]
pub struct OracleCase {
    pub compared: usize,
    pub per_order: BTreeMap<u32, usize>,
    pub skipped: usize,
    pub mismatches: Vec<String>,
}

/// Compares `phi_to_q(commutator_closed(f, g))` with `commutator(phi_to_q f, ∫ phi_to_q g)`
/// in the window `[−m, m]`, per ħ-order up to `hbar`. Only q-monomials that no
/// contraction through an index outside the window can reach are compared.
pub fn commutator_oracle(f: &UMonomial, g: &UMonomial, m: i64, hbar: u32) -> Result<OracleCase> {
    let bounds = Bounds::new(0, hbar);
    let fp = UPolynomial::from_monomial(f.clone(), bounds);
    let gp = UPolynomial::from_monomial(g.clone(), bounds);
    let n_max = (f.degree() + g.degree()) as u32;
    let trunc = TruncationSpec::symmetric(m, n_max, bounds);
    let sigma_f = f.order() as i64;
    let a = f.degree();
    // contractions k range over 1..=m−1 inside the window on both sides
    let kmax = m - 1;
    let safe = |q: &QMonomial, n: u32| -> bool {
        let n = n as usize;
        if q.degree() + 2 * n != a + g.degree() || a < n {
            return false;
        }
        let ms: Vec<i64> = q.qvars().iter().map(|v| v.0).collect();
        let x = q.xpow();
        let mut ok = true;
        choose(ms.len(), a - n, &mut |idx| {
            let sp: i64 = idx.iter().map(|&i| ms[i]).sum();
            let plus = x - sp + sigma_f + n as i64;
            let minus = sp - n as i64 - sigma_f - x;
            let big = |s: i64| s - (n as i64 - 1) > kmax;
            if big(plus) || big(minus) {
                ok = false;
            }
        });
        ok
    };
    let q_f = phi_to_q_filtered(&fp, &trunc, |_| true);
    let q_g = integrate_dx(&phi_to_q_filtered(&gp, &trunc, |_| true))?;
    let lhs = commutator(&q_f, &q_g)?;
    let closed = commutator_closed(&fp, &gp);
    let rhs = phi_to_q_filtered(&closed, &trunc, |_| true);
    let mut case = OracleCase::default();
    let keys: BTreeSet<&QMonomial> = lhs.terms().keys().chain(rhs.terms().keys()).collect();
    for q in keys {
        let l = lhs.coeff(q);
        let r = rhs.coeff(q);
        for n in 1..=hbar {
            if !safe(q, n) {
                case.skipped += 1;
                continue;
            }
            case.compared += 1;
            *case.per_order.entry(n).or_insert(0) += 1;
            if l.get(0, n) != r.get(0, n) {
                case.mismatches.push(format!("{f} vs {g} at {q} ħ^{n}: {} ≠ {}", l.get(0, n), r.get(0, n)));
            }
        }
    }
    Ok(case)
}

fn choose(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    if k <= n {
        rec(0, n, k, &mut Vec::new(), f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{dx_u, variational_derivative_u};
    use crate::loopspace::PhaseFrame;
    use crate::scalar::rat;
    use rand::SeedableRng;

    #[test]
    fn ehrhart_examples() {
        assert_eq!(ehrhart(&[0, 0], 7), int(8));
        assert_eq!(ehrhart(&[1, 1], 5), int(20));
        assert_eq!(ehrhart(&[2, 3], 4), int(0));
        assert_eq!(ehrhart_bruteforce(&[2], 7).unwrap(), int(42));
        assert_eq!(ehrhart_bruteforce(&[0, 0, 0], 2).unwrap(), int(6));
        assert_eq!(ehrhart_bruteforce(&[1, 1], 1).unwrap(), int(0));
        assert!(ehrhart_bruteforce(&[1], 61).is_err());
        for a in 0..9 {
            assert_eq!(ehrhart(&[2, 0, 1], a), ehrhart_bruteforce(&[2, 0, 1], a).unwrap());
        }
    }

    fn q1(m: i64) -> QMonomial {
        QMonomial::scalar(&[m], 0)
    }

    #[test]
    fn star_single_contraction() {
        let t = TruncationSpec::symmetric(4, 4, Bounds::new(0, 2));
        let mut a = QElement::zero(PhaseFrame::trivial(), t, true);
        a.add_scalar_term(q1(0), gr_int(1), 0, 0);
        let mut b = QElement::zero(PhaseFrame::trivial(), t, true);
        b.add_scalar_term(q1(-2), gr_int(1), 0, 0);
        let c = star(&a, &b, 2).unwrap().sub(&star(&b, &a, 2).unwrap()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.coeff(&QMonomial::one()).get(0, 1), gr(int(0), int(1)));
        let ab = star(&a, &b, 0).unwrap();
        assert_eq!(ab.coeff(&QMonomial::scalar(&[-2, 0], 0)).get(0, 0), gr_int(1));
        assert_eq!(ab.len(), 1);
    }

    #[test]
    fn star_double_contraction() {
        // q0² ⋆ q₋₂² has ħ² coefficient (i)²·2·2/2! = −2
        let t = TruncationSpec::symmetric(4, 4, Bounds::new(0, 3));
        let mut a = QElement::zero(PhaseFrame::trivial(), t, true);
        a.add_scalar_term(QMonomial::scalar(&[0, 0], 0), gr_int(1), 0, 0);
        let mut b = QElement::zero(PhaseFrame::trivial(), t, true);
        b.add_scalar_term(QMonomial::scalar(&[-2, -2], 0), gr_int(1), 0, 0);
        let s = star(&a, &b, 3).unwrap();
        assert_eq!(s.coeff(&QMonomial::one()).get(0, 2), gr_int(-2));
        assert_eq!(s.coeff(&QMonomial::scalar(&[-2, 0], 0)).get(0, 1), gr(int(0), int(4)));
    }

    fn up(rows: &[(&[u32], u32, i64, i64)], b: Bounds) -> UPolynomial {
        let rows: Vec<_> = rows.iter().map(|(k, j, p, q)| (*k, *j, gr_real(rat(*p, *q)), 0, 0)).collect();
        UPolynomial::from_scalar_terms(&rows, b)
    }

    #[test]
    fn closed_examples() {
        let b = Bounds::new(0, 3);
        let u0 = up(&[(&[0], 0, 1, 1)], b);
        let half = up(&[(&[0, 0], 0, 1, 2)], b);
        let got = commutator_closed(&u0, &half);
        assert_eq!(got, up(&[(&[1], 0, 1, 1)], b).shift(0, 1));
        let p = poisson_u(&u0, &half);
        assert_eq!(p, up(&[(&[1], 0, 1, 1)], Bounds::new(0, 3)));
        // {f̄, ḡ} = ∫ δf̄ ∂ₓ δḡ
        let f = up(&[(&[0, 0, 1], 0, 1, 1)], b);
        let g = up(&[(&[0, 2], 1, 1, 1)], b);
        let lhs = poisson_u(&variational_derivative_u(&f, 1), &g);
        let rhs = variational_derivative_u(&f, 1).mul(&dx_u(&variational_derivative_u(&g, 1)));
        assert!(crate::calculus::integrates_to_zero_u(&lhs.sub(&rhs)));
    }

    #[test]
    fn oracle_small() {
        let f = UMonomial::scalar(&[0, 1], 0);
        let g = UMonomial::scalar(&[0, 0, 2], 1);
        let case = commutator_oracle(&f, &g, 6, 2).unwrap();
        assert!(case.mismatches.is_empty(), "{:?}", &case.mismatches[..case.mismatches.len().min(3)]);
        assert!(case.compared > 0);
    }

    #[test]
    fn oracle_random_few() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..4 {
            let f = random_u_monomial(&mut rng, 3, 3, 2);
            let g = random_u_monomial(&mut rng, 3, 3, 2);
            let case = commutator_oracle(&f, &g, 6, 3).unwrap();
            assert!(case.mismatches.is_empty(), "{:?}", &case.mismatches[..case.mismatches.len().min(3)]);
        }
    }
}
