//! Seeded verification suites over the bracket kernels, shared by the command line and the
//! acceptance run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::brackets::{commutator_closed, commutator_oracle, ehrhart, ehrhart_bruteforce, poisson_u, random_u_monomial};
use crate::coeffring::Bounds;
use crate::error::Result;
use crate::hierarchy::{functional_zero_u, Report};
use crate::scalar::{gr_real, rat};
use crate::urep::{UMonomial, UPolynomial};

/// `ehrhart = ehrhart_bruteforce` for `n ≤ nmax`, `d_i ≤ dmax`, `A ≤ amax`.
pub fn ehrhart_suite(nmax: usize, dmax: u32, amax: u64) -> Result<Report> {
    let mut rep = Report::new("ehrhart", json!({"nmax": nmax, "dmax": dmax, "Amax": amax}));
    let mut cases = 0u64;
    for n in 1..=nmax {
        let mut d = vec![0u32; n];
        loop {
            for a in 0..=amax {
                cases += 1;
                if ehrhart(&d, a) != ehrhart_bruteforce(&d, a)? {
                    return Ok(rep.fail(format!("C^{d:?}({a})")));
                }
            }
            let Some(i) = d.iter().rposition(|&x| x < dmax) else { break };
            d[i] += 1;
            d[i + 1..].iter_mut().for_each(|x| *x = 0);
        }
    }
    rep.detail = json!({"cases": cases});
    Ok(rep)
}

/// Closed commutator against the q-side Moyal commutator on `count` seeded pairs of
/// singular monomials with derivative orders ≤ 3, at most 3 factors, in `[−m, m]`.
pub fn commutator_suite(count: usize, seed: u64, m: i64, hbar: u32) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(UMonomial, UMonomial)> =
        (0..count).map(|_| (random_u_monomial(&mut rng, 3, 3, 2), random_u_monomial(&mut rng, 3, 3, 2))).collect();
    let cases = pairs.par_iter().map(|(f, g)| commutator_oracle(f, g, m, hbar)).collect::<Result<Vec<_>>>()?;
    let mut rep = Report::new("commutator", json!({"m": m, "hbar_order": hbar, "seed": seed, "pairs": count}));
    let mut per_order = std::collections::BTreeMap::new();
    let mut compared = 0;
    for c in &cases {
        if let Some(w) = c.mismatches.first() {
            return Ok(rep.fail(w.clone()));
        }
        compared += c.compared;
        for (k, v) in &c.per_order {
            *per_order.entry(*k).or_insert(0usize) += v;
        }
    }
    rep.detail = json!({"compared": compared, "per_order": per_order});
    Ok(rep)
}

/// A seeded sum of up to three singular monomials with small rational coefficients.
pub fn random_density(rng: &mut ChaCha8Rng, bounds: Bounds) -> UPolynomial {
    let mut p = UPolynomial::scalar_zero(bounds);
    for _ in 0..rng.gen_range(1..=3) {
        let m = random_u_monomial(rng, 3, 3, 1);
        let c = rat(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        p.add_scalar_term(m, gr_real(c), 0, 0);
    }
    p
}

/// Antisymmetry and Jacobi of the Poisson bracket on `count` seeded triples of local
/// functionals, and `[f, ḡ] = ħ{f, ḡ} + O(ħ²)` on the same corpus.
pub fn bracket_axioms_suite(count: usize, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = Bounds::new(0, 2);
    let triples: Vec<[UPolynomial; 3]> =
        (0..count).map(|_| [random_density(&mut rng, b), random_density(&mut rng, b), random_density(&mut rng, b)]).collect();
    let rep = Report::new("bracket-axioms", json!({"seed": seed, "triples": count}));
    let witness = triples.par_iter().enumerate().find_map_first(|(i, [f, g, h])| {
        let fg = poisson_u(f, g);
        if let Some(w) = functional_zero_u(&fg.add(&poisson_u(g, f))) {
            return Some(format!("antisymmetry, triple {i}: {w}"));
        }
        let jac = poisson_u(&fg, h).add(&poisson_u(&poisson_u(g, h), f)).add(&poisson_u(&poisson_u(h, f), g));
        if let Some(w) = functional_zero_u(&jac) {
            return Some(format!("Jacobi, triple {i}: {w}"));
        }
        let lead = commutator_closed(f, g).slice(0, 1);
        if let Some((m, c)) = lead.sub(&fg.with_bounds(Bounds::new(0, 0))).terms().iter().next() {
            return Some(format!("ħ-leading term, triple {i}: {m}: {c}"));
        }
        None
    });
    Ok(match witness {
        Some(w) => rep.fail(w),
        None => rep,
    })
}

/// Every term of `[f, ḡ]` for seeded monomials `f, g` of degrees `d₁, d₂` has degree `d₁+d₂−1`.
pub fn degree_law_suite(count: usize, seed: u64, hbar: u32) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = Bounds::new(0, hbar);
    let rep = Report::new("degree-law", json!({"seed": seed, "pairs": count, "hbar_order": hbar}));
    let mut nonzero = 0;
    for i in 0..count {
        let f = random_u_monomial(&mut rng, 3, 3, 2);
        let g = random_u_monomial(&mut rng, 3, 3, 2);
        let want = UPolynomial::term_degree(&f, 0, 0) + UPolynomial::term_degree(&g, 0, 0) - 1;
        let c = commutator_closed(&UPolynomial::from_monomial(f.clone(), b), &UPolynomial::from_monomial(g.clone(), b));
        if !c.is_zero() {
            nonzero += 1;
        }
        if let Some(d) = c.degrees().into_iter().find(|&d| d != want) {
            return Ok(rep.fail(format!("pair {i}: [{f}, ∫{g}] has a term of degree {d}, expected {want}")));
        }
    }
    let mut rep = rep;
    rep.detail = json!({"nonzero": nonzero});
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        assert!(ehrhart_suite(2, 2, 5).unwrap().passed());
        assert!(commutator_suite(3, 1, 6, 2).unwrap().passed());
        assert!(bracket_axioms_suite(3, 1).unwrap().passed());
        assert!(degree_law_suite(5, 1, 3).unwrap().passed());
    }
}
