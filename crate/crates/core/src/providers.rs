//! Intersection-number oracles: strata of meromorphic differentials (MD), DR cycles and
//! twisted DR¹ cycles for the trivial CohFT, served as polynomials in the free markings.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use num_traits::One;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::moduli::{dr_genus1, genus0_psi};
use crate::poly::RatPoly;
use crate::scalar::{factorial, int, rat, Rational};
use crate::urep::FactorialPolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CycleKind {
    MD,
    DR,
    DR1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    H,
    G,
}

impl fmt::Display for CycleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleKind::MD => "MD",
            CycleKind::DR => "DR",
            CycleKind::DR1 => "DR1",
        })
    }
}

impl FromStr for CycleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MD" => Ok(CycleKind::MD),
            "DR" => Ok(CycleKind::DR),
            "DR1" => Ok(CycleKind::DR1),
            _ => Err(Error::Invalid(format!("unknown cycle kind {s:?}"))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::H => "H",
            Shape::G => "G",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "H" => Ok(Shape::H),
            "G" => Ok(Shape::G),
            _ => Err(Error::Invalid(format!("unknown shape {s:?}"))),
        }
    }
}

/// Shape H: markings `(−1, m₁,…,mₙ, 2g−1−Σm)` (DR: `(0, a, −Σa)`), shape G: `(2g−2−Σm, m)`
/// (DR: `(−Σa, a)`); `ψ₀^{psi_pow}` sits on the first marking and `λ_lam` is inserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegralKey {
    pub kind: CycleKind,
    pub shape: Shape,
    pub g: u32,
    pub n: u32,
    pub psi_pow: u32,
    pub lam: u32,
}

impl fmt::Display for IntegralKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},g={},n={},psi={},lam={})",
            self.kind, self.shape, self.g, self.n, self.psi_pow, self.lam
        )
    }
}

impl IntegralKey {
    pub fn new(kind: CycleKind, shape: Shape, g: u32, n: u32, psi_pow: u32, lam: u32) -> Self {
        IntegralKey { kind, shape, g, n, psi_pow, lam }
    }

    /// Number of markings of the underlying moduli space.
    pub fn markings(&self) -> u32 {
        match self.shape {
            Shape::H => self.n + 2,
            Shape::G => self.n + 1,
        }
    }

    /// Whether `ψ₀^{psi_pow} λ_lam` fills the dimension of the cycle.
    pub fn is_dimensional(&self) -> bool {
        let big_n = self.markings() as i64;
        let cycle_dim = 2 * self.g as i64 - 3 + big_n;
        big_n + 2 * self.g as i64 >= 3 && (self.psi_pow + self.lam) as i64 == cycle_dim
    }

    /// Free-marking count forced by the dimension constraint, if nonnegative.
    pub fn dimensional_n(shape: Shape, g: u32, psi_pow: u32, lam: u32) -> Option<u32> {
        let shift = match shape {
            Shape::H => 1,
            Shape::G => 2,
        };
        let n = psi_pow as i64 + lam as i64 + shift - 2 * g as i64;
        u32::try_from(n).ok()
    }

    fn validate(&self) -> Result<()> {
        if self.lam > self.g {
            return Err(Error::Domain(format!("lambda index exceeds genus in {self}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Paper,
    Derived,
    External,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Paper => "paper",
            Provenance::Derived => "derived",
            Provenance::External => "external",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Provenance::Paper),
            "derived" => Ok(Provenance::Derived),
            "external" => Ok(Provenance::External),
            _ => Err(Error::Table(format!("unknown provenance {s:?}"))),
        }
    }
}

/// A served intersection polynomial. MD/DR¹ entries are in falling factorials of `m`,
/// DR entries are usually read in the monomial basis of `a` via [`Served::monomial`].
#[derive(Debug, Clone, PartialEq)]
pub struct Served {
    pub poly: FactorialPolynomial,
    pub provenance: Provenance,
    pub source: String,
}

impl Served {
    fn derived(poly: FactorialPolynomial, source: &str) -> Self {
        Served { poly, provenance: Provenance::Derived, source: source.to_string() }
    }

    pub fn monomial(&self) -> RatPoly {
        self.poly.to_monomial()
    }
}

/// Check the polynomiality invariants of an entry.
pub fn check_entry(key: &IntegralKey, poly: &FactorialPolynomial) -> Result<()> {
    if poly.nvars() != key.n as usize {
        return Err(Error::Table(format!("{key}: polynomial has {} variables", poly.nvars())));
    }
    if key.lam > key.g {
        return Err(Error::Table(format!("{key}: lambda index exceeds genus")));
    }
    if let Some(deg) = poly.degree() {
        if deg > 2 * key.g {
            return Err(Error::Table(format!("{key}: degree {deg} exceeds 2g")));
        }
    }
    if key.kind == CycleKind::MD && key.shape == Shape::H && !poly.is_homogeneous(2 * key.g) {
        return Err(Error::Table(format!("{key}: not homogeneous of factorial degree 2g")));
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct IntegralTable {
    entries: BTreeMap<IntegralKey, Served>,
}

impl IntegralTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<IntegralKey, Served> {
        &self.entries
    }

    pub fn insert(&mut self, key: IntegralKey, served: Served) -> Result<()> {
        check_entry(&key, &served.poly)?;
        if let Some(old) = self.entries.get(&key) {
            if old.poly != served.poly {
                return Err(Error::Table(format!("conflicting entries for {key}")));
            }
            return Ok(());
        }
        self.entries.insert(key, served);
        Ok(())
    }

    pub fn merge(&mut self, other: IntegralTable) -> Result<()> {
        for (k, v) in other.entries {
            self.insert(k, v)?;
        }
        Ok(())
    }

    pub fn lookup(&self, key: &IntegralKey) -> Result<&Served> {
        self.entries.get(key).ok_or_else(|| Error::coverage(*key))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Table("missing \"entries\" array".into()))?;
        let mut table = IntegralTable::new();
        for row in rows {
            let field = |name: &str| row.get(name).ok_or_else(|| Error::Table(format!("entry lacks {name:?}")));
            let text = |name: &str| -> Result<String> {
                field(name)?.as_str().map(str::to_string).ok_or_else(|| Error::Table(format!("{name:?} not a string")))
            };
            let num = |name: &str| -> Result<u32> {
                field(name)?
                    .as_u64()
                    .and_then(|x| u32::try_from(x).ok())
                    .ok_or_else(|| Error::Table(format!("{name:?} not a nonnegative integer")))
            };
            let key = IntegralKey {
                kind: text("kind")?.parse().map_err(|e: Error| Error::Table(e.to_string()))?,
                shape: text("shape")?.parse().map_err(|e: Error| Error::Table(e.to_string()))?,
                g: num("g")?,
                n: num("n")?,
                psi_pow: num("psi_pow")?,
                lam: num("lam")?,
            };
            let poly = FactorialPolynomial::from_json(field("poly")?).map_err(|e| Error::Table(format!("{key}: {e}")))?;
            let provenance = match row.get("provenance") {
                Some(p) => p.as_str().unwrap_or("").parse()?,
                None => Provenance::External,
            };
            let source = row.get("source").and_then(Value::as_str).unwrap_or("").to_string();
            table.insert(key, Served { poly, provenance, source })?;
        }
        Ok(table)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Table(e.to_string()))?;
        Self::from_json(&v)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .entries
            .iter()
            .map(|(k, s)| {
                json!({
                    "kind": k.kind.to_string(),
                    "shape": k.shape.to_string(),
                    "g": k.g,
                    "n": k.n,
                    "psi_pow": k.psi_pow,
                    "lam": k.lam,
                    "poly": s.poly.to_json(),
                    "provenance": s.provenance.to_string(),
                    "source": s.source,
                })
            })
            .collect();
        json!({ "entries": rows })
    }

    /// The genus-2 table shipped with the crate.
    pub fn shipped() -> Self {
        Self::parse(include_str!("../tables/genus2.json")).expect("shipped table is well formed")
    }

    /// Load every `*.json` file of a directory.
    pub fn load_dir(dir: &std::path::Path) -> Result<Self> {
        let mut table = IntegralTable::new();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::Table(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Table(format!("{}: {e}", p.display())))?;
            table.merge(Self::parse(&text)?)?;
        }
        Ok(table)
    }
}

/// Genus-0 strata, DR and DR¹ cycles are the fundamental class of `M̄_{0,N}`.
pub fn genus0(key: &IntegralKey) -> Result<FactorialPolynomial> {
    if key.g != 0 {
        return Err(Error::Unsupported(format!("genus0 called on {key}")));
    }
    key.validate()?;
    let n = key.n as usize;
    let big_n = key.markings() as usize;
    let mut d = vec![0u32; big_n];
    d[0] = key.psi_pow;
    let v = genus0_psi(&d);
    Ok(FactorialPolynomial::from_coeffs(n, [(vec![0; n], v)]))
}

pub use crate::moduli::psi_genus01;

/// Marking profile of a key as affine forms in its free variables.
pub fn profile(key: &IntegralKey) -> Vec<RatPoly> {
    let n = key.n as usize;
    let vars: Vec<RatPoly> = (0..n).map(|i| RatPoly::var(n, i)).collect();
    let sum = vars.iter().fold(RatPoly::zero(n), |a, v| &a + v);
    let two_g = 2 * key.g as i64;
    let dr = key.kind == CycleKind::DR;
    let mut out = Vec::with_capacity(n + 2);
    match key.shape {
        Shape::H => {
            out.push(RatPoly::constant(n, int(if dr { 0 } else { -1 })));
            out.extend(vars);
            let last = if dr { RatPoly::zero(n) } else { RatPoly::constant(n, int(two_g - 1)) };
            out.push(&last - &sum);
        }
        Shape::G => {
            let first = if dr { RatPoly::zero(n) } else { RatPoly::constant(n, int(two_g - 2)) };
            out.push(&first - &sum);
            out.extend(vars);
        }
    }
    out
}

fn psi_list(key: &IntegralKey) -> Vec<u32> {
    let mut e = vec![0u32; key.markings() as usize];
    e[0] = key.psi_pow;
    e
}

/// `∫_{DR₁(profile)} ψ₀^p λ₁^l` in the `a`-variables.
pub fn genus1_dr(key: &IntegralKey) -> Result<RatPoly> {
    if key.g != 1 {
        return Err(Error::Unsupported(format!("genus1_dr called on {key}")));
    }
    key.validate()?;
    let k = IntegralKey { kind: CycleKind::DR, ..*key };
    Ok(dr_genus1(&profile(&k), &psi_list(&k), k.lam))
}

/// Genus-1 strata integrals: in genus one DR¹ = DR on the strata profile, and
/// `∫_{DR¹₁}ψ₀^pλ₁ = ∫_{H̄₁}ψ₀^pλ₁ + (1/24)∫_{H̄₀(…,−2)}ψ₀^p`.
pub fn genus1_md(key: &IntegralKey) -> Result<FactorialPolynomial> {
    if key.g != 1 {
        return Err(Error::Unsupported(format!("genus1_md called on {key}")));
    }
    key.validate()?;
    let k = IntegralKey { kind: CycleKind::MD, ..*key };
    let n = k.n as usize;
    let mut p = dr_genus1(&profile(&k), &psi_list(&k), k.lam);
    if k.lam == 1 {
        let mut e = psi_list(&k);
        e.push(0);
        let corr = genus0_psi(&e) * rat(1, 24);
        p = &p - &RatPoly::constant(n, corr);
    }
    Ok(FactorialPolynomial::from_monomial(&p))
}

pub fn table_lookup(t: &IntegralTable, key: &IntegralKey) -> Result<Served> {
    t.lookup(key).cloned()
}

/// Anything that serves intersection polynomials by key.
pub trait IntegralProvider: Send + Sync {
    fn integral(&self, key: &IntegralKey) -> Result<Served>;
}

/// `∫_{DR¹_g} λ_l ψ₀^p = Σ_k (1/24)^k/k! ∫_{H̄_{g−k}(…,−2,…,−2)} λ_{l−k} ψ₀^p`,
/// the `k` extra markings being the last free variables specialized to `−2`.
pub fn dr1_from_md(mdp: &dyn IntegralProvider, key: &IntegralKey) -> Result<FactorialPolynomial> {
    key.validate()?;
    let n = key.n as usize;
    let mut acc = RatPoly::zero(n);
    let mut missing = Vec::new();
    for k in 0..=key.g.min(key.lam) {
        let sub = IntegralKey {
            kind: CycleKind::MD,
            shape: key.shape,
            g: key.g - k,
            n: key.n + k,
            psi_pow: key.psi_pow,
            lam: key.lam - k,
        };
        match mdp.integral(&sub) {
            Ok(s) => {
                let spec = s.monomial().specialize_tail(&vec![int(-2); k as usize]);
                let w = Rational::new(One::one(), factorial(k as u64) * num_bigint::BigInt::from(24).pow(k));
                acc = &acc + &spec.scale(&w);
            }
            Err(Error::Coverage { missing: m }) => missing.extend(m),
            Err(e) => return Err(e),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage { missing });
    }
    Ok(FactorialPolynomial::from_monomial(&acc))
}

/// Default provider for the trivial CohFT: closed forms in genus 0 and 1, the shipped
/// table (plus any user tables) in higher genus, DR¹ assembled from MD data.
pub struct StandardProvider {
    table: IntegralTable,
    memo: RwLock<HashMap<IntegralKey, Served>>,
}

impl Default for StandardProvider {
    fn default() -> Self {
        Self::with_table(IntegralTable::shipped())
    }
}

impl StandardProvider {
    pub fn with_table(table: IntegralTable) -> Self {
        StandardProvider { table, memo: RwLock::new(HashMap::new()) }
    }

    /// Analytic data only; every genus ≥ 2 key is a coverage error.
    pub fn analytic() -> Self {
        Self::with_table(IntegralTable::new())
    }

    pub fn table(&self) -> &IntegralTable {
        &self.table
    }

    fn compute(&self, key: &IntegralKey) -> Result<Served> {
        key.validate()?;
        let n = key.n as usize;
        if !key.is_dimensional() {
            return Ok(Served::derived(FactorialPolynomial::zero(n), "dimension"));
        }
        if key.g == 0 {
            return Ok(Served::derived(genus0(key)?, "genus0"));
        }
        if key.kind == CycleKind::DR1 {
            if let Ok(s) = self.table.lookup(key) {
                return Ok(s.clone());
            }
            return Ok(Served::derived(dr1_from_md(self, key)?, "dr1_from_md"));
        }
        if key.g == 1 {
            return match key.kind {
                CycleKind::MD => {
                    let poly = genus1_md(key)?;
                    let prov = if key.shape == Shape::G && key.lam == 1 { Provenance::Paper } else { Provenance::Derived };
                    Ok(Served { poly, provenance: prov, source: "genus1_md".into() })
                }
                _ => Ok(Served::derived(FactorialPolynomial::from_monomial(&genus1_dr(key)?), "genus1_dr")),
            };
        }
        table_lookup(&self.table, key)
    }
}

impl IntegralProvider for StandardProvider {
    fn integral(&self, key: &IntegralKey) -> Result<Served> {
        if let Some(s) = self.memo.read().expect("memo lock").get(key) {
            return Ok(s.clone());
        }
        let s = self.compute(key)?;
        self.memo.write().expect("memo lock").entry(*key).or_insert_with(|| s.clone());
        Ok(s)
    }
}

impl<P: IntegralProvider + ?Sized> IntegralProvider for &P {
    fn integral(&self, key: &IntegralKey) -> Result<Served> {
        (**self).integral(key)
    }
}

impl<P: IntegralProvider + ?Sized> IntegralProvider for std::sync::Arc<P> {
    fn integral(&self, key: &IntegralKey) -> Result<Served> {
        (**self).integral(key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(kind: CycleKind, shape: Shape, g: u32, n: u32, p: u32, l: u32) -> IntegralKey {
        IntegralKey::new(kind, shape, g, n, p, l)
    }

    fn fp(n: usize, rows: &[(&[u32], Rational)]) -> FactorialPolynomial {
        FactorialPolynomial::from_coeffs(n, rows.iter().map(|(s, c)| (s.to_vec(), c.clone())))
    }

    #[test]
    fn genus0_values() {
        let one = |n: u32| fp(n as usize, &[(&vec![0; n as usize], int(1))]);
        for d in 0..4 {
            assert_eq!(genus0(&key(CycleKind::MD, Shape::G, 0, d + 2, d, 0)).unwrap(), one(d + 2));
            assert!(genus0(&key(CycleKind::MD, Shape::G, 0, d + 3, d, 0)).unwrap().is_zero());
        }
        assert_eq!(genus0(&key(CycleKind::MD, Shape::H, 0, 2, 1, 0)).unwrap(), one(2));
        assert!(genus0(&key(CycleKind::MD, Shape::H, 0, 2, 1, 1)).is_err());
    }

    #[test]
    fn hain_anchor() {
        let k = key(CycleKind::MD, Shape::G, 1, 2, 1, 1);
        let got = genus1_md(&k).unwrap();
        let want = fp(2, &[(&[2, 0], rat(1, 24)), (&[0, 2], rat(1, 24)), (&[1, 0], rat(1, 24)), (&[0, 1], rat(1, 24)), (&[0, 0], rat(-1, 24))]);
        assert_eq!(got, want);
        let p = StandardProvider::analytic();
        assert_eq!(p.integral(&k).unwrap().provenance, Provenance::Paper);
        let dr = genus1_dr(&key(CycleKind::DR, Shape::G, 1, 2, 1, 1)).unwrap();
        let (x, y) = (RatPoly::var(2, 0), RatPoly::var(2, 1));
        assert_eq!(dr, (&x.pow(2) + &y.pow(2)).scale(&rat(1, 24)));
    }

    #[test]
    fn genus1_shape_h() {
        let md = genus1_md(&key(CycleKind::MD, Shape::H, 1, 1, 1, 1)).unwrap();
        assert_eq!(md, fp(1, &[(&[2], rat(1, 12))]));
        let dr = genus1_dr(&key(CycleKind::DR, Shape::H, 1, 1, 1, 1)).unwrap();
        assert_eq!(dr, RatPoly::var(1, 0).pow(2).scale(&rat(1, 12)));
        for (p, l) in [(1, 0), (0, 1)] {
            assert!(genus1_md(&key(CycleKind::MD, Shape::H, 1, 0, p, l)).unwrap().is_zero());
        }
    }

    #[test]
    fn shape_h_homogeneous_in_genus_one() {
        let p = StandardProvider::analytic();
        for lam in 0..=1 {
            for psi in 0..5 {
                if let Some(n) = IntegralKey::dimensional_n(Shape::H, 1, psi, lam) {
                    let s = p.integral(&key(CycleKind::MD, Shape::H, 1, n, psi, lam)).unwrap();
                    assert!(s.poly.is_homogeneous(2), "psi={psi} lam={lam}");
                }
            }
        }
    }

    #[test]
    fn dr1_equals_dr_in_genus_one() {
        let p = StandardProvider::analytic();
        for shape in [Shape::H, Shape::G] {
            for lam in 0..=1 {
                for psi in 0..4 {
                    let Some(n) = IntegralKey::dimensional_n(shape, 1, psi, lam) else { continue };
                    let dr1 = p.integral(&key(CycleKind::DR1, shape, 1, n, psi, lam)).unwrap();
                    let mut k = key(CycleKind::MD, shape, 1, n, psi, lam);
                    let direct = dr_genus1(&profile(&k), &psi_list(&k), lam);
                    k.kind = CycleKind::DR1;
                    assert_eq!(dr1.monomial(), direct, "{k}");
                }
            }
        }
    }

    #[test]
    fn genus2_without_table_is_coverage_error() {
        let p = StandardProvider::analytic();
        let k = key(CycleKind::MD, Shape::H, 2, 4, 5, 2);
        assert!(matches!(p.integral(&k), Err(Error::Coverage { .. })));
        assert!(p.integral(&key(CycleKind::MD, Shape::H, 2, 4, 6, 2)).unwrap().poly.is_zero());
    }

    #[test]
    fn table_rejects_inhomogeneous_shape_h() {
        let text = r#"{"entries":[{"kind":"MD","shape":"H","g":1,"n":1,"psi_pow":1,"lam":1,
            "poly":{"nvars":1,"basis":"falling","coeffs":[{"s":[1],"c":"1/2"}]},"provenance":"external","source":"x"}]}"#;
        assert!(matches!(IntegralTable::parse(text), Err(Error::Table(_))));
    }

    #[test]
    fn table_roundtrip() {
        let mut t = IntegralTable::new();
        let k = key(CycleKind::MD, Shape::H, 1, 1, 1, 1);
        t.insert(k, Served::derived(genus1_md(&k).unwrap(), "genus1_md")).unwrap();
        let back = IntegralTable::from_json(&t.to_json()).unwrap();
        assert_eq!(back.lookup(&k).unwrap().poly, t.lookup(&k).unwrap().poly);
        assert!(matches!(back.lookup(&key(CycleKind::MD, Shape::H, 1, 2, 2, 1)), Err(Error::Coverage { .. })));
    }
}
