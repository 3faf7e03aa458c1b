//! Exact scalars and the small combinatorial helpers shared by every module.

use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type GaussianRational = Complex<Rational>;

/// Exact field usable by the generic polynomial and linear-algebra layers.
pub trait Field: Clone + Num + Neg<Output = Self> + PartialEq + std::fmt::Debug {}

impl<T: Clone + Num + Neg<Output = T> + PartialEq + std::fmt::Debug> Field for T {}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn gr(re: Rational, im: Rational) -> GaussianRational {
    Complex::new(re, im)
}

pub fn gr_real(re: Rational) -> GaussianRational {
    Complex::new(re, Rational::zero())
}

pub fn gr_int(n: i64) -> GaussianRational {
    gr_real(int(n))
}

/// `i^k` for any integer `k`.
pub fn i_pow(k: i64) -> GaussianRational {
    match k.rem_euclid(4) {
        0 => gr_int(1),
        1 => gr(int(0), int(1)),
        2 => gr_int(-1),
        _ => gr(int(0), int(-1)),
    }
}

/// `(-i)^k`.
pub fn neg_i_pow(k: i64) -> GaussianRational {
    i_pow(-k)
}

pub fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn factorial_q(n: u64) -> Rational {
    Rational::from_integer(factorial(n))
}

/// Falling factorial `m (m-1) ... (m-s+1)` at an integer point.
pub fn falling(m: i64, s: u32) -> BigInt {
    (0..s as i64).fold(BigInt::one(), |acc, k| acc * BigInt::from(m - k))
}

pub fn falling_i128(m: i64, s: u32) -> i128 {
    (0..s as i64).fold(1i128, |acc, k| acc * (m - k) as i128)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Renders `p/q`, or `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Domain(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_gaussian(z: &GaussianRational) -> String {
    match (z.re.is_zero(), z.im.is_zero()) {
        (_, true) => format_rational(&z.re),
        (true, false) => format!("{}i", format_rational(&z.im)),
        (false, false) => {
            let sign = if z.im.is_negative() { '-' } else { '+' };
            format!("{} {} {}i", format_rational(&z.re), sign, format_rational(&z.im.abs()))
        }
    }
}

pub fn to_i64(r: &Rational) -> Option<i64> {
    use num_traits::ToPrimitive;
    if r.denom().is_one() {
        r.numer().to_i64()
    } else {
        None
    }
}
