//! Exact loop-space calculus, quantum brackets, and the meromorphic-differential,
//! double-ramification and twisted DR hierarchies of the trivial cohomological
//! field theory.

pub mod brackets;
pub mod calculus;
pub mod coeffring;
pub mod commuting;
pub mod error;
pub mod hierarchy;
pub mod linalg;
pub mod loopspace;
pub mod moduli;
pub mod poly;
pub mod providers;
pub mod scalar;
pub mod suites;
pub mod tau;
pub mod urep;

pub use coeffring::{Bounds, CoeffSeries};
pub use error::{Error, Result};
pub use loopspace::{PhaseFrame, QElement, QMonomial, TruncationSpec};
pub use poly::{MPoly, RatPoly};
pub use scalar::{GaussianRational, Rational};
pub use urep::{FactorialPolynomial, UMonomial, UPolynomial};
