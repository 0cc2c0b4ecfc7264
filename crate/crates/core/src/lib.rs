//! Averages of ratios of characteristic polynomials over β=1 (orthogonal) and
//! β=4 (symplectic) random matrix ensembles, evaluated through Pfaffians of
//! small moment-built matrices and checked against brute-force integration.
//!
//! Module map:
//! - [`skew_linalg`]: Pfaffians, skew inverses, Vandermonde and Cauchy identities.
//! - [`quadrature`]: Gauss rules and the pole-aware panel grid used by the reductions.
//! - [`ensembles`]: weights and their reduced one- and two-point integrals.
//! - [`kernels`]: moment-matrix kernels and the Pfaffian formulas for `Z`.
//! - [`skew_poly`]: skew-orthogonal polynomials extracted from a moment matrix.
//! - [`oracle`]: eigenvalue quadrature, matrix Monte Carlo, confluent pair limits.
//! - [`cli`]: the `pfrmt` command-line front end.

pub mod cli;
pub mod ensembles;
pub mod error;
pub mod kernels;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod skew_linalg;
pub mod skew_poly;

pub use error::{PfrmtError, Result};
pub use num_complex::Complex64;
pub use scalar::Precision;

/// Library version reported in run results.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
