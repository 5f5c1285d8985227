//! Sparse multivariate polynomials with `f64` coefficients.

mod matrix;
mod monomial;
mod parse;
mod polynomial;
mod system;

pub use matrix::{jacobian, minors, PolyMatrix};
pub use monomial::{binomial, count_up_to, monomials_of_degree, monomials_up_to, Monomial};
pub use parse::{parse_polynomial, parse_system, ParseError, ParseErrorKind};
pub(crate) use parse::{parse_header, parse_polynomial_at, statements, strip_comment};
pub use polynomial::{Polynomial, DEFAULT_DROP_TOL};
pub use system::{format_coefficient, format_polynomial, format_system, PolynomialSystem};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomials live in different rings ({left} vs {right} variables)")]
    ArityMismatch { left: usize, right: usize },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("division is not exact (relative remainder {remainder:e})")]
    InexactDivision { remainder: f64 },
    #[error("minor size {size} exceeds a {rows}x{cols} matrix")]
    MinorTooLarge { size: usize, rows: usize, cols: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}
