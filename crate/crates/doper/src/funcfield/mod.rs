//! Exact arithmetic over `F_p[x]` and `F_p(x)`.
//!
//! - [`Poly`]: dense polynomials with eagerly reduced coefficients.
//! - [`RationalFunction`]: reduced fractions with monic denominator;
//!   derivatives, valuations, residues in dlog normalization, and the
//!   chart swap `x -> 1/t` for working at infinity.
//! - [`RatMatrix`]: rectangular matrices over `F_p(x)` with exact linear
//!   algebra (determinant, inverse, solve, rank).
//! - [`hermite_kernel_basis`]: a saturated, column-reduced basis over
//!   `F_p[x]` of the kernel of a matrix, used to cut out subbundles.
//!
//! Everything here is a pure value; no interior mutability.

mod kernel;
mod matrix;
mod poly;
mod rational;

pub use kernel::hermite_kernel_basis;
pub use matrix::{fp_rank, RatMatrix};
pub use poly::Poly;
pub use rational::{PointOnLine, RationalFunction};

use thiserror::Error;

/// Errors from function-field arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("pole of order > 1 at the requested point")]
    HigherOrderPole,
    #[error("evaluation at a pole")]
    PoleAtEvaluation,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot parse {0:?}: {1}")]
    Parse(String, String),
}
