//! Logarithmic connections and opers on the marked projective line over
//! `F_p`.
//!
//! The engine works on the affine chart with the point at infinity handled
//! through explicit chart swaps. A rank-n bundle appears as a pair of
//! lattices in `F_p(x)^n`: the working frame spans the affine lattice, and a
//! second basis (columns of an invertible rational matrix) spans the lattice
//! at infinity. Connections are stored as the matrix `A` with
//! `nabla = d + A dx` in the working frame.
//!
//! On top of that substrate sit:
//! - the canonical log vector field and its p-th symbolic power,
//! - exact p-curvature through Ore-algebra rewriting,
//! - monodromy and exponent extraction at marked points,
//! - determinant data (a line bundle plus a rank-1 connection on the
//!   determinant line) and its dual / triangle / star companions,
//! - the rank-p differential-operator oper attached to a line bundle, the
//!   kernel construction that cuts out its complement, and the full star
//!   duality on opers,
//! - a self-contained hypergeometric brute-force oracle for rank-2 dormancy
//!   counts at three marked points.

mod base;
mod brute;
mod connection;
mod detdata;
mod oper;
mod ore;
mod serial;

pub use base::{symbolic_power_of, LineBundleDatum, LogVectorField, MarkedLine};
pub use brute::{brute_force_sl2_count, brute_force_sl2_oper};
pub use connection::{line_connection, LogConnection};
pub use detdata::{canonical_p_data, determinant_data_construct, DeterminantData};
pub use oper::{
    build_dpsi, dualize_nabla, dualize_triangle, eta_tilde, oper_check, oper_isomorphism,
    rank1_oper, star_oper, tensor_line_oper, unique_gl_pminus1, OperData,
};
pub use ore::{p_curvature, p_curvature_raw};
pub use serial::{emit_oper, parse_oper};

use crate::fpcalc::FpError;
use crate::funcfield::FieldError;
use thiserror::Error;

/// Errors from connection and oper computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Fp(#[from] FpError),
    #[error("invalid base data: {0}")]
    InvalidBase(String),
    #[error("characteristic polynomial does not split over F_p: {0}")]
    NonSplitCharPoly(String),
    #[error("connection has nonzero p-curvature")]
    NotDormant,
    #[error("exponents are not pairwise distinct: {0}")]
    IndistinctExponents(String),
    #[error("kernel saturation failed: {0}")]
    SaturationFailure(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("oper validation failed: {}", .0.join("; "))]
    CheckFailed(Vec<String>),
    #[error("cannot parse oper data: {0}")]
    ParseOper(String),
}
