//! Exact arithmetic for dormant logarithmic connections on the marked
//! projective line in characteristic `p`.
//!
//! The crate is organized around five layers:
//!
//! - [`fpcalc`]: multisets of exponents in `F_p`, shift/complement/star
//!   operators, and translation classes ("radii") with canonical
//!   representatives.
//! - [`funcfield`]: dense polynomials and reduced rational functions over
//!   `F_p`, residues in dlog normalization, the chart swap `x -> 1/t`, and
//!   saturated kernel bases of polynomial matrices.
//! - [`operengine`]: logarithmic connections on the `r`-marked projective
//!   line, p-curvature, determinant data, the differential-operator bundle
//!   `D^Psi`, and the kernel-duality constructions on opers.
//! - [`fusion`]: three-point degree tables, the associated commutative ring,
//!   its real characters, and higher-genus degree formulas.
//! - [`verlinde`]: exact arithmetic in `Q(zeta_p)` and the closed-form
//!   degree summation over tuples of p-th roots of unity.
//!
//! All arithmetic is exact: residues mod `p`, polynomials with reduced
//! coefficients, big rationals, and cyclotomic integers in the power basis.
//! Floating point never enters a computation; it appears only as a
//! convenience type for tolerance inputs and readouts.

pub mod fpcalc;
pub mod funcfield;
pub mod fusion;
pub mod operengine;
mod ratpoly;
pub mod verlinde;
