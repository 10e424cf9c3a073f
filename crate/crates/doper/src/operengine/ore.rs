//! Exact p-curvature through Ore-algebra normal forms.
//!
//! For a connection `nabla = d + A dx` and the field `D = h d/dx`, the
//! operator `L = D + A_D` (with `A_D = h A`) is raised to the p-th power in
//! the Ore algebra of matrix-coefficient differential operators, using the
//! commutation rule `D * f = f * D + h f'`. Subtracting `g D + g A_D`
//! (where `g` is the p-th symbolic power scalar of `D`) and reducing the
//! top term by the operator identity `D^p = g D` on functions leaves an
//! order-zero operator: the p-curvature value on `D^(tensor p)`. All
//! higher-order coefficients must cancel exactly; a survivor indicates an
//! arithmetic bug, never bad input.

use super::base::{symbolic_power_of, LogVectorField};
use super::connection::LogConnection;
use super::OperError;
use crate::funcfield::{Poly, RatMatrix, RationalFunction};

/// The p-curvature matrix of `nabla = d + A dx` against the field `h d/dx`,
/// in the frame in which `a` is expressed. `h` must be squarefree (or a
/// nonzero constant).
pub fn p_curvature_raw(a: &RatMatrix, h: &Poly) -> Result<RatMatrix, OperError> {
    if !a.is_square() {
        return Err(OperError::InvalidBase(
            "connection matrix must be square".into(),
        ));
    }
    let p = a.prime();
    let pv = p.get() as usize;
    let n = a.rows();
    let h_rf = RationalFunction::from_poly(h.clone());
    let a_d = a.scale(&h_rf);
    let g = RationalFunction::from_poly(symbolic_power_of(p, h));

    // coeffs[k] is the coefficient of D^k in L^(iteration count).
    let mut coeffs = vec![RatMatrix::identity(p, n)];
    for _ in 0..pv {
        let mut next = vec![RatMatrix::zero(p, n, n); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            // L * C D^k = C D^(k+1) + (h C' + A_D C) D^k
            next[k + 1] = next[k + 1].add(c).expect("same dims");
            let drop = c.derivative().scale(&h_rf).add(&a_d.mul(c).expect("square"));
            next[k] = next[k].add(&drop.expect("same dims")).expect("same dims");
        }
        coeffs = next;
    }

    // Subtract g*(D + A_D), then rewrite the top term via D^p = g D.
    coeffs[1] = coeffs[1].sub(&RatMatrix::identity(p, n).scale(&g)).expect("same dims");
    coeffs[0] = coeffs[0].sub(&a_d.scale(&g)).expect("same dims");
    let top = coeffs[pv].scale(&g);
    coeffs[1] = coeffs[1].add(&top).expect("same dims");
    coeffs[pv] = RatMatrix::zero(p, n, n);

    for (k, c) in coeffs.iter().enumerate().skip(1) {
        if !c.is_zero() {
            return Err(OperError::InternalInconsistency(format!(
                "p-curvature left a nonzero coefficient at operator order {k}"
            )));
        }
    }
    Ok(coeffs.swap_remove(0))
}

/// The p-curvature of a connection against a log vector field on the same
/// marked line, in the connection's working frame.
pub fn p_curvature(
    conn: &LogConnection,
    field: &LogVectorField,
) -> Result<RatMatrix, OperError> {
    if field.base() != conn.base() {
        return Err(OperError::InvalidBase(
            "vector field and connection live on different marked lines".into(),
        ));
    }
    p_curvature_raw(conn.a(), &field.h())
}
