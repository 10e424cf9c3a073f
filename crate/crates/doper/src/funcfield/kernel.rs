//! Saturated kernel lattices of rational matrices over `F_p[x]`.

use super::matrix::RatMatrix;
use super::poly::Poly;
use crate::fpcalc::Prime;

/// Basis of the lattice `{v in F_p[x]^m : M v = 0}` as columns of
/// polynomials, in column echelon form: pivot rows (the last nonzero row of
/// each column) strictly increasing, pivot entries monic, and every other
/// column reduced below the pivot degree at each pivot row.
///
/// The lattice is saturated by construction (a polynomial vector killed by
/// `M` over the fraction field is already in the lattice), so each basis
/// column is primitive.
pub fn hermite_kernel_basis(m: &RatMatrix) -> Vec<Vec<Poly>> {
    let p = m.prime();
    let rows = m.rows();
    let cols = m.cols();

    // Clear denominators row by row; the kernel is unchanged.
    // Work columns carry the cleared matrix stacked on top of an identity
    // block, so every column operation also updates the transformation.
    let mut work: Vec<Vec<Poly>> = (0..cols)
        .map(|j| {
            let mut col = vec![Poly::zero(p); rows + cols];
            col[rows + j] = Poly::one(p);
            col
        })
        .collect();
    for i in 0..rows {
        let mut l = Poly::one(p);
        for j in 0..cols {
            let den = m.get(i, j).den();
            let g = l.gcd(den);
            l = l.mul(&den.divrem(&g).expect("nonzero gcd").0);
        }
        for (j, col) in work.iter_mut().enumerate() {
            let cleared = m.get(i, j).mul(&super::RationalFunction::from_poly(l.clone()));
            col[i] = cleared
                .as_poly()
                .expect("denominator cleared by row lcm")
                .clone();
        }
    }

    let mut active: Vec<usize> = (0..cols).collect();
    for i in 0..rows {
        cascade(&mut work, &mut active, i);
    }

    let mut kernel: Vec<Vec<Poly>> = active
        .iter()
        .map(|&j| {
            debug_assert!(work[j][..rows].iter().all(|e| e.is_zero()));
            work[j][rows..].to_vec()
        })
        .collect();
    bottom_echelon(p, &mut kernel);
    kernel
}

/// Euclidean column cascade on one row: among the active columns, reduce
/// until at most one keeps a nonzero entry in that row, then retire it from
/// the active set. All operations are invertible column operations.
fn cascade(work: &mut Vec<Vec<Poly>>, active: &mut Vec<usize>, row: usize) {
    loop {
        let mut nonzero: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&j| !work[j][row].is_zero())
            .collect();
        match nonzero.len() {
            0 => return,
            1 => {
                let j = nonzero[0];
                active.retain(|&a| a != j);
                return;
            }
            _ => {}
        }
        nonzero.sort_by_key(|&j| (work[j][row].degree().unwrap(), j));
        let jmin = nonzero[0];
        for &j in &nonzero[1..] {
            let q = work[j][row]
                .divrem(&work[jmin][row])
                .expect("nonzero pivot")
                .0;
            column_sub(work, j, jmin, &q);
        }
    }
}

/// `work[target] -= q * work[source]`.
fn column_sub(work: &mut [Vec<Poly>], target: usize, source: usize, q: &Poly) {
    if q.is_zero() {
        return;
    }
    for i in 0..work[target].len() {
        let delta = q.mul(&work[source][i]);
        work[target][i] = work[target][i].sub(&delta);
    }
}

fn last_nonzero_row(col: &[Poly]) -> Option<usize> {
    col.iter().rposition(|e| !e.is_zero())
}

/// Normalize a set of independent columns to bottom-pivot echelon form.
fn bottom_echelon(p: Prime, cols: &mut Vec<Vec<Poly>>) {
    // Distinct pivot rows first: cascade within any group sharing one.
    loop {
        let mut by_pivot: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (j, col) in cols.iter().enumerate() {
            let r = last_nonzero_row(col).expect("kernel basis column is nonzero");
            by_pivot.entry(r).or_default().push(j);
        }
        let clash = by_pivot.into_iter().rev().find(|(_, js)| js.len() > 1);
        let (row, mut group) = match clash {
            Some(c) => c,
            None => break,
        };
        cascade(cols, &mut group, row);
    }
    cols.sort_by_key(|col| last_nonzero_row(col).unwrap());
    // Monic pivots, then clear above-pivot entries of the other columns.
    let pivots: Vec<usize> = cols
        .iter()
        .map(|col| last_nonzero_row(col).unwrap())
        .collect();
    for j in 0..cols.len() {
        let lc = cols[j][pivots[j]].leading();
        if lc != 1 {
            let inv = p.inv(lc);
            for e in cols[j].iter_mut() {
                *e = e.mul_scalar(inv);
            }
        }
    }
    for j in (0..cols.len()).rev() {
        let row = pivots[j];
        for other in 0..cols.len() {
            if other == j || cols[other][row].is_zero() {
                continue;
            }
            let q = cols[other][row]
                .divrem(&cols[j][row])
                .expect("monic pivot")
                .0;
            if q.is_zero() {
                continue;
            }
            for i in 0..cols[other].len() {
                let delta = q.mul(&cols[j][i]);
                cols[other][i] = cols[other][i].sub(&delta);
            }
        }
    }
}
