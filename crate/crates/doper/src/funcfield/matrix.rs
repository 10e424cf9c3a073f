//! Matrices of rational functions with exact linear algebra.

use super::poly::Poly;
use super::rational::{PointOnLine, RationalFunction};
use super::FieldError;
use crate::fpcalc::Prime;
use std::fmt;

/// A rectangular matrix over `F_p(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    p: Prime,
    rows: usize,
    cols: usize,
    entries: Vec<RationalFunction>,
}

impl RatMatrix {
    pub fn from_fn(
        p: Prime,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> RationalFunction,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let e = f(i, j);
                assert_eq!(e.prime(), p, "mixed primes in matrix");
                entries.push(e);
            }
        }
        RatMatrix { p, rows, cols, entries }
    }

    pub fn from_rows(p: Prime, rows: Vec<Vec<RationalFunction>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RatMatrix::from_fn(p, r, c, |i, j| rows[i][j].clone())
    }

    pub fn zero(p: Prime, rows: usize, cols: usize) -> Self {
        RatMatrix::from_fn(p, rows, cols, |_, _| RationalFunction::zero(p))
    }

    pub fn identity(p: Prime, n: usize) -> Self {
        RatMatrix::from_fn(p, n, n, |i, j| {
            if i == j {
                RationalFunction::one(p)
            } else {
                RationalFunction::zero(p)
            }
        })
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(p: Prime, diag: &[RationalFunction]) -> Self {
        RatMatrix::from_fn(p, diag.len(), diag.len(), |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                RationalFunction::zero(p)
            }
        })
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RationalFunction) {
        assert_eq!(v.prime(), self.p, "mixed primes in matrix");
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn map(&self, mut f: impl FnMut(&RationalFunction) -> RationalFunction) -> Self {
        RatMatrix::from_fn(self.p, self.rows, self.cols, |i, j| f(self.get(i, j)))
    }

    pub fn add(&self, other: &RatMatrix) -> Result<RatMatrix, FieldError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FieldError::DimensionMismatch(format!(
                "add {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(RatMatrix::from_fn(self.p, self.rows, self.cols, |i, j| {
            self.get(i, j).add(other.get(i, j))
        }))
    }

    pub fn sub(&self, other: &RatMatrix) -> Result<RatMatrix, FieldError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatMatrix {
        self.map(|e| e.neg())
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix, FieldError> {
        if self.cols != other.rows {
            return Err(FieldError::DimensionMismatch(format!(
                "multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(RatMatrix::from_fn(self.p, self.rows, other.cols, |i, j| {
            let mut acc = RationalFunction::zero(self.p);
            for k in 0..self.cols {
                if self.get(i, k).is_zero() || other.get(k, j).is_zero() {
                    continue;
                }
                let term = self.get(i, k).mul(other.get(k, j));
                acc = acc.add(&term);
            }
            acc
        }))
    }

    pub fn scale(&self, f: &RationalFunction) -> RatMatrix {
        self.map(|e| e.mul(f))
    }

    pub fn transpose(&self) -> RatMatrix {
        RatMatrix::from_fn(self.p, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Entrywise formal derivative.
    pub fn derivative(&self) -> RatMatrix {
        self.map(|e| e.derivative())
    }

    /// Entrywise substitution `x -> 1/t`.
    pub fn chart_swap(&self) -> RatMatrix {
        self.map(|e| e.chart_swap())
    }

    pub fn trace(&self) -> Result<RationalFunction, FieldError> {
        if !self.is_square() {
            return Err(FieldError::DimensionMismatch(format!(
                "trace of {}x{}",
                self.rows, self.cols
            )));
        }
        let mut acc = RationalFunction::zero(self.p);
        for i in 0..self.rows {
            acc = acc.add(self.get(i, i));
        }
        Ok(acc)
    }

    /// Determinant by fraction-field Gaussian elimination.
    pub fn determinant(&self) -> Result<RationalFunction, FieldError> {
        if !self.is_square() {
            return Err(FieldError::DimensionMismatch(format!(
                "determinant of {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = RationalFunction::one(self.p);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.get(r, col).is_zero());
            let pr = match pivot {
                Some(pr) => pr,
                None => return Ok(RationalFunction::zero(self.p)),
            };
            if pr != col {
                m.swap_rows(pr, col);
                det = det.neg();
            }
            let pv = m.get(col, col).clone();
            det = det.mul(&pv);
            let pv_inv = pv.inv().expect("pivot nonzero");
            for r in col + 1..n {
                if m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).mul(&pv_inv);
                for c in col..n {
                    let v = m.get(r, c).sub(&factor.mul(m.get(col, c)));
                    m.set(r, c, v);
                }
            }
        }
        Ok(det)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Inverse by Gauss-Jordan elimination; `Singular` when not invertible.
    pub fn inverse(&self) -> Result<RatMatrix, FieldError> {
        if !self.is_square() {
            return Err(FieldError::DimensionMismatch(format!(
                "inverse of {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = RatMatrix::identity(self.p, n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.get(r, col).is_zero());
            let pr = pivot.ok_or(FieldError::Singular)?;
            m.swap_rows(pr, col);
            inv.swap_rows(pr, col);
            let pv_inv = m.get(col, col).inv().expect("pivot nonzero");
            for c in 0..n {
                m.set(col, c, m.get(col, c).mul(&pv_inv));
                inv.set(col, c, inv.get(col, c).mul(&pv_inv));
            }
            for r in 0..n {
                if r == col || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in 0..n {
                    let mv = m.get(r, c).sub(&factor.mul(m.get(col, c)));
                    m.set(r, c, mv);
                    let iv = inv.get(r, c).sub(&factor.mul(inv.get(col, c)));
                    inv.set(r, c, iv);
                }
            }
        }
        Ok(inv)
    }

    /// Solve `self * x = b` for a unique solution; `Singular` otherwise.
    pub fn solve(&self, b: &RatMatrix) -> Result<RatMatrix, FieldError> {
        self.inverse()?.mul(b)
    }

    /// Rank over `F_p(x)`.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0usize;
        let mut row = 0usize;
        for col in 0..m.cols {
            let pivot = (row..m.rows).find(|&r| !m.get(r, col).is_zero());
            let pr = match pivot {
                Some(pr) => pr,
                None => continue,
            };
            m.swap_rows(pr, row);
            let pv_inv = m.get(row, col).inv().expect("pivot nonzero");
            for r in row + 1..m.rows {
                if m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).mul(&pv_inv);
                for c in col..m.cols {
                    let v = m.get(r, c).sub(&factor.mul(m.get(row, c)));
                    m.set(r, c, v);
                }
            }
            rank += 1;
            row += 1;
            if row == m.rows {
                break;
            }
        }
        rank
    }

    /// Evaluate every entry at a point of the projective line (infinity is
    /// reached through the chart swap).
    pub fn eval_at(&self, pt: PointOnLine) -> Result<Vec<Vec<u32>>, FieldError> {
        let mut out = vec![vec![0u32; self.cols]; self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[i][j] = self.get(i, j).value_at(pt)?;
            }
        }
        Ok(out)
    }

    /// Entrywise residue of `self * dx` at a point.
    pub fn residue_at(&self, pt: PointOnLine) -> Result<Vec<Vec<u32>>, FieldError> {
        let mut out = vec![vec![0u32; self.cols]; self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[i][j] = self.get(i, j).residue_at(pt)?;
            }
        }
        Ok(out)
    }

    /// Characteristic polynomial det(x*I - M) of a scalar matrix over `F_p`,
    /// computed exactly through rational-function elimination.
    pub fn char_poly_of(p: Prime, m: &[Vec<u32>]) -> Poly {
        let n = m.len();
        assert!(m.iter().all(|row| row.len() == n), "square input required");
        let xm = RatMatrix::from_fn(p, n, n, |i, j| {
            let c = RationalFunction::constant(p, p.neg(m[i][j]));
            if i == j {
                c.add(&RationalFunction::x(p))
            } else {
                c
            }
        });
        let det = xm.determinant().expect("square");
        det.as_poly().expect("char poly is a polynomial").clone()
    }
}

/// Rank of a scalar matrix over `F_p` (in-place elimination on a copy).
pub fn fp_rank(p: Prime, m: &[Vec<u32>]) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<u32>> = m.to_vec();
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..cols {
        let pivot = (row..rows).find(|&r| a[r][col] != 0);
        let pr = match pivot {
            Some(pr) => pr,
            None => continue,
        };
        a.swap(pr, row);
        let inv = p.inv(a[row][col]);
        for r in row + 1..rows {
            if a[r][col] == 0 {
                continue;
            }
            let factor = p.mul(a[r][col], inv);
            for c in col..cols {
                let sub = p.mul(factor, a[row][c]);
                a[r][c] = p.sub(a[r][c], sub);
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
