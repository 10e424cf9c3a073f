//! Logarithmic connections as two-lattice data over the marked line.

use super::base::MarkedLine;
use super::ore::p_curvature_raw;
use super::OperError;
use crate::fpcalc::ExponentMultiset;
use crate::funcfield::{PointOnLine, RatMatrix, RationalFunction};

/// A connection `nabla = d + A dx` on a rank-n bundle over a marked line.
///
/// The bundle is the pair of lattices (affine span of the working frame,
/// span of the `inf_frame` columns at infinity); `a` is the connection
/// matrix in the working frame. The logarithmic-pole condition is not
/// enforced at construction; query it with [`LogConnection::is_log`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogConnection {
    base: MarkedLine,
    a: RatMatrix,
    inf_frame: RatMatrix,
}

impl LogConnection {
    /// Builds a connection from its matrix and an explicit lattice basis at
    /// infinity (columns, in working-frame coordinates).
    pub fn new(base: MarkedLine, a: RatMatrix, inf_frame: RatMatrix) -> Result<Self, OperError> {
        if !a.is_square() {
            return Err(OperError::InvalidBase(
                "connection matrix must be square".into(),
            ));
        }
        if a.prime() != base.prime() || inf_frame.prime() != base.prime() {
            return Err(OperError::InvalidBase("prime mismatch".into()));
        }
        if inf_frame.rows() != a.rows() || inf_frame.cols() != a.cols() {
            return Err(OperError::InvalidBase(
                "infinity frame must match the connection rank".into(),
            ));
        }
        let det = inf_frame.determinant()?;
        if det.is_zero() {
            return Err(OperError::InvalidBase(
                "infinity frame is singular".into(),
            ));
        }
        Ok(Self {
            base,
            a,
            inf_frame,
        })
    }

    /// A connection whose lattice at infinity is spanned by the working
    /// frame itself.
    pub fn from_affine(base: MarkedLine, a: RatMatrix) -> Result<Self, OperError> {
        let id = RatMatrix::identity(base.prime(), a.rows());
        Self::new(base, a, id)
    }

    pub fn base(&self) -> &MarkedLine {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.a.rows()
    }

    /// The connection matrix in the working frame (`nabla = d + A dx`).
    pub fn a(&self) -> &RatMatrix {
        &self.a
    }

    /// Columns spanning the lattice at infinity, in working coordinates.
    pub fn inf_frame(&self) -> &RatMatrix {
        &self.inf_frame
    }

    /// The connection matrix in the infinity frame:
    /// `A_inf = M^(-1) (M' + A M)`.
    pub fn a_inf(&self) -> RatMatrix {
        let m = &self.inf_frame;
        let minv = m.inverse().expect("inf frame validated invertible");
        let rhs = m
            .derivative()
            .add(&self.a.mul(m).expect("dims"))
            .expect("dims");
        minv.mul(&rhs).expect("dims")
    }

    /// True when `A dx` has at most simple poles, all at marked points: on
    /// the affine chart every entry's denominator is a product of distinct
    /// marked linear factors, and in the infinity frame every entry of
    /// `A_inf` vanishes at infinity to order at least one.
    pub fn is_log(&self) -> bool {
        let finite = self.base.finite_marked();
        for i in 0..self.a.rows() {
            for j in 0..self.a.cols() {
                if !entry_is_log_affine(self.a.get(i, j), &finite) {
                    return false;
                }
            }
        }
        let a_inf = self.a_inf();
        for i in 0..a_inf.rows() {
            for j in 0..a_inf.cols() {
                let e = a_inf.get(i, j);
                if !e.is_zero() && e.ord_at(PointOnLine::Infinity) < 1 {
                    return false;
                }
            }
        }
        true
    }

    /// The residue endomorphism of `A dx` at a point, in the lattice frame
    /// there (working frame at finite points, infinity frame at infinity).
    pub fn monodromy(&self, pt: PointOnLine) -> Result<Vec<Vec<u32>>, OperError> {
        let m = match pt {
            PointOnLine::Finite(_) => self.a.residue_at(pt)?,
            PointOnLine::Infinity => self.a_inf().residue_at(pt)?,
        };
        Ok(m)
    }

    /// The multiset of eigenvalues of the monodromy at a point. Fails with
    /// `NonSplitCharPoly` when the characteristic polynomial has roots
    /// outside `F_p` (which cannot happen for dormant connections).
    pub fn exponents(&self, pt: PointOnLine) -> Result<ExponentMultiset, OperError> {
        let p = self.base.prime();
        let mu = self.monodromy(pt)?;
        let phi = RatMatrix::char_poly_of(p, &mu);
        let roots = phi.roots_with_multiplicity();
        let total: usize = roots.iter().map(|(_, m)| m).sum();
        if total != self.rank() {
            return Err(OperError::NonSplitCharPoly(format!(
                "at {pt}: {}",
                phi.display_mod()
            )));
        }
        let mut entries = Vec::with_capacity(total);
        for (root, mult) in roots {
            entries.extend(std::iter::repeat(root).take(mult));
        }
        Ok(ExponentMultiset::new(p, entries)?)
    }

    /// The induced rank-1 connection on the determinant line: trace matrix,
    /// determinant lattice at infinity.
    pub fn det_connection(&self) -> LogConnection {
        let p = self.base.prime();
        let tr = self.a.trace().expect("square");
        let det = self.inf_frame.determinant().expect("square");
        LogConnection::new(
            self.base.clone(),
            RatMatrix::from_rows(p, vec![vec![tr]]),
            RatMatrix::from_rows(p, vec![vec![det]]),
        )
        .expect("det of invertible frame is nonzero")
    }

    /// The dual connection `-A^T` with the dual lattice at infinity.
    pub fn dual_connection(&self) -> LogConnection {
        let a = self.a.transpose().neg();
        let m = self
            .inf_frame
            .inverse()
            .expect("inf frame validated invertible")
            .transpose();
        LogConnection::new(self.base.clone(), a, m).expect("dual frame invertible")
    }

    /// The tensor product connection (Leibniz sum, Kronecker lattices).
    pub fn tensor_connection(&self, other: &LogConnection) -> Result<LogConnection, OperError> {
        if self.base != other.base {
            return Err(OperError::InvalidBase(
                "tensor factors live on different marked lines".into(),
            ));
        }
        let p = self.base.prime();
        let id_l = RatMatrix::identity(p, self.rank());
        let id_r = RatMatrix::identity(p, other.rank());
        let a = kron(&self.a, &id_r)
            .add(&kron(&id_l, &other.a))
            .expect("dims");
        let m = kron(&self.inf_frame, &other.inf_frame);
        LogConnection::new(self.base.clone(), a, m)
    }

    /// True iff the p-curvature against the canonical log field vanishes.
    pub fn is_dormant(&self) -> Result<bool, OperError> {
        let psi = p_curvature_raw(&self.a, &self.base.h())?;
        Ok(psi.is_zero())
    }

    /// Degree of the underlying two-lattice bundle.
    pub fn degree_honest(&self) -> i64 {
        let det = self.inf_frame.determinant().expect("square");
        -det.ord_at(PointOnLine::Infinity)
    }
}

/// True when the denominator is a product of distinct factors `x - lambda`
/// over the given points (so: at most simple poles, only at those points,
/// and none at irrational places).
fn entry_is_log_affine(f: &RationalFunction, finite_marked: &[u32]) -> bool {
    if f.is_zero() {
        return true;
    }
    let den = f.den();
    let mut simple_roots = 0usize;
    for &lambda in finite_marked {
        match den.root_multiplicity(lambda) {
            0 => {}
            1 => simple_roots += 1,
            _ => return false,
        }
    }
    den.degree() == Some(simple_roots)
}

/// A rank-1 connection `d + form dx` with the trivial lattice at infinity.
pub fn line_connection(base: &MarkedLine, form: &RationalFunction) -> LogConnection {
    let p = base.prime();
    LogConnection::from_affine(base.clone(), RatMatrix::from_rows(p, vec![vec![form.clone()]]))
        .expect("1x1 identity frame")
}

/// Kronecker product with blocks `x[i][j] * y`.
fn kron(x: &RatMatrix, y: &RatMatrix) -> RatMatrix {
    let p = x.prime();
    let (rx, cx, ry, cy) = (x.rows(), x.cols(), y.rows(), y.cols());
    RatMatrix::from_fn(p, rx * ry, cx * cy, |i, j| {
        x.get(i / ry, j / cy).mul(y.get(i % ry, j % cy))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpcalc::Prime;
    use crate::funcfield::Poly;

    fn p5() -> Prime {
        Prime::new(5).unwrap()
    }

    fn dlog_x(p: Prime, c: u32) -> RationalFunction {
        RationalFunction::parse("1/x", p).unwrap().mul_scalar(c)
    }

    #[test]
    fn monodromy_reads_residues() {
        let p = p5();
        let base = MarkedLine::standard(p);
        // d + 3 dlog(x): residue 3 at 0, zero at 1 and infinity-compensated.
        let conn = line_connection(&base, &dlog_x(p, 3));
        assert!(conn.is_log());
        assert_eq!(conn.monodromy(PointOnLine::Finite(0)).unwrap(), vec![vec![3]]);
        assert_eq!(conn.monodromy(PointOnLine::Finite(1)).unwrap(), vec![vec![0]]);
        assert_eq!(
            conn.monodromy(PointOnLine::Infinity).unwrap(),
            vec![vec![2]]
        );

        // diag(c1, c2) dlog(x) at 0.
        let a = RatMatrix::diagonal(p, &[dlog_x(p, 1), dlog_x(p, 4)]);
        let conn = LogConnection::from_affine(base, a).unwrap();
        let mu = conn.monodromy(PointOnLine::Finite(0)).unwrap();
        assert_eq!(mu, vec![vec![1, 0], vec![0, 4]]);
        let tau = conn.exponents(PointOnLine::Finite(0)).unwrap();
        assert_eq!(tau.entries(), &[1, 4]);
    }

    #[test]
    fn trivial_connection_is_dormant_with_zero_exponents() {
        let p = p5();
        let base = MarkedLine::standard(p);
        let conn = LogConnection::from_affine(base, RatMatrix::zero(p, 2, 2)).unwrap();
        assert!(conn.is_log());
        assert!(conn.is_dormant().unwrap());
        for pt in [
            PointOnLine::Finite(0),
            PointOnLine::Finite(1),
            PointOnLine::Infinity,
        ] {
            assert_eq!(conn.exponents(pt).unwrap().entries(), &[0, 0]);
        }
    }

    #[test]
    fn dlog_connections_are_dormant() {
        // d + dlog(x^2 (x-1)^3): a rational gauge of the trivial connection.
        let p = p5();
        let base = MarkedLine::standard(p);
        let cube = RationalFunction::from_poly(Poly::from_roots(p, &[1, 1, 1]));
        let f = RationalFunction::parse("x^2", p).unwrap().mul(&cube);
        let conn = line_connection(&base, &f.dlog().unwrap());
        assert!(conn.is_log());
        assert!(conn.is_dormant().unwrap());
        assert_eq!(conn.exponents(PointOnLine::Finite(0)).unwrap().entries(), &[2]);
        assert_eq!(conn.exponents(PointOnLine::Finite(1)).unwrap().entries(), &[3]);
        assert_eq!(conn.exponents(PointOnLine::Infinity).unwrap().entries(), &[0]);
    }

    #[test]
    fn log_condition_rejects_bad_poles() {
        let p = p5();
        let base = MarkedLine::standard(p);
        // Pole at an unmarked rational point.
        let f = RationalFunction::parse("1/(x-2)", p).unwrap();
        assert!(!line_connection(&base, &f).is_log());
        // Double pole at a marked point.
        let f = RationalFunction::parse("1/(x^2)", p).unwrap();
        assert!(!line_connection(&base, &f).is_log());
        // Irrational poles: x^2 + 2 has no roots mod 5.
        let f = RationalFunction::parse("1/(x^2+2)", p).unwrap();
        assert!(!line_connection(&base, &f).is_log());
        // Polynomial entry: pole of order 2 at infinity after dx.
        let f = RationalFunction::parse("x", p).unwrap();
        assert!(!line_connection(&base, &f).is_log());
    }

    #[test]
    fn det_dual_tensor_follow_trace_negation_and_shift() {
        let p = p5();
        let base = MarkedLine::standard(p);
        let a = RatMatrix::diagonal(p, &[dlog_x(p, 1), dlog_x(p, 2)]);
        let conn = LogConnection::from_affine(base.clone(), a).unwrap();

        let det = conn.det_connection();
        assert_eq!(*det.a().get(0, 0), dlog_x(p, 3));

        let dual = line_connection(&base, &dlog_x(p, 2)).dual_connection();
        assert_eq!(*dual.a().get(0, 0), dlog_x(p, 3));

        // Tensor with an exponent-[4] line shifts exponents by 4.
        let line = line_connection(&base, &dlog_x(p, 4));
        let t = conn.tensor_connection(&line).unwrap();
        let tau = t.exponents(PointOnLine::Finite(0)).unwrap();
        assert_eq!(tau.entries(), &[0, 1]);
        assert_eq!(t.rank(), 2);
    }

    #[test]
    fn infinity_frame_shifts_degree_and_monodromy() {
        let p = p5();
        let base = MarkedLine::standard(p);
        // Trivial connection with lattice x * O at infinity: degree 1, and
        // the monodromy at infinity picks up the residue of dlog(x).
        let m = RatMatrix::from_rows(p, vec![vec![RationalFunction::x(p)]]);
        let conn = LogConnection::new(base, RatMatrix::zero(p, 1, 1), m).unwrap();
        assert_eq!(conn.degree_honest(), 1);
        assert!(conn.is_log());
        assert_eq!(
            conn.monodromy(PointOnLine::Infinity).unwrap(),
            vec![vec![p.get() - 1]]
        );
    }

    #[test]
    fn nonsplit_spectrum_is_reported() {
        // Residue [[0, 2], [1, 0]] at 0: char poly t^2 - 2, no roots mod 5.
        let p = p5();
        let base = MarkedLine::standard(p);
        let a = RatMatrix::from_rows(
            p,
            vec![
                vec![RationalFunction::zero(p), dlog_x(p, 2)],
                vec![dlog_x(p, 1), RationalFunction::zero(p)],
            ],
        );
        let conn = LogConnection::from_affine(base, a).unwrap();
        match conn.exponents(PointOnLine::Finite(0)) {
            Err(OperError::NonSplitCharPoly(_)) => {}
            other => panic!("expected NonSplitCharPoly, got {other:?}"),
        }
    }
}
