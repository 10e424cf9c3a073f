//! Opers on a marked line: the differential-operator model, kernel and
//! nabla duals, line twists, and isomorphism testing.
//!
//! An oper here is a logarithmic connection carried by a two-chart lattice
//! pair whose filtration is implicit: over the affine chart the j-th
//! filtration step is spanned by the first `n - j` working frame vectors,
//! and the infinity lattice is required to be compatible (upper-triangular
//! frame matrix). The extra data are a rank-1 determinant datum pinning
//! down the determinant of the connection and a scalar recording the
//! trivialization of the last filtration step by the bundle `B`.

use super::base::{symbolic_power_of, LineBundleDatum, MarkedLine};
use super::connection::LogConnection;
use super::detdata::{canonical_p_data, DeterminantData};
use super::OperError;
use crate::fpcalc::ExponentMultiset;
use crate::funcfield::{hermite_kernel_basis, PointOnLine, RatMatrix, RationalFunction};

/// A GL_n-oper: connection, determinant data, and the scalar by which the
/// frame of `B` maps to the bottom working frame vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperData {
    conn: LogConnection,
    det: DeterminantData,
    eta_scalar: RationalFunction,
}

impl OperData {
    pub(crate) fn from_parts(
        conn: LogConnection,
        det: DeterminantData,
        eta_scalar: RationalFunction,
    ) -> Self {
        Self {
            conn,
            det,
            eta_scalar,
        }
    }

    pub fn conn(&self) -> &LogConnection {
        &self.conn
    }

    pub fn det(&self) -> &DeterminantData {
        &self.det
    }

    pub fn eta_scalar(&self) -> &RationalFunction {
        &self.eta_scalar
    }

    pub fn base(&self) -> &MarkedLine {
        self.conn.base()
    }

    pub fn rank(&self) -> usize {
        self.conn.rank()
    }

    /// The line bundle `B` trivializing the last filtration step.
    pub fn bundle(&self) -> &LineBundleDatum {
        self.det.bundle()
    }

    pub fn is_dormant(&self) -> Result<bool, OperError> {
        self.conn.is_dormant()
    }

    pub fn exponents_at(&self, pt: PointOnLine) -> Result<ExponentMultiset, OperError> {
        self.conn.exponents(pt)
    }

    /// Degree in the reporting normalization that counts every tangent
    /// twist with its full weight at infinity.
    pub fn degree_reported(&self) -> i64 {
        let n = self.rank() as i64;
        let r = self.base().r() as i64;
        let t = self.det.bundle().t_twist();
        self.conn.degree_honest() + r * (n * (n - 1) / 2 + n * t)
    }
}

fn rf(base: &MarkedLine) -> (RationalFunction, RationalFunction) {
    let h = RationalFunction::from_poly(base.h());
    let x = RationalFunction::x(base.prime());
    (h, x)
}

/// One covariant derivative along the log field: `h v' + A_d v` applied to
/// a column over the working frame, where `A_d` is the connection matrix
/// already scaled by `h`.
fn nabla_partial(a_d: &RatMatrix, h: &RationalFunction, col: &[RationalFunction]) -> Vec<RationalFunction> {
    (0..col.len())
        .map(|i| {
            let mut acc = h.mul(&col[i].derivative());
            for (k, ck) in col.iter().enumerate() {
                let e = a_d.get(i, k);
                if !e.is_zero() && !ck.is_zero() {
                    acc = acc.add(&e.mul(ck));
                }
            }
            acc
        })
        .collect()
}

/// Columns `nabla^j (eta e_0)` for `j < width`, as an `n x width` matrix.
fn eta_iterates(f: &OperData, width: usize) -> RatMatrix {
    let p = f.base().prime();
    let n = f.rank();
    let (h, _) = rf(f.base());
    let a_d = f.conn.a().scale(&h);
    let mut cur = vec![RationalFunction::zero(p); n];
    cur[0] = f.eta_scalar.clone();
    let mut cols = vec![cur.clone()];
    for _ in 1..width {
        cur = nabla_partial(&a_d, &h, &cur);
        cols.push(cur.clone());
    }
    RatMatrix::from_fn(p, n, width, |i, j| cols[j][i].clone())
}

fn wronskian(f: &OperData) -> RatMatrix {
    eta_iterates(f, f.rank())
}

/// Verifies every oper axiom for the data and reports all failures at once:
/// logarithmic poles, filtration compatibility of the infinity lattice,
/// Griffiths transversality, Kodaira-Spencer units on both charts, the
/// `B`-trivialization scalar, and agreement of the determinant of the
/// connection with the prescribed rank-1 data on both charts.
pub fn oper_check(f: &OperData) -> Result<(), OperError> {
    let n = f.rank();
    let base = f.base();
    let mut fails: Vec<String> = Vec::new();
    if f.det.base() != base {
        fails.push("determinant data lives on a different marked line".into());
    }
    if f.det.n() != n {
        fails.push(format!(
            "determinant data has rank {}, connection has rank {n}",
            f.det.n()
        ));
    }
    if !fails.is_empty() {
        return Err(OperError::CheckFailed(fails));
    }
    let (h, x) = rf(base);

    if !f.conn.is_log() {
        fails.push("connection has non-logarithmic poles".into());
    }

    let m = f.conn.inf_frame();
    let mut triangular = true;
    for i in 0..n {
        if m.get(i, i).is_zero() {
            triangular = false;
        }
        for j in 0..i {
            if !m.get(i, j).is_zero() {
                triangular = false;
            }
        }
    }
    if !triangular {
        fails.push("infinity lattice does not respect the filtration".into());
    }

    let a_d = f.conn.a().scale(&h);
    let mut transversal = true;
    for i in 0..n {
        for j in 0..n {
            if i > j + 1 && !a_d.get(i, j).is_zero() {
                transversal = false;
            }
        }
    }
    if !transversal {
        fails.push("connection moves the filtration by more than one step".into());
    }

    for l in 0..n.saturating_sub(1) {
        let e = a_d.get(l + 1, l);
        if e.is_zero() || !e.is_constant() {
            fails.push(format!(
                "affine Kodaira-Spencer entry at level {l} is not a nonzero constant"
            ));
        }
    }
    if triangular {
        let a_f = f.conn.a_inf();
        for l in 0..n.saturating_sub(1) {
            let e = a_f.get(l + 1, l).mul(&x);
            if e.is_zero() || e.ord_at(PointOnLine::Infinity) != 0 {
                fails.push(format!(
                    "Kodaira-Spencer entry at level {l} is not a unit at infinity"
                ));
            }
        }
    }

    let r_b = f.det.bundle().inf_ratio();
    if f.eta_scalar.is_zero() || !f.eta_scalar.is_constant() {
        fails.push("bundle trivialization scalar is not a nonzero constant".into());
    } else if triangular {
        let ratio = f
            .eta_scalar
            .mul(&r_b)
            .div(m.get(0, 0))
            .expect("diagonal entry is nonzero");
        if ratio.ord_at(PointOnLine::Infinity) != 0 {
            fails.push("bundle trivialization is not a unit at infinity".into());
        }
    }

    let w = wronskian(f);
    let det_w = w.determinant()?;
    if det_w.is_zero() {
        fails.push("iterated derivatives of the bundle trivialization degenerate".into());
    } else {
        let lhs = f.conn.a().trace()?.add(&det_w.dlog()?);
        let rhs = f.det.det_line().lattice_form(f.det.form_rat());
        if lhs != rhs {
            fails.push("determinant of the connection differs from the rank-1 data".into());
        }
        if triangular {
            let big_n = (n * (n - 1) / 2) as i64;
            let det_m = m.determinant()?;
            let ratio = x
                .div(&h)?
                .pow_i64(big_n)?
                .mul(&r_b.pow_i64(n as i64)?)
                .mul(&det_w)
                .div(&det_m)?;
            if ratio.ord_at(PointOnLine::Infinity) != 0 {
                fails.push("determinant lattices disagree at infinity".into());
            }
        }
    }

    if fails.is_empty() {
        Ok(())
    } else {
        Err(OperError::CheckFailed(fails))
    }
}

/// Wraps rank-1 determinant data as the GL_1-oper it already is.
pub fn rank1_oper(det: &DeterminantData) -> Result<OperData, OperError> {
    if det.n() != 1 {
        return Err(OperError::InvalidBase(
            "a GL_1-oper needs rank-1 determinant data".into(),
        ));
    }
    let f = OperData {
        conn: det.nabla0(),
        det: det.clone(),
        eta_scalar: RationalFunction::one(det.base().prime()),
    };
    oper_check(&f)?;
    Ok(f)
}

/// The rank-p differential-operator oper on `B`: operators of order below p
/// along the log field, acting by left multiplication, with the infinity
/// lattice generated the same way in the other chart. Internal consistency
/// is not rechecked here; see `build_dpsi`.
fn build_dpsi_raw(b: &LineBundleDatum) -> Result<OperData, OperError> {
    let base = b.base().clone();
    let p = base.prime();
    let pv = p.get() as usize;
    let h_poly = base.h();
    let (h, x) = rf(&base);
    let g = RationalFunction::from_poly(symbolic_power_of(p, &h_poly));

    let mut a_d = RatMatrix::zero(p, pv, pv);
    let one = RationalFunction::one(p);
    for j in 0..pv - 1 {
        a_d.set(j + 1, j, one.clone());
    }
    // Left multiplication by the field sends the top basis operator to its
    // p-th power, which reduces to g times the field.
    a_d.set(1, pv - 1, g);
    let a = a_d.scale(&h.inv()?);

    // Infinity frame: iterate the log field of the other chart, which is
    // -x times d/dx, on the infinity frame of B.
    let w = x.neg().div(&h)?;
    let mut cur = vec![RationalFunction::zero(p); pv];
    cur[0] = b.inf_ratio();
    let mut cols = vec![cur.clone()];
    for _ in 1..pv {
        let mut next = Vec::with_capacity(pv);
        for k in 0..pv {
            let mut v = h.mul(&cur[k].derivative());
            if k > 0 {
                v = v.add(&cur[k - 1]);
            }
            next.push(w.mul(&v));
        }
        cur = next;
        cols.push(cur.clone());
    }
    let m = RatMatrix::from_fn(p, pv, pv, |i, j| cols[j][i].clone());

    let conn = LogConnection::new(base, a, m)?;
    Ok(OperData {
        conn,
        det: canonical_p_data(b),
        eta_scalar: RationalFunction::one(p),
    })
}

/// Builds the rank-p differential-operator oper on `B` and certifies it:
/// all oper axioms, dormancy, and the full exponent spectrum at every
/// marked point. Any failure is an internal inconsistency.
pub fn build_dpsi(b: &LineBundleDatum) -> Result<OperData, OperError> {
    let f = build_dpsi_raw(b)?;
    oper_check(&f)?;
    if !f.conn.is_dormant()? {
        return Err(OperError::InternalInconsistency(
            "differential-operator oper has nonzero p-curvature".into(),
        ));
    }
    let pv = f.base().prime().get();
    let full: Vec<u32> = (0..pv).collect();
    for pt in f.base().marked() {
        let tau = f.conn.exponents(*pt)?;
        if tau.entries() != full.as_slice() {
            return Err(OperError::InternalInconsistency(format!(
                "differential-operator oper misses exponents at {pt}"
            )));
        }
    }
    Ok(f)
}

/// The map from the rank-p differential-operator oper on `B` to `F` that
/// extends the bundle trivialization by covariant differentiation, as an
/// `n x p` matrix over the working frames. Requires dormancy (otherwise
/// the extension is not defined on the operator model) and checks
/// surjectivity by rank.
pub fn eta_tilde(f: &OperData) -> Result<RatMatrix, OperError> {
    if !f.conn.is_dormant()? {
        return Err(OperError::NotDormant);
    }
    let pv = f.base().prime().get() as usize;
    let y = eta_iterates(f, pv);
    if y.rank() != f.rank() {
        return Err(OperError::InternalInconsistency(
            "derivative transport from the operator model is not surjective".into(),
        ));
    }
    Ok(y)
}

fn pivot_rows(cols: &[Vec<crate::funcfield::Poly>]) -> Vec<usize> {
    cols.iter()
        .map(|col| {
            col.iter()
                .rposition(|e| !e.is_zero())
                .expect("kernel basis columns are nonzero")
        })
        .collect()
}

/// Expresses `target` in the span of echelon columns by back-substitution
/// from the highest pivot down; fails if a residual survives.
fn solve_in_span(
    cols: &[Vec<RationalFunction>],
    pivots: &[usize],
    mut target: Vec<RationalFunction>,
) -> Result<Vec<RationalFunction>, OperError> {
    let p = cols[0][0].prime();
    let mut out = vec![RationalFunction::zero(p); cols.len()];
    for i in (0..cols.len()).rev() {
        let piv = pivots[i];
        if target[piv].is_zero() {
            continue;
        }
        let c = target[piv].div(&cols[i][piv])?;
        for (r, e) in cols[i].iter().enumerate() {
            if !e.is_zero() {
                target[r] = target[r].sub(&c.mul(e));
            }
        }
        out[i] = c;
    }
    if target.iter().any(|e| !e.is_zero()) {
        return Err(OperError::InternalInconsistency(
            "vector escapes the kernel lattice".into(),
        ));
    }
    Ok(out)
}

/// The kernel dual: the rank `p - n` oper on the kernel of the derivative
/// transport out of the differential-operator model on `B`. Exponents must
/// be distinct at every marked point. The result is certified: oper axioms,
/// dormancy, complemented exponents, and the degree identity.
pub fn dualize_triangle(f: &OperData) -> Result<OperData, OperError> {
    let base = f.base().clone();
    let p = base.prime();
    let pv = p.get() as usize;
    let n = f.rank();
    if n >= pv {
        return Err(OperError::InvalidBase(format!(
            "rank {n} has no kernel dual below p = {pv}"
        )));
    }
    for pt in base.marked() {
        let tau = f.conn.exponents(*pt)?;
        if !tau.is_distinct() {
            return Err(OperError::IndistinctExponents(format!(
                "exponents at {pt} are not distinct: {:?}",
                tau.entries()
            )));
        }
    }

    let dpsi = build_dpsi_raw(f.det.bundle())?;
    let y = eta_tilde(f)?;
    let expected: Vec<usize> = (n..pv).collect();

    let kb = hermite_kernel_basis(&y);
    let pivots = pivot_rows(&kb);
    if pivots != expected {
        return Err(OperError::SaturationFailure(format!(
            "affine kernel pivots {pivots:?}, expected {expected:?}"
        )));
    }
    let k_aff: Vec<Vec<RationalFunction>> = kb
        .iter()
        .map(|col| {
            col.iter()
                .map(|e| RationalFunction::from_poly(e.clone()))
                .collect()
        })
        .collect();

    let (h, _) = rf(&base);
    let a_d_psi = dpsi.conn.a().scale(&h);
    let k = pv - n;
    let mut a_d_ker = RatMatrix::zero(p, k, k);
    for j in 0..k {
        let image = nabla_partial(&a_d_psi, &h, &k_aff[j]);
        let c = solve_in_span(&k_aff, &pivots, image)?;
        for (i, ci) in c.into_iter().enumerate() {
            a_d_ker.set(i, j, ci);
        }
    }
    let a_ker = a_d_ker.scale(&h.inv()?);

    // The kernel's infinity lattice: intersect with the operator model's
    // infinity lattice by redoing the kernel computation in the other chart.
    let y_inf = f
        .conn
        .inf_frame()
        .inverse()?
        .mul(&y)?
        .mul(dpsi.conn.inf_frame())?;
    let kb_t = hermite_kernel_basis(&y_inf.chart_swap());
    let pivots_t = pivot_rows(&kb_t);
    if pivots_t != expected {
        return Err(OperError::SaturationFailure(format!(
            "infinity kernel pivots {pivots_t:?}, expected {expected:?}"
        )));
    }
    let k_inf_t = RatMatrix::from_fn(p, pv, k, |i, j| {
        RationalFunction::from_poly(kb_t[j][i].clone())
    });
    let k_inf = dpsi.conn.inf_frame().mul(&k_inf_t.chart_swap())?;
    let mut m_ker = RatMatrix::zero(p, k, k);
    for j in 0..k {
        let col: Vec<RationalFunction> = (0..pv).map(|i| k_inf.get(i, j).clone()).collect();
        let c = solve_in_span(&k_aff, &pivots, col)?;
        for (i, ci) in c.into_iter().enumerate() {
            m_ker.set(i, j, ci);
        }
    }

    let eta = RationalFunction::from_poly(kb[0][n].clone()).inv()?;
    let oper = OperData {
        conn: LogConnection::new(base.clone(), a_ker, m_ker)?,
        det: f.det.triangle()?,
        eta_scalar: eta,
    };

    oper_check(&oper)?;
    if !oper.conn.is_dormant()? {
        return Err(OperError::InternalInconsistency(
            "kernel dual has nonzero p-curvature".into(),
        ));
    }
    for pt in base.marked() {
        let want = f.conn.exponents(*pt)?.to_subset()?.complement();
        let got = oper.conn.exponents(*pt)?;
        if !got.is_distinct() || got.to_subset()? != want {
            return Err(OperError::InternalInconsistency(format!(
                "kernel dual exponents at {pt} are not the complement"
            )));
        }
    }
    let deg_b = f.det.bundle().degree_reported();
    let want_deg = (pv - n) as i64 * ((pv + n - 1) as i64 + deg_b);
    if oper.degree_reported() != want_deg {
        return Err(OperError::InternalInconsistency(format!(
            "kernel dual degree {} differs from {want_deg}",
            oper.degree_reported()
        )));
    }
    Ok(oper)
}

/// The dual oper on the dual lattice pair, with frames taken in reverse
/// order so the filtration convention is preserved. The trivialization
/// scalar is transported through the top graded piece.
pub fn dualize_nabla(f: &OperData) -> Result<OperData, OperError> {
    let base = f.base().clone();
    let p = base.prime();
    let n = f.rank();
    let rev = |mat: &RatMatrix| {
        RatMatrix::from_fn(p, n, n, |i, j| mat.get(n - 1 - i, n - 1 - j).clone())
    };
    let a_dual = rev(&f.conn.a().transpose().neg());
    let m_dual = rev(&f.conn.inf_frame().inverse()?.transpose());
    let w_top = wronskian(f).get(n - 1, n - 1).clone();
    let oper = OperData {
        conn: LogConnection::new(base.clone(), a_dual, m_dual)?,
        det: f.det.dual(),
        eta_scalar: w_top.inv()?,
    };
    oper_check(&oper)?;
    if !oper.conn.is_dormant()? {
        return Err(OperError::InternalInconsistency(
            "dual oper has nonzero p-curvature".into(),
        ));
    }
    for pt in base.marked() {
        if oper.conn.exponents(*pt)? != f.conn.exponents(*pt)?.negate() {
            return Err(OperError::InternalInconsistency(format!(
                "dual exponents at {pt} are not the negatives"
            )));
        }
    }
    Ok(oper)
}

/// Kernel dual followed by the lattice dual: rank `n` goes to `p - n` and
/// exponent sets are starred.
pub fn star_oper(f: &OperData) -> Result<OperData, OperError> {
    dualize_nabla(&dualize_triangle(f)?)
}

/// Twists an oper by rank-1 determinant data: the connection shifts by the
/// scalar form, the infinity lattice by the ratio of the line's frames.
pub fn tensor_line_oper(f: &OperData, line: &DeterminantData) -> Result<OperData, OperError> {
    if line.n() != 1 {
        return Err(OperError::InvalidBase(
            "oper twists must have rank 1".into(),
        ));
    }
    if line.base() != f.base() {
        return Err(OperError::InvalidBase(
            "twist lives on a different marked line".into(),
        ));
    }
    let p = f.base().prime();
    let n = f.rank();
    let phi = line.bundle().lattice_form(line.form_rat());
    let a = f.conn.a().add(&RatMatrix::diagonal(p, &vec![phi; n]))?;
    let m = f.conn.inf_frame().scale(&line.bundle().inf_ratio());
    let oper = OperData {
        conn: LogConnection::new(f.base().clone(), a, m)?,
        det: f.det.tensor(line)?,
        eta_scalar: f.eta_scalar.clone(),
    };
    oper_check(&oper)?;
    Ok(oper)
}

/// Decides whether two opers with identical determinant data are isomorphic
/// and returns the matrix of the isomorphism over the working frames if so.
///
/// Any isomorphism must send iterated derivatives of one trivialization to
/// those of the other, so the transport matrix of the two derivative bases
/// is the only candidate up to a root-of-unity scalar that changes nothing
/// below; it remains to check that this candidate is flat and preserves
/// both lattices and the filtration.
pub fn oper_isomorphism(f: &OperData, g: &OperData) -> Result<Option<RatMatrix>, OperError> {
    if f.base() != g.base() || f.rank() != g.rank() || f.det != g.det {
        return Ok(None);
    }
    let n = f.rank();
    let (h, _) = rf(f.base());
    let w_f = wronskian(f);
    let w_g = wronskian(g);
    let alpha = w_g.mul(&w_f.inverse()?)?;

    let a_d_f = f.conn.a().scale(&h);
    let a_d_g = g.conn.a().scale(&h);
    let flat = alpha
        .derivative()
        .scale(&h)
        .add(&a_d_g.mul(&alpha)?)?
        .sub(&alpha.mul(&a_d_f)?)?;
    if !flat.is_zero() {
        return Ok(None);
    }
    for i in 0..n {
        for j in 0..n {
            let e = alpha.get(i, j);
            if i > j && !e.is_zero() {
                return Ok(None);
            }
            if !e.is_zero() && !e.is_polynomial() {
                return Ok(None);
            }
        }
    }
    if alpha.get(0, 0) != &g.eta_scalar.div(&f.eta_scalar)? {
        return Ok(None);
    }
    let d = alpha.determinant()?;
    if d.is_zero() || !d.is_constant() {
        return Ok(None);
    }
    let beta = g
        .conn
        .inf_frame()
        .inverse()?
        .mul(&alpha)?
        .mul(f.conn.inf_frame())?;
    for i in 0..n {
        for j in 0..n {
            let e = beta.get(i, j);
            if !e.is_zero() && e.ord_at(PointOnLine::Infinity) < 0 {
                return Ok(None);
            }
        }
    }
    if beta.determinant()?.ord_at(PointOnLine::Infinity) != 0 {
        return Ok(None);
    }
    Ok(Some(alpha))
}

/// The dormant GL_(p-1)-oper attached to dormant rank-1 determinant data:
/// the star dual of the GL_1-oper it defines. Exponent sets are certified
/// to be the starred singletons.
pub fn unique_gl_pminus1(base: &MarkedLine, u: &DeterminantData) -> Result<OperData, OperError> {
    if u.base() != base {
        return Err(OperError::InvalidBase(
            "determinant data lives on a different marked line".into(),
        ));
    }
    if u.n() != 1 {
        return Err(OperError::InvalidBase(
            "seed must be rank-1 determinant data".into(),
        ));
    }
    let f = rank1_oper(u)?;
    if !f.conn.is_dormant()? {
        return Err(OperError::NotDormant);
    }
    let s = star_oper(&f)?;
    let p = base.prime();
    for pt in base.marked() {
        let single = ExponentMultiset::new(p, vec![u.exponent_at(*pt)?])?;
        let want = single.to_subset()?.star();
        if s.conn.exponents(*pt)?.to_subset()? != want {
            return Err(OperError::InternalInconsistency(format!(
                "starred exponents at {pt} are off"
            )));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::super::detdata::determinant_data_construct;
    use super::*;
    use crate::fpcalc::Prime;

    fn standard(q: u32) -> MarkedLine {
        MarkedLine::standard(Prime::new(q).unwrap())
    }

    #[test]
    fn operator_model_certifies_itself() {
        let base = standard(3);
        let b = LineBundleDatum::trivial(base.clone());
        let f = build_dpsi(&b).unwrap();
        assert_eq!(f.rank(), 3);
        assert_eq!(f.degree_reported(), 3 * 2);
        // Transporting the trivialization through derivatives recovers the
        // working frame itself.
        let y = eta_tilde(&f).unwrap();
        assert_eq!(y, RatMatrix::identity(base.prime(), 3));

        // A nontrivial bundle moves the degree by p per unit.
        let b2 = b.twisted(PointOnLine::Finite(0), -1);
        let f2 = build_dpsi(&b2).unwrap();
        assert_eq!(f2.degree_reported(), 3 * 2 + 3 * (-1));
    }

    #[test]
    fn operator_model_over_larger_prime_and_more_points() {
        let p = Prime::new(5).unwrap();
        let base = MarkedLine::new(
            p,
            &[
                PointOnLine::Finite(0),
                PointOnLine::Finite(1),
                PointOnLine::Finite(3),
                PointOnLine::Infinity,
            ],
        )
        .unwrap();
        let b = LineBundleDatum::trivial(base).twisted(PointOnLine::Finite(3), 1);
        let f = build_dpsi(&b).unwrap();
        assert_eq!(f.degree_reported(), 5 * 4 + 5);
    }

    #[test]
    fn kernel_dual_complements_exponents_and_degree() {
        let base = standard(3);
        let u = determinant_data_construct(&base, 1, &[1, 0, 2]).unwrap();
        let f = rank1_oper(&u).unwrap();
        assert!(f.is_dormant().unwrap());
        let k = dualize_triangle(&f).unwrap();
        assert_eq!(k.rank(), 2);
        let tau0 = k.exponents_at(PointOnLine::Finite(0)).unwrap();
        assert_eq!(tau0.entries(), &[0, 2]);
        let tau1 = k.exponents_at(PointOnLine::Finite(1)).unwrap();
        assert_eq!(tau1.entries(), &[1, 2]);
        let tauinf = k.exponents_at(PointOnLine::Infinity).unwrap();
        assert_eq!(tauinf.entries(), &[0, 1]);
        // Degree identity against the seed bundle, in reported terms.
        let deg_b = u.bundle().degree_reported();
        assert_eq!(k.degree_reported(), 2 * (3 + 1 - 1 + deg_b));
    }

    #[test]
    fn lattice_dual_is_an_involution_up_to_a_sign() {
        let base = standard(3);
        let u = determinant_data_construct(&base, 1, &[1, 0, 2]).unwrap();
        let k = dualize_triangle(&rank1_oper(&u).unwrap()).unwrap();
        let d = dualize_nabla(&k).unwrap();
        let dd = dualize_nabla(&d).unwrap();
        assert_eq!(dd.conn(), k.conn());
        assert_eq!(dd.det(), k.det());
        // The trivialization comes back negated at even rank; that scalar
        // is an allowed automorphism, so the two are isomorphic.
        assert_eq!(dd.eta_scalar(), &k.eta_scalar().mul_scalar(3 - 1));
        assert!(oper_isomorphism(&k, &dd).unwrap().is_some());
    }

    #[test]
    fn star_square_is_isomorphic_to_the_identity() {
        let base = standard(3);
        let u = determinant_data_construct(&base, 1, &[1, 0, 2]).unwrap();
        let f = rank1_oper(&u).unwrap();
        let ss = star_oper(&star_oper(&f).unwrap()).unwrap();
        assert_eq!(ss.rank(), 1);
        assert_eq!(ss.det(), f.det());
        assert!(oper_isomorphism(&f, &ss).unwrap().is_some());
    }

    #[test]
    fn star_commutes_with_line_twists_up_to_isomorphism() {
        let base = standard(3);
        let u = determinant_data_construct(&base, 1, &[1, 0, 2]).unwrap();
        let l = determinant_data_construct(&base, 1, &[2, 1, 0]).unwrap();
        let k = dualize_triangle(&rank1_oper(&u).unwrap()).unwrap();

        let tk = tensor_line_oper(&k, &l).unwrap();
        let tau0 = tk.exponents_at(PointOnLine::Finite(0)).unwrap();
        assert_eq!(tau0.entries(), &[1, 2]); // {0, 2} shifted by 2

        let lhs = star_oper(&tk).unwrap();
        let rhs = tensor_line_oper(&star_oper(&k).unwrap(), &l.dual()).unwrap();
        assert_eq!(lhs.det(), rhs.det());
        assert!(oper_isomorphism(&lhs, &rhs).unwrap().is_some());
    }

    #[test]
    fn isomorphism_requires_matching_determinant_data() {
        let base = standard(3);
        let u = determinant_data_construct(&base, 1, &[1, 0, 2]).unwrap();
        let l = determinant_data_construct(&base, 1, &[2, 1, 0]).unwrap();
        let k = dualize_triangle(&rank1_oper(&u).unwrap()).unwrap();
        let tk = tensor_line_oper(&k, &l).unwrap();
        assert!(oper_isomorphism(&k, &tk).unwrap().is_none());
        assert!(oper_isomorphism(&k, &k).unwrap().is_some());
    }

    #[test]
    fn unique_complement_rank_oper_from_rank_one_data() {
        let base = standard(3);
        let u = determinant_data_construct(&base, 1, &[0, 0, 0]).unwrap();
        let g = unique_gl_pminus1(&base, &u).unwrap();
        assert_eq!(g.rank(), 2);
        for pt in base.marked() {
            assert_eq!(g.exponents_at(*pt).unwrap().entries(), &[1, 2]);
        }

        // An alternative Frobenius descent datum for the same exponents
        // differs by a p-th-power line twist and gives an isomorphic oper.
        let bt = LineBundleDatum::tangent_power(base.clone(), 3);
        let u_alt = DeterminantData::new(1, bt.clone(), RationalFunction::zero(base.prime()))
            .unwrap();
        let l = DeterminantData::new(1, bt, RationalFunction::zero(base.prime())).unwrap();
        let g_alt = unique_gl_pminus1(&base, &u_alt).unwrap();
        let transported = tensor_line_oper(&g_alt, &l).unwrap();
        assert_eq!(transported.det(), g.det());
        assert!(oper_isomorphism(&g, &transported).unwrap().is_some());
    }

    #[test]
    fn derivative_transport_matches_the_other_chart() {
        // The intertwining property in the infinity chart: columns of
        // eta_tilde times the operator model's infinity frame must satisfy
        // the same iteration against the log field of that chart.
        let base = standard(5);
        let u = determinant_data_construct(&base, 1, &[1, 3, 0]).unwrap();
        let f = dualize_triangle(&rank1_oper(&u).unwrap()).unwrap();
        let y = eta_tilde(&f).unwrap();
        let dpsi = build_dpsi(u.bundle()).unwrap();
        let yt = y.mul(dpsi.conn().inf_frame()).unwrap();

        let p = base.prime();
        let (h, x) = rf(&base);
        let w = x.neg().div(&h).unwrap();
        let a_d = f.conn().a().scale(&h);
        let n = f.rank();
        let col0: Vec<RationalFunction> = (0..n).map(|i| yt.get(i, 0).clone()).collect();
        let mut want0 = vec![RationalFunction::zero(p); n];
        want0[0] = f.eta_scalar().mul(&u.bundle().inf_ratio());
        assert_eq!(col0, want0);
        for j in 0..(p.get() as usize - 1) {
            let col: Vec<RationalFunction> = (0..n).map(|i| yt.get(i, j).clone()).collect();
            let step = nabla_partial(&a_d, &h, &col);
            for i in 0..n {
                assert_eq!(*yt.get(i, j + 1), w.mul(&step[i]));
            }
        }
    }

    #[test]
    fn tampered_data_fails_the_axioms_with_reasons() {
        let base = standard(3);
        let u = determinant_data_construct(&base, 1, &[1, 0, 2]).unwrap();
        let k = dualize_triangle(&rank1_oper(&u).unwrap()).unwrap();
        let bad = OperData::from_parts(
            k.conn().clone(),
            k.det().clone(),
            RationalFunction::x(base.prime()),
        );
        match oper_check(&bad) {
            Err(OperError::CheckFailed(fails)) => {
                assert!(fails.iter().any(|s| s.contains("trivialization")));
            }
            other => panic!("expected check failure, got {other:?}"),
        }
        assert!(dualize_triangle(&build_dpsi_raw(u.bundle()).unwrap()).is_err());
    }
}
