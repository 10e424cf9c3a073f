//! Determinant data: a line bundle together with a rank-1 logarithmic
//! connection on the prescribed twist of its n-th power.

use super::base::{LineBundleDatum, MarkedLine};
use super::connection::LogConnection;
use super::OperError;
use crate::funcfield::{PointOnLine, RatMatrix, RationalFunction};

/// Rank-n determinant data `(B, nabla_0)`: the connection lives on
/// `T^(n(n-1)/2) (x) B^n` and is stored as its form in the rational
/// trivialization of that line (the frame cut out by the constant
/// function 1 inside the function field).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminantData {
    n: usize,
    b: LineBundleDatum,
    form_rat: RationalFunction,
}

impl DeterminantData {
    pub fn new(
        n: usize,
        b: LineBundleDatum,
        form_rat: RationalFunction,
    ) -> Result<Self, OperError> {
        if n == 0 {
            return Err(OperError::InvalidBase("rank must be positive".into()));
        }
        if n > b.base().prime().get() as usize {
            return Err(OperError::InvalidBase(format!(
                "rank {n} exceeds the characteristic"
            )));
        }
        if form_rat.prime() != b.base().prime() {
            return Err(OperError::InvalidBase("prime mismatch".into()));
        }
        Ok(Self { n, b, form_rat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &MarkedLine {
        self.b.base()
    }

    /// The line bundle `B` of the data.
    pub fn bundle(&self) -> &LineBundleDatum {
        &self.b
    }

    /// The connection form in the rational trivialization of the
    /// determinant line.
    pub fn form_rat(&self) -> &RationalFunction {
        &self.form_rat
    }

    /// The determinant line `T^(n(n-1)/2) (x) B^n`.
    pub fn det_line(&self) -> LineBundleDatum {
        let big_n = (self.n * (self.n - 1) / 2) as i64;
        LineBundleDatum::tangent_power(self.base().clone(), big_n)
            .tensor(&self.b.power(self.n as i64))
    }

    /// The rank-1 connection `nabla_0` in the lattice frames of the
    /// determinant line.
    pub fn nabla0(&self) -> LogConnection {
        let p = self.base().prime();
        let line = self.det_line();
        let a = RatMatrix::from_rows(p, vec![vec![line.lattice_form(&self.form_rat)]]);
        let m = RatMatrix::from_rows(p, vec![vec![line.inf_ratio()]]);
        LogConnection::new(self.base().clone(), a, m).expect("inf_ratio is nonzero")
    }

    pub fn is_log(&self) -> bool {
        self.nabla0().is_log()
    }

    pub fn is_dormant(&self) -> Result<bool, OperError> {
        self.nabla0().is_dormant()
    }

    /// The exponent of `nabla_0` at a point (rank 1: a single value).
    pub fn exponent_at(&self, pt: PointOnLine) -> Result<u32, OperError> {
        let tau = self.nabla0().exponents(pt)?;
        Ok(tau.entries()[0])
    }

    /// The dual data on `Omega^(n-1) (x) B^dual`, with negated form.
    pub fn dual(&self) -> DeterminantData {
        let b = LineBundleDatum::tangent_power(self.base().clone(), -((self.n as i64) - 1))
            .tensor(&self.b.dual());
        DeterminantData {
            n: self.n,
            b,
            form_rat: self.form_rat.neg(),
        }
    }

    /// The complementary-rank data on `T^n (x) B` at rank `p - n`: the
    /// determinant lines of the pair multiply to the canonical rank-p data
    /// on `B`, so the form negates.
    pub fn triangle(&self) -> Result<DeterminantData, OperError> {
        let pv = self.base().prime().get() as usize;
        if self.n >= pv {
            return Err(OperError::InvalidBase(format!(
                "rank {} has no complement below p = {pv}",
                self.n
            )));
        }
        let b = LineBundleDatum::tangent_power(self.base().clone(), self.n as i64)
            .tensor(&self.b);
        Ok(DeterminantData {
            n: pv - self.n,
            b,
            form_rat: self.form_rat.neg(),
        })
    }

    /// Complement then dualize: rank `p - n` on `Omega^(p-1) (x) B^dual`,
    /// form unchanged. An exact involution on the stored data.
    pub fn star(&self) -> Result<DeterminantData, OperError> {
        Ok(self.triangle()?.dual())
    }

    /// Twist by rank-1 data: bundles tensor, forms add with multiplicity n.
    pub fn tensor(&self, line: &DeterminantData) -> Result<DeterminantData, OperError> {
        if line.n != 1 {
            return Err(OperError::InvalidBase(
                "tensor twist must have rank 1".into(),
            ));
        }
        if line.base() != self.base() {
            return Err(OperError::InvalidBase(
                "tensor factors live on different marked lines".into(),
            ));
        }
        let p = self.base().prime();
        let n_mod = (self.n as u32) % p.get();
        Ok(DeterminantData {
            n: self.n,
            b: self.b.tensor(&line.b),
            form_rat: self.form_rat.add(&line.form_rat.mul_scalar(n_mod)),
        })
    }
}

/// The canonical rank-p data on `B`: the determinant line
/// `T^(p(p-1)/2) (x) B^p` is the p-th power of `T^((p-1)/2) (x) B`, so the
/// rational trivialization carries the Frobenius-canonical connection with
/// form zero.
pub fn canonical_p_data(b: &LineBundleDatum) -> DeterminantData {
    let p = b.base().prime();
    DeterminantData {
        n: p.get() as usize,
        b: b.clone(),
        form_rat: RationalFunction::zero(p),
    }
}

/// Builds dormant rank-n determinant data with prescribed exponents, one
/// per marked point (in the sorted order of `base.marked()`).
///
/// Chooses the minimal t >= 0 with `p | n t + n(n-1)/2`, starts from the
/// p-th-power line `T^(pt... )` carrying the canonical connection, and
/// twists by `-sum m_i sigma_i` with `n m_i = a_i` mod p. The result is
/// validated (log poles, dormancy, exponents) before being returned.
pub fn determinant_data_construct(
    base: &MarkedLine,
    n: usize,
    a: &[u32],
) -> Result<DeterminantData, OperError> {
    let p = base.prime();
    let pv = p.get();
    if n == 0 || n > pv as usize {
        return Err(OperError::InvalidBase(format!(
            "rank {n} out of range for p = {pv}"
        )));
    }
    if a.len() != base.r() {
        return Err(OperError::InvalidBase(format!(
            "need one exponent per marked point ({} expected, {} given)",
            base.r(),
            a.len()
        )));
    }
    let big_n = (n * (n - 1) / 2) as u64;
    let t = (0..pv as u64)
        .find(|t| (n as u64 * t + big_n) % pv as u64 == 0)
        .expect("n t = -n(n-1)/2 mod p is solvable: n is invertible or the constant vanishes");

    let n_mod = (n as u32) % pv;
    let mut b = LineBundleDatum::tangent_power(base.clone(), t as i64);
    let mut targets = Vec::with_capacity(a.len());
    for (&ai, pt) in a.iter().zip(base.marked().iter()) {
        let ai = ai % pv;
        let m = if n_mod == 0 {
            if ai != 0 {
                return Err(OperError::InvalidBase(
                    "rank-p determinant data forces exponent 0 at every marked point".into(),
                ));
            }
            0
        } else {
            p.mul(ai, p.inv(n_mod))
        };
        b = b.twisted(*pt, -(m as i64));
        targets.push(ai);
    }
    let data = DeterminantData {
        n,
        b,
        form_rat: RationalFunction::zero(p),
    };

    if !data.is_log() {
        return Err(OperError::InternalInconsistency(
            "constructed determinant connection is not logarithmic".into(),
        ));
    }
    if !data.is_dormant()? {
        return Err(OperError::InternalInconsistency(
            "constructed determinant connection is not dormant".into(),
        ));
    }
    for (pt, want) in base.marked().iter().zip(targets) {
        let got = data.exponent_at(*pt)?;
        if got != want {
            return Err(OperError::InternalInconsistency(format!(
                "constructed exponent at {pt} is {got}, wanted {want}"
            )));
        }
    }
    Ok(data)
}
