//! Exact cyclotomic evaluation of the closed degree formula.
//!
//! Elements of the p-th cyclotomic field live in the power basis
//! 1, z, ..., z^(p-2) with exact rational coefficients, reduced modulo
//! 1 + z + ... + z^(p-1) = 0.  The degree sums a symmetric rational
//! function of n distinct p-th roots of unity over unordered subsets;
//! since the summand is invariant under simultaneous rotation and
//! rotation acts freely, it suffices to sum over subsets containing 1
//! and scale by p^e/n.  Every result is certified to be a nonnegative
//! rational integer; nothing is ever rounded.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::fpcalc::Prime;
use crate::ratpoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerlindeError {
    #[error("division by zero in the cyclotomic field")]
    DivisionByZero,
    #[error("value is not a nonnegative rational integer: {0}")]
    NotInteger(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// An element of the p-th cyclotomic field over the rationals, stored in
/// the power basis modulo the minimal relation of a primitive p-th root.
/// Equality is coefficientwise; the basis representation is unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicRational {
    p: Prime,
    /// Coefficient of z^i at index i; length p-1.
    coeffs: Vec<BigRational>,
}

impl CyclotomicRational {
    pub fn zero(p: Prime) -> Self {
        let coeffs = vec![BigRational::zero(); p.get() as usize - 1];
        CyclotomicRational { p, coeffs }
    }

    pub fn one(p: Prime) -> Self {
        Self::from_rational(p, BigRational::one())
    }

    pub fn from_rational(p: Prime, value: BigRational) -> Self {
        let mut out = Self::zero(p);
        out.coeffs[0] = value;
        out
    }

    /// The root power z^k for any integer exponent.
    pub fn root_power(p: Prime, k: i64) -> Self {
        let pv = p.get() as i64;
        let r = k.rem_euclid(pv) as usize;
        let mut out = Self::zero(p);
        if r < pv as usize - 1 {
            out.coeffs[r] = BigRational::one();
        } else {
            // z^(p-1) = -(1 + z + ... + z^(p-2)).
            for c in &mut out.coeffs {
                *c = -BigRational::one();
            }
        }
        out
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixed primes");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        CyclotomicRational { p: self.p, coeffs }
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|a| -a.clone()).collect();
        CyclotomicRational { p: self.p, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a * factor).collect();
        CyclotomicRational { p: self.p, coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixed primes");
        let pv = self.p.get() as usize;
        // Convolve with exponents folded mod p, then eliminate z^(p-1).
        let mut acc = vec![BigRational::zero(); pv];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let mut idx = i + j;
                if idx >= pv {
                    idx -= pv;
                }
                acc[idx] += a * b;
            }
        }
        let top = acc.pop().expect("p >= 2");
        let coeffs = acc.into_iter().map(|c| c - &top).collect();
        CyclotomicRational { p: self.p, coeffs }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::one(self.p);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Field inverse via the extended Euclidean algorithm against the
    /// minimal relation, which is irreducible over the rationals.
    pub fn inv(&self) -> Result<Self, VerlindeError> {
        if self.is_zero() {
            return Err(VerlindeError::DivisionByZero);
        }
        let pv = self.p.get() as usize;
        let phi: Vec<BigRational> = vec![BigRational::one(); pv];
        let mut r0 = phi.clone();
        let mut r1 = ratpoly::trim(self.coeffs.clone());
        let mut t0: Vec<BigRational> = Vec::new();
        let mut t1 = vec![BigRational::one()];
        while r1.len() > 1 {
            let (q, r2) = ratpoly::divrem(&r0, &r1);
            let t2 = ratpoly::sub(&t0, &ratpoly::mul(&q, &t1));
            r0 = r1;
            r1 = r2;
            t0 = t1;
            t1 = t2;
            assert!(!r1.is_empty(), "the minimal relation is irreducible");
        }
        let c = r1[0].clone();
        let mut lifted: Vec<BigRational> = t1.into_iter().map(|t| t / c.clone()).collect();
        lifted = ratpoly::rem(&lifted, &phi);
        let mut coeffs = vec![BigRational::zero(); pv - 1];
        for (i, v) in lifted.into_iter().enumerate() {
            coeffs[i] = v;
        }
        Ok(CyclotomicRational { p: self.p, coeffs })
    }
}

pub fn cyclo_add(a: &CyclotomicRational, b: &CyclotomicRational) -> CyclotomicRational {
    a.add(b)
}

pub fn cyclo_mul(a: &CyclotomicRational, b: &CyclotomicRational) -> CyclotomicRational {
    a.mul(b)
}

pub fn cyclo_inv(a: &CyclotomicRational) -> Result<CyclotomicRational, VerlindeError> {
    a.inv()
}

/// The integer represented, if the element is a rational integer: all
/// higher basis coefficients vanish and the constant term has denominator
/// one.
pub fn is_rational_integer(x: &CyclotomicRational) -> Option<BigInt> {
    if x.coeffs[1..].iter().all(Zero::is_zero) && x.coeffs[0].is_integer() {
        Some(x.coeffs[0].to_integer())
    } else {
        None
    }
}

fn check_inputs(p: Prime, n: usize, g: usize) -> Result<(), VerlindeError> {
    let pv = p.get() as usize;
    if g < 1 {
        return Err(VerlindeError::PreconditionViolated("genus must be at least 1".into()));
    }
    if !(1 < n && n < pv) {
        return Err(VerlindeError::PreconditionViolated(format!(
            "rank {n} must satisfy 1 < n < p = {pv}"
        )));
    }
    if pv <= n * (g - 1) {
        return Err(VerlindeError::PreconditionViolated(format!(
            "requires p > n(g-1) = {}",
            n * (g - 1)
        )));
    }
    Ok(())
}

/// Summand at a subset of root exponents: the product of the roots to the
/// e-th power divided by the product over ordered pairs of root
/// differences to the (g-1)-th power.
fn subset_term(p: Prime, e: usize, g: usize, exps: &[usize]) -> CyclotomicRational {
    if g == 1 {
        return CyclotomicRational::one(p);
    }
    let sum_a: usize = exps.iter().sum();
    let num = CyclotomicRational::root_power(p, (e * sum_a) as i64);
    let mut prod = CyclotomicRational::one(p);
    for i in 0..exps.len() {
        for j in i + 1..exps.len() {
            let diff = CyclotomicRational::root_power(p, exps[i] as i64)
                .sub(&CyclotomicRational::root_power(p, exps[j] as i64));
            let square = diff.mul(&diff);
            prod = prod.mul(&square);
        }
    }
    // The ordered-pair product is (-1)^(n(n-1)/2) times the squared
    // upper-triangular product.
    let m = exps.len();
    let mut den = prod.pow(g - 1);
    if (m * (m - 1) / 2) % 2 == 1 && (g - 1) % 2 == 1 {
        den = den.neg();
    }
    num.mul(&den.inv().expect("distinct roots have nonzero differences"))
}

/// All ascending (k)-combinations from `lo..=hi`, appended to `prefix`.
fn for_each_combination(
    lo: usize,
    hi: usize,
    k: usize,
    prefix: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if k == 0 {
        f(prefix);
        return;
    }
    if lo + k > hi + 1 {
        return;
    }
    for a in lo..=hi + 1 - k {
        prefix.push(a);
        for_each_combination(a + 1, hi, k - 1, prefix, f);
        prefix.pop();
    }
}

fn sum_over_subsets_containing_one(p: Prime, n: usize, g: usize) -> CyclotomicRational {
    let pv = p.get() as usize;
    let e = (n - 1) * (g - 1);
    (1..=pv - n + 1)
        .into_par_iter()
        .map(|second| {
            let mut local = CyclotomicRational::zero(p);
            let mut prefix = vec![0usize, second];
            for_each_combination(second + 1, pv - 1, n - 2, &mut prefix, &mut |exps| {
                local = local.add(&subset_term(p, e, g, exps));
            });
            local
        })
        .reduce(|| CyclotomicRational::zero(p), |a, b| a.add(&b))
}

fn certify_integer(total: &CyclotomicRational) -> Result<BigInt, VerlindeError> {
    match is_rational_integer(total) {
        Some(v) if !v.is_negative() => Ok(v),
        Some(v) => Err(VerlindeError::NotInteger(format!("value {v} is negative"))),
        None => Err(VerlindeError::NotInteger(
            "cyclotomic sum has a nonrational or noninteger value".into(),
        )),
    }
}

/// Exact degree at prime p, rank n and genus g, computed by the
/// rotation-reduced summation over subsets containing 1, scaled by p^e/n
/// with e = (n-1)(g-1).
pub fn verlinde_degree(p: Prime, n: usize, g: usize) -> Result<BigInt, VerlindeError> {
    check_inputs(p, n, g)?;
    let e = (n - 1) * (g - 1);
    let sum = sum_over_subsets_containing_one(p, n, g);
    let mut power = BigInt::one();
    for _ in 0..e {
        power *= p.get();
    }
    let total = sum.scale(&BigRational::new(power, BigInt::from(n)));
    certify_integer(&total)
}

/// Independent slow path: sum over all unordered n-subsets of the p-th
/// roots of unity with prefactor p^(e-1), no rotation reduction.
pub fn verlinde_degree_unreduced(p: Prime, n: usize, g: usize) -> Result<BigInt, VerlindeError> {
    check_inputs(p, n, g)?;
    let pv = p.get() as usize;
    let e = (n - 1) * (g - 1);
    let mut sum = CyclotomicRational::zero(p);
    let mut prefix = Vec::new();
    for_each_combination(0, pv - 1, n, &mut prefix, &mut |exps| {
        sum = sum.add(&subset_term(p, e, g, exps));
    });
    let mut power = BigInt::one();
    for _ in 0..e {
        power *= p.get();
    }
    let total = sum.scale(&BigRational::new(power, BigInt::from(p.get())));
    certify_integer(&total)
}

/// Whether the degree at genus 2 is invariant under n -> p-n.  Genus 2
/// keeps both ranks inside the p > n(g-1) bound.
pub fn verlinde_symmetry_check(p: Prime, n: usize) -> Result<bool, VerlindeError> {
    let pv = p.get() as usize;
    if !(1 < n && n < pv - 1) {
        return Err(VerlindeError::PreconditionViolated(format!(
            "rank {n} must satisfy 1 < n < p-1 = {}",
            pv - 1
        )));
    }
    Ok(verlinde_degree(p, n, 2)? == verlinde_degree(p, pv - n, 2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpcalc::enumerate_radii;
    use crate::fusion::{build_fusion_ring, genus_degree, sl2_table};

    fn pr(v: u32) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn cyclotomic_field_identities() {
        for pv in [3u32, 5, 7, 11] {
            let p = pr(pv);
            let z = CyclotomicRational::root_power(p, 1);
            let z_top = CyclotomicRational::root_power(p, i64::from(pv) - 1);
            assert_eq!(z.mul(&z_top), CyclotomicRational::one(p));
            let one_minus_z = CyclotomicRational::one(p).sub(&z);
            assert_eq!(
                one_minus_z.inv().unwrap().mul(&one_minus_z),
                CyclotomicRational::one(p)
            );
            let mut geom = CyclotomicRational::zero(p);
            for k in 0..pv {
                geom = geom.add(&CyclotomicRational::root_power(p, i64::from(k)));
            }
            assert!(geom.is_zero());
            assert_eq!(
                CyclotomicRational::zero(p).inv(),
                Err(VerlindeError::DivisionByZero)
            );
        }
        let p = pr(5);
        let five = CyclotomicRational::from_rational(p, BigRational::from_integer(5.into()));
        assert_eq!(is_rational_integer(&five), Some(BigInt::from(5)));
        assert_eq!(is_rational_integer(&CyclotomicRational::root_power(p, 1)), None);
        let half = CyclotomicRational::from_rational(
            p,
            BigRational::new(BigInt::from(3), BigInt::from(2)),
        );
        assert_eq!(is_rational_integer(&half), None);
    }

    #[test]
    fn degree_examples_at_genus_two() {
        assert_eq!(verlinde_degree(pr(3), 2, 2).unwrap(), BigInt::from(1));
        assert_eq!(verlinde_degree(pr(5), 2, 2).unwrap(), BigInt::from(5));
        assert_eq!(verlinde_degree(pr(7), 2, 2).unwrap(), BigInt::from(14));
    }

    #[test]
    fn reduction_agrees_with_direct_summation() {
        for pv in [3u32, 5, 7, 11] {
            let p = pr(pv);
            for n in 2..=3usize {
                if n >= pv as usize {
                    continue;
                }
                for g in 1..=3usize {
                    if pv as usize <= n * (g - 1) {
                        continue;
                    }
                    assert_eq!(
                        verlinde_degree(p, n, g).unwrap(),
                        verlinde_degree_unreduced(p, n, g).unwrap(),
                        "p={pv} n={n} g={g}"
                    );
                }
            }
        }
    }

    #[test]
    fn symmetry_at_genus_two() {
        assert!(verlinde_symmetry_check(pr(7), 2).unwrap());
        assert_eq!(verlinde_degree(pr(7), 5, 2).unwrap(), BigInt::from(14));
        assert!(verlinde_symmetry_check(pr(11), 3).unwrap());
        assert!(verlinde_symmetry_check(pr(5), 2).unwrap());
        for pv in [5u32, 7, 11, 13] {
            let p = pr(pv);
            for n in 2..pv as usize - 1 {
                assert!(verlinde_symmetry_check(p, n).unwrap(), "p={pv} n={n}");
            }
        }
    }

    #[test]
    fn matches_the_character_formula_at_rank_two() {
        for pv in [3u32, 5, 7, 11, 13] {
            let p = pr(pv);
            let ring = build_fusion_ring(&sl2_table(p)).unwrap();
            let by_characters = genus_degree(&ring, 2, &[]).unwrap();
            assert_eq!(
                verlinde_degree(p, 2, 2).unwrap(),
                BigInt::from(by_characters),
                "p={pv}"
            );
        }
    }

    #[test]
    fn genus_one_counts_the_distinct_classes() {
        // Plausibility check: at genus 1 the sum collapses to the number
        // of distinct radius classes of the given cardinality.
        for pv in [5u32, 7, 11, 13] {
            let p = pr(pv);
            for n in 2..pv as usize {
                let classes = enumerate_radii(p, n, true).len();
                assert_eq!(
                    verlinde_degree(p, n, 1).unwrap(),
                    BigInt::from(classes),
                    "p={pv} n={n}"
                );
            }
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(matches!(
            verlinde_degree(pr(5), 2, 4),
            Err(VerlindeError::PreconditionViolated(_))
        ));
        assert!(matches!(
            verlinde_degree(pr(5), 1, 2),
            Err(VerlindeError::PreconditionViolated(_))
        ));
        assert!(matches!(
            verlinde_degree(pr(5), 5, 2),
            Err(VerlindeError::PreconditionViolated(_))
        ));
        assert!(matches!(
            verlinde_degree(pr(5), 2, 0),
            Err(VerlindeError::PreconditionViolated(_))
        ));
        // n = p-1 is allowed for the degree itself.
        assert!(verlinde_degree(pr(5), 4, 2).is_ok());
        assert!(matches!(
            verlinde_symmetry_check(pr(5), 4),
            Err(VerlindeError::PreconditionViolated(_))
        ));
    }
}
