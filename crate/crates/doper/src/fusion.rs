//! Fusion rings of radius classes.
//!
//! A three-point table stores symmetric multiplicities on triples of
//! distinct radius classes of a fixed cardinality.  The cardinality-2 table
//! comes from a closed membership rule on small labels; star transport
//! carries it to cardinality p-2.  A table yields a commutative unital ring
//! through its structure constants, the ring's real characters are computed
//! by exact bisection against a separating probe element, and genus-weighted
//! degrees are character sums guarded by an integrality check.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;
use thiserror::Error;

use crate::fpcalc::{enumerate_radii, f_set_embeddings, FpError, Prime, RadiusClass};

/// Default precision bound for character values (well past 30 digits).
pub const DEFAULT_CHARACTER_EPS: f64 = 1e-35;

/// Absolute tolerance when rounding a character sum to an integer.
const INTEGRALITY_TOL_DEN: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FusionError {
    #[error("no unit element: {0}")]
    NoUnit(String),
    #[error("multiplication is not associative: {0}")]
    NotAssociative(String),
    #[error("degenerate character spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("integrality failure: {0}")]
    IntegralityFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cache parse error: {0}")]
    ParseCache(String),
    #[error(transparent)]
    Fp(#[from] FpError),
}

/// Symmetric nonnegative multiplicities on unordered triples from a basis
/// of radius classes of one cardinality.
///
/// Invariants: the basis is strictly ascending, every basis class is
/// distinct (no repeated multiset entries), and only nonzero values are
/// stored, keyed by sorted index triples.  Lookups outside the basis give
/// zero, so classes with repeated entries never carry mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreePointTable {
    p: Prime,
    n: usize,
    basis: Vec<RadiusClass>,
    values: BTreeMap<[usize; 3], u64>,
}

impl ThreePointTable {
    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Common cardinality of the basis classes.
    pub fn cardinality(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[RadiusClass] {
        &self.basis
    }

    pub fn index_of(&self, class: &RadiusClass) -> Option<usize> {
        self.basis.iter().position(|b| b == class)
    }

    /// Multiplicity at a triple of basis indices, in any order.
    pub fn value(&self, i: usize, j: usize, k: usize) -> u64 {
        let d = self.basis.len();
        assert!(i < d && j < d && k < d, "basis index out of range");
        let mut key = [i, j, k];
        key.sort_unstable();
        self.values.get(&key).copied().unwrap_or(0)
    }

    /// Multiplicity at a triple of classes; zero for any class outside the
    /// basis, in particular for classes with repeated entries.
    pub fn value_at(&self, a: &RadiusClass, b: &RadiusClass, c: &RadiusClass) -> u64 {
        match (self.index_of(a), self.index_of(b), self.index_of(c)) {
            (Some(i), Some(j), Some(k)) => self.value(i, j, k),
            _ => 0,
        }
    }

    /// Sorted index triples with nonzero multiplicity.
    pub fn support(&self) -> impl Iterator<Item = ([usize; 3], u64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }
}

/// Membership rule for cardinality-2 classes under their labels
/// 0..=(p-3)/2: one when the three labels obey all triangle inequalities
/// and their sum is at most p-2, else zero.
pub fn sl2_three_point(p: Prime, a: u32, b: u32, c: u32) -> u64 {
    assert!(p.get() >= 3, "requires an odd prime");
    let top = (p.get() - 3) / 2;
    assert!(a <= top && b <= top && c <= top, "label out of range");
    let triangle = a <= b + c && b <= a + c && c <= a + b;
    u64::from(triangle && a + b + c <= p.get() - 2)
}

/// The full membership table on the distinct cardinality-2 classes.
pub fn sl2_table(p: Prime) -> ThreePointTable {
    let basis = enumerate_radii(p, 2, true);
    let label: Vec<u32> = if p.get() == 3 {
        // One distinct class, one label; the labelling maps below need the
        // embedding data that exists only for p >= 5.
        vec![0]
    } else {
        let emb = f_set_embeddings(p);
        let mut label = vec![u32::MAX; basis.len()];
        for (a, class) in emb.w.iter().enumerate() {
            let i = basis
                .iter()
                .position(|b| b == class)
                .expect("labelled classes exhaust the distinct cardinality-2 classes");
            label[i] = a as u32;
        }
        assert!(label.iter().all(|&l| l != u32::MAX), "labelling is onto");
        label
    };
    let mut values = BTreeMap::new();
    for i in 0..basis.len() {
        for j in i..basis.len() {
            for k in j..basis.len() {
                let v = sl2_three_point(p, label[i], label[j], label[k]);
                if v != 0 {
                    values.insert([i, j, k], v);
                }
            }
        }
    }
    ThreePointTable { p, n: 2, basis, values }
}

/// Transport a table along the star bijection: indices are starred and the
/// basis re-sorted; multiplicities are carried over unchanged.  Applying
/// the transport twice returns the original table.
pub fn transport_star(t: &ThreePointTable) -> ThreePointTable {
    let starred: Vec<RadiusClass> = t
        .basis
        .iter()
        .map(|c| c.star().expect("basis classes are distinct"))
        .collect();
    let mut order: Vec<usize> = (0..starred.len()).collect();
    order.sort_by(|&a, &b| starred[a].cmp(&starred[b]));
    let mut perm = vec![0usize; starred.len()];
    let mut basis = Vec::with_capacity(starred.len());
    for (new_i, &old_i) in order.iter().enumerate() {
        perm[old_i] = new_i;
        basis.push(starred[old_i].clone());
    }
    let mut values = BTreeMap::new();
    for (key, &v) in &t.values {
        let mut nk = [perm[key[0]], perm[key[1]], perm[key[2]]];
        nk.sort_unstable();
        values.insert(nk, v);
    }
    let n = t.p.get() as usize - t.n;
    ThreePointTable { p: t.p, n, basis, values }
}

/// A commutative associative ring with distinguished basis and unit,
/// presented by its structure constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionRingRep {
    basis: Vec<RadiusClass>,
    /// `mult[i][j][k]`: coefficient of `basis[k]` in `basis[i] * basis[j]`.
    mult: Vec<Vec<Vec<u64>>>,
    unit: usize,
}

impl FusionRingRep {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RadiusClass] {
        &self.basis
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn prime(&self) -> Prime {
        self.basis[0].prime()
    }

    /// Common cardinality of the basis classes.
    pub fn cardinality(&self) -> usize {
        self.basis[0].cardinality()
    }

    pub fn mult(&self, i: usize, j: usize, k: usize) -> u64 {
        self.mult[i][j][k]
    }

    /// Product of two elements given by basis coordinates.
    pub fn product(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let d = self.rank();
        assert!(x.len() == d && y.len() == d, "coordinate length mismatch");
        let mut out = vec![0u64; d];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0 {
                    continue;
                }
                for k in 0..d {
                    out[k] += x[i] * y[j] * self.mult[i][j][k];
                }
            }
        }
        out
    }
}

/// Build the ring presented by a three-point table: structure constants are
/// the table values, the unit is found by search, and associativity is
/// checked exhaustively.
pub fn build_fusion_ring(t: &ThreePointTable) -> Result<FusionRingRep, FusionError> {
    let d = t.basis.len();
    if d == 0 {
        return Err(FusionError::InvalidInput("empty basis".into()));
    }
    let mut mult = vec![vec![vec![0u64; d]; d]; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                mult[i][j][k] = t.value(i, j, k);
            }
        }
    }
    let units: Vec<usize> = (0..d)
        .filter(|&u| (0..d).all(|j| (0..d).all(|k| mult[u][j][k] == u64::from(j == k))))
        .collect();
    let unit = match units.as_slice() {
        [u] => *u,
        [] => {
            return Err(FusionError::NoUnit(
                "no basis element multiplies as the identity".into(),
            ))
        }
        _ => {
            return Err(FusionError::NoUnit(
                "several basis elements multiply as the identity".into(),
            ))
        }
    };
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let lhs: u128 = (0..d)
                        .map(|m| mult[i][j][m] as u128 * mult[m][k][l] as u128)
                        .sum();
                    let rhs: u128 = (0..d)
                        .map(|m| mult[j][k][m] as u128 * mult[i][m][l] as u128)
                        .sum();
                    if lhs != rhs {
                        return Err(FusionError::NotAssociative(format!(
                            "(e{i}*e{j})*e{k} and e{i}*(e{j}*e{k}) differ in the e{l} coefficient"
                        )));
                    }
                }
            }
        }
    }
    Ok(FusionRingRep { basis: t.basis.clone(), mult, unit })
}

/// Sum of the squares of the basis elements, in basis coordinates.
pub fn casimir(ring: &FusionRingRep) -> Vec<u64> {
    let d = ring.rank();
    (0..d)
        .map(|k| (0..d).map(|l| ring.mult(l, l, k)).sum())
        .collect()
}

/// Real character values on the basis of a fusion ring.  Every stored
/// value is within `eps` of the true character value, and the table
/// satisfies |chi(xy) - chi(x)chi(y)| < eps on all basis pairs.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    values: Vec<Vec<BigRational>>,
    eps: BigRational,
}

impl CharacterTable {
    pub fn num_chars(&self) -> usize {
        self.values.len()
    }

    pub fn eps(&self) -> &BigRational {
        &self.eps
    }

    /// Value of character `chi` on basis element `i`.
    pub fn value(&self, chi: usize, i: usize) -> &BigRational {
        &self.values[chi][i]
    }

    pub fn value_f64(&self, chi: usize, i: usize) -> f64 {
        self.values[chi][i].to_f64().expect("character values are finite")
    }

    /// Value of character `chi` on an element given in basis coordinates.
    pub fn eval(&self, chi: usize, coeffs: &[u64]) -> BigRational {
        assert!(coeffs.len() == self.values[chi].len(), "coordinate length mismatch");
        let mut acc = BigRational::zero();
        for (c, v) in coeffs.iter().zip(&self.values[chi]) {
            if *c != 0 {
                acc += v * BigRational::from_integer(BigInt::from(*c));
            }
        }
        acc
    }
}

fn q_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn q_half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

fn qpow(x: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn qsign(x: &BigRational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

use crate::ratpoly::{
    derivative as qp_derivative, eval as qp_eval, gcd as qp_gcd, rem as qp_rem, trim as qp_trim,
};

fn qp_squarefree(f: &[BigRational]) -> bool {
    qp_gcd(f, &qp_derivative(f)).len() == 1
}

/// Sturm chain of a squarefree polynomial.
fn sturm_chain(f: &[BigRational]) -> Vec<Vec<BigRational>> {
    let mut chain = vec![qp_trim(f.to_vec()), qp_trim(qp_derivative(f))];
    while chain.last().map_or(false, |t| t.len() > 1) {
        let m = chain.len();
        let r = qp_rem(&chain[m - 2], &chain[m - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.iter().map(|c| -c.clone()).collect());
    }
    chain
}

fn sign_variations(chain: &[Vec<BigRational>], x: &BigRational) -> usize {
    let mut prev = 0i8;
    let mut count = 0;
    for poly in chain {
        let s = qsign(&qp_eval(poly, x));
        if s != 0 {
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    count
}

/// Strict bound on the absolute value of every root of a monic polynomial.
fn cauchy_bound(f: &[BigRational]) -> BigRational {
    let d = f.len() - 1;
    let mut m = BigRational::zero();
    for c in &f[..d] {
        let a = c.abs() / f[d].abs();
        if a > m {
            m = a;
        }
    }
    m + BigRational::one()
}

/// An interior point of (lo, hi) where `f` does not vanish.
fn pick_split(f: &[BigRational], lo: &BigRational, hi: &BigRational) -> BigRational {
    let degree = f.len() - 1;
    let den = degree as i64 + 2;
    let mut offsets: Vec<i64> = (1..den).collect();
    offsets.sort_by_key(|&j| (2 * j - den).abs());
    let width = hi - lo;
    for j in offsets {
        let cand = lo + &width * BigRational::new(BigInt::from(j), BigInt::from(den));
        if !qp_eval(f, &cand).is_zero() {
            return cand;
        }
    }
    unreachable!("more split candidates than roots");
}

/// Split (lo, hi), whose endpoints are not roots, into subintervals each
/// containing exactly one root.  Output is in ascending order.
fn isolate(
    f: &[BigRational],
    chain: &[Vec<BigRational>],
    lo: BigRational,
    hi: BigRational,
    count: usize,
    out: &mut Vec<(BigRational, BigRational)>,
) {
    if count == 0 {
        return;
    }
    if count == 1 {
        out.push((lo, hi));
        return;
    }
    let split = pick_split(f, &lo, &hi);
    let left = sign_variations(chain, &lo) - sign_variations(chain, &split);
    isolate(f, chain, lo, split.clone(), left, out);
    isolate(f, chain, split, hi, count - left, out);
}

/// Bisect an isolating interval down to width at most `delta`; an exact
/// rational root is returned as is.
fn refine_root(
    f: &[BigRational],
    mut lo: BigRational,
    mut hi: BigRational,
    delta: &BigRational,
) -> BigRational {
    let slo = qsign(&qp_eval(f, &lo));
    debug_assert!(slo != 0 && qsign(&qp_eval(f, &hi)) == -slo, "endpoints must bracket");
    while &hi - &lo > *delta {
        let mid = (&lo + &hi) * q_half();
        let fm = qp_eval(f, &mid);
        if fm.is_zero() {
            return mid;
        }
        if qsign(&fm) == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (&lo + &hi) * q_half()
}

fn qmat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let d = a.len();
    let mut out = vec![vec![BigRational::zero(); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..d {
                let term = &a[i][k] * &b[k][j];
                out[i][j] += term;
            }
        }
    }
    out
}

fn qtrace(a: &[Vec<BigRational>]) -> BigRational {
    let mut t = BigRational::zero();
    for (i, row) in a.iter().enumerate() {
        t += &row[i];
    }
    t
}

/// Monic characteristic polynomial det(T*I - M), ascending coefficients.
fn char_poly_monic(m: &[Vec<BigInt>]) -> Vec<BigRational> {
    let d = m.len();
    let a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut coeffs = vec![BigRational::zero(); d + 1];
    coeffs[d] = BigRational::one();
    let mut mk = a.clone();
    for k in 1..=d {
        let ck = -qtrace(&mk) / q_int(k as i64);
        coeffs[d - k] = ck.clone();
        if k < d {
            let mut shifted = mk;
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] += &ck;
            }
            mk = qmat_mul(&a, &shifted);
        }
    }
    coeffs
}

/// Inverse of a square rational matrix, or None when singular.
fn qmat_inverse(a: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let d = a.len();
    let mut work: Vec<Vec<BigRational>> = a.to_vec();
    let mut inv = vec![vec![BigRational::zero(); d]; d];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    for col in 0..d {
        let pivot = (col..d).find(|&r| !work[r][col].is_zero())?;
        work.swap(col, pivot);
        inv.swap(col, pivot);
        let lead = work[col][col].clone();
        for x in &mut work[col] {
            *x /= lead.clone();
        }
        for x in &mut inv[col] {
            *x /= lead.clone();
        }
        for r in 0..d {
            if r == col || work[r][col].is_zero() {
                continue;
            }
            let factor = work[r][col].clone();
            for c in 0..d {
                let t = &factor * &work[col][c];
                work[r][c] -= t;
                let t = &factor * &inv[col][c];
                inv[r][c] -= t;
            }
        }
    }
    Some(inv)
}

/// Compute the real characters of the ring, each within `eps`.
///
/// A probe element with squarefree characteristic polynomial identifies the
/// ring with polynomials in one generator; the probe's eigenvalues are
/// isolated by Sturm counts and refined by exact bisection far enough that
/// every character value and every multiplicativity defect is below `eps`.
/// Characters are ordered by ascending probe eigenvalue.
pub fn characters(ring: &FusionRingRep, eps: f64) -> Result<CharacterTable, FusionError> {
    let eps_r = BigRational::from_float(eps)
        .filter(|e| e.is_positive())
        .ok_or_else(|| FusionError::InvalidInput("eps must be positive and finite".into()))?;
    let d = ring.rank();

    let mut probes: Vec<Vec<i64>> = Vec::new();
    probes.push(casimir(ring).iter().map(|&c| c as i64).collect());
    probes.push((0..d).map(|i| i as i64 + 1).collect());
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    for _ in 0..40 {
        let mut w = Vec::with_capacity(d);
        for _ in 0..d {
            state = state
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            w.push(((state >> 33) % 17) as i64);
        }
        probes.push(w);
    }

    let max_n = (0..d)
        .flat_map(|i| (0..d).flat_map(move |j| (0..d).map(move |k| (i, j, k))))
        .map(|(i, j, k)| ring.mult(i, j, k))
        .max()
        .unwrap_or(0);

    for probe in &probes {
        // Multiplication by the probe, in column convention.
        let mut mc = vec![vec![BigInt::zero(); d]; d];
        for i in 0..d {
            if probe[i] == 0 {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    mc[k][j] += BigInt::from(probe[i]) * BigInt::from(ring.mult(i, j, k));
                }
            }
        }
        let f = char_poly_monic(&mc);
        if !qp_squarefree(&f) {
            continue;
        }
        let chain = sturm_chain(&f);
        let bound = cauchy_bound(&f);
        let neg_bound = -bound.clone();
        let total = sign_variations(&chain, &neg_bound) - sign_variations(&chain, &bound);
        if total < d {
            return Err(FusionError::DegenerateSpectrum(
                "a separating probe has nonreal eigenvalues, so no full real character table exists"
                    .into(),
            ));
        }

        // Coordinates of the probe powers applied to the unit.
        let mut v = vec![vec![BigRational::zero(); d]; d];
        let mut u = vec![BigInt::zero(); d];
        u[ring.unit()] = BigInt::one();
        for k in 0..d {
            for r in 0..d {
                v[r][k] = BigRational::from_integer(u[r].clone());
            }
            if k + 1 < d {
                let mut next = vec![BigInt::zero(); d];
                for (r, row) in mc.iter().enumerate() {
                    for (c, entry) in row.iter().enumerate() {
                        if !entry.is_zero() && !u[c].is_zero() {
                            next[r] += entry * &u[c];
                        }
                    }
                }
                u = next;
            }
        }
        let Some(a_inv) = qmat_inverse(&v) else {
            continue;
        };

        // Error amplification through polynomial evaluation at the roots.
        let bmax = if bound > BigRational::one() { bound.clone() } else { BigRational::one() };
        let mut cmax = BigRational::zero();
        let mut dmax = BigRational::zero();
        for i in 0..d {
            let mut ci = BigRational::zero();
            let mut di = BigRational::zero();
            let mut pw = BigRational::one();
            for k in 0..d {
                let abs_a = a_inv[k][i].abs();
                if k >= 1 {
                    di += &abs_a * q_int(k as i64) * (&pw / &bmax);
                }
                ci += &abs_a * &pw;
                pw *= &bmax;
            }
            if ci > cmax {
                cmax = ci;
            }
            if di > dmax {
                dmax = di;
            }
        }
        let amp = q_int(d as i64) * q_int(max_n as i64) * &dmax
            + q_int(2) * &cmax * &dmax
            + &dmax * &dmax
            + &dmax
            + BigRational::one();
        let delta = &eps_r / &amp;

        let mut intervals = Vec::with_capacity(d);
        isolate(&f, &chain, neg_bound, bound, d, &mut intervals);
        let roots: Vec<BigRational> = intervals
            .into_iter()
            .map(|(lo, hi)| refine_root(&f, lo, hi, &delta))
            .collect();

        let mut values = vec![vec![BigRational::zero(); d]; d];
        for (c, root) in roots.iter().enumerate() {
            let mut pw = Vec::with_capacity(d);
            pw.push(BigRational::one());
            for k in 1..d {
                let next = &pw[k - 1] * root;
                pw.push(next);
            }
            for i in 0..d {
                let mut acc = BigRational::zero();
                for k in 0..d {
                    if !a_inv[k][i].is_zero() {
                        acc += &a_inv[k][i] * &pw[k];
                    }
                }
                values[c][i] = acc;
            }
        }

        for row in &values {
            if row[ring.unit()] != BigRational::one() {
                return Err(FusionError::DegenerateSpectrum(
                    "unit character drifted from one; retry with smaller eps".into(),
                ));
            }
        }
        for c in 0..d {
            for i in 0..d {
                for j in i..d {
                    let mut lhs = BigRational::zero();
                    for k in 0..d {
                        let m = ring.mult(i, j, k);
                        if m != 0 {
                            lhs += &values[c][k] * q_int(m as i64);
                        }
                    }
                    let gap = (lhs - &values[c][i] * &values[c][j]).abs();
                    if gap >= eps_r {
                        return Err(FusionError::DegenerateSpectrum(
                            "characters fail multiplicativity at the requested precision; retry with smaller eps"
                                .into(),
                        ));
                    }
                }
            }
        }
        return Ok(CharacterTable { values, eps: eps_r });
    }
    Err(FusionError::DegenerateSpectrum(
        "no separating probe element found; the ring may be non-reduced".into(),
    ))
}

/// Genus-weighted degree with a precomputed character table: the sum over
/// characters of chi(casimir)^(genus-1) times the product of chi over the
/// insertions, rounded to a nonnegative integer.
///
/// Insertions must be radius classes for the ring's prime and cardinality;
/// any insertion outside the basis (in particular any class with repeated
/// entries) makes the degree zero.  Genus zero requires at least three
/// insertions.
pub fn genus_degree_with(
    ring: &FusionRingRep,
    chars: &CharacterTable,
    genus: usize,
    insertions: &[RadiusClass],
) -> Result<u64, FusionError> {
    if genus == 0 && insertions.len() < 3 {
        return Err(FusionError::InvalidInput(
            "genus zero needs at least three insertions".into(),
        ));
    }
    let p = ring.prime();
    let n = ring.cardinality();
    let mut idx = Vec::with_capacity(insertions.len());
    for rho in insertions {
        if rho.prime() != p {
            return Err(FusionError::InvalidInput(format!(
                "insertion prime {} differs from ring prime {}",
                rho.prime().get(),
                p.get()
            )));
        }
        if rho.cardinality() != n {
            return Err(FusionError::InvalidInput(format!(
                "insertion cardinality {} differs from ring cardinality {n}",
                rho.cardinality()
            )));
        }
        match ring.basis().iter().position(|b| b == rho) {
            Some(i) => idx.push(i),
            None => return Ok(0),
        }
    }
    let cas = casimir(ring);
    let mut total = BigRational::zero();
    for c in 0..chars.num_chars() {
        let casx = chars.eval(c, &cas);
        let mut term = if genus == 0 {
            if casx.abs() <= *chars.eps() {
                return Err(FusionError::DegenerateSpectrum(
                    "casimir character vanishes to working precision".into(),
                ));
            }
            casx.recip()
        } else {
            qpow(&casx, genus - 1)
        };
        for &i in &idx {
            term *= chars.value(c, i);
        }
        total += term;
    }
    let nearest = (&total + q_half()).floor();
    let diff = (&total - &nearest).abs();
    let tol = BigRational::new(BigInt::from(1), BigInt::from(INTEGRALITY_TOL_DEN));
    if diff >= tol {
        return Err(FusionError::IntegralityFailure(format!(
            "character sum {} is not within 1e-6 of an integer",
            total.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let int = nearest.to_integer();
    if int.is_negative() {
        return Err(FusionError::IntegralityFailure(format!(
            "character sum rounds to the negative integer {int}"
        )));
    }
    int.to_u64().ok_or_else(|| {
        FusionError::IntegralityFailure("degree does not fit in 64 bits".into())
    })
}

/// Genus-weighted degree, computing characters at the default precision.
pub fn genus_degree(
    ring: &FusionRingRep,
    genus: usize,
    insertions: &[RadiusClass],
) -> Result<u64, FusionError> {
    let chars = characters(ring, DEFAULT_CHARACTER_EPS)?;
    genus_degree_with(ring, &chars, genus, insertions)
}

/// Check the separating gluing identity: the degree at genus g1+g2 with
/// insertions x and y together equals the sum over basis classes of the
/// product of the two glued degrees sharing that class.  Arities r must
/// satisfy r >= 3 - 2g on each part and on the glued surface.
pub fn verify_factorization(
    ring: &FusionRingRep,
    g1: usize,
    g2: usize,
    x: &[RadiusClass],
    y: &[RadiusClass],
) -> Result<bool, FusionError> {
    let chars = characters(ring, DEFAULT_CHARACTER_EPS)?;
    verify_factorization_with(ring, &chars, g1, g2, x, y)
}

/// Same check with a precomputed character table, for batched runs.
pub fn verify_factorization_with(
    ring: &FusionRingRep,
    chars: &CharacterTable,
    g1: usize,
    g2: usize,
    x: &[RadiusClass],
    y: &[RadiusClass],
) -> Result<bool, FusionError> {
    let arity_ok = |g: usize, r: usize| r as i64 >= 3 - 2 * g as i64;
    if !arity_ok(g1, x.len() + 1) || !arity_ok(g2, y.len() + 1) || !arity_ok(g1 + g2, x.len() + y.len())
    {
        return Err(FusionError::InvalidInput(
            "insertion arities are inadmissible for the glued genera".into(),
        ));
    }
    let mut joint = x.to_vec();
    joint.extend_from_slice(y);
    let lhs = genus_degree_with(ring, chars, g1 + g2, &joint)? as u128;
    let mut rhs: u128 = 0;
    for lam in ring.basis() {
        let mut xs = x.to_vec();
        xs.push(lam.clone());
        let mut ys = y.to_vec();
        ys.push(lam.clone());
        let a = genus_degree_with(ring, chars, g1, &xs)? as u128;
        if a == 0 {
            continue;
        }
        let b = genus_degree_with(ring, chars, g2, &ys)? as u128;
        rhs += a * b;
    }
    Ok(lhs == rhs)
}

fn entries_string(class: &RadiusClass) -> String {
    let mut s = String::from("[");
    for (i, e) in class.rep().entries().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{e}");
    }
    s.push(']');
    s
}

/// Serialize a table to its canonical cache form: compact JSON with fields
/// p, n, basis (canonical representative strings, ascending) and
/// three_point (sorted index triples with their nonzero values).
pub fn table_to_json(t: &ThreePointTable) -> String {
    let mut s = String::new();
    let _ = write!(s, "{{\"p\":{},\"n\":{},\"basis\":[", t.p.get(), t.n);
    for (i, class) in t.basis.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "\"{}\"", entries_string(class));
    }
    s.push_str("],\"three_point\":[");
    for (i, (key, v)) in t.values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "[{},{},{},{}]", key[0], key[1], key[2], v);
    }
    s.push_str("]}");
    s
}

fn cache_err(why: impl Into<String>) -> FusionError {
    FusionError::ParseCache(why.into())
}

/// Parse the canonical cache form produced by [`table_to_json`].  The
/// canonical shape is enforced: ascending distinct basis in representative
/// form, sorted triples, no zero values, so that reserializing reproduces
/// the input bytes.
pub fn table_from_json(text: &str) -> Result<ThreePointTable, FusionError> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| cache_err(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| cache_err("top level must be an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "p" | "n" | "basis" | "three_point") {
            return Err(cache_err(format!("unknown field {key:?}")));
        }
    }
    let pv = obj
        .get("p")
        .and_then(Value::as_u64)
        .ok_or_else(|| cache_err("missing integer field \"p\""))?;
    let pv = u32::try_from(pv).map_err(|_| cache_err("field \"p\" is too large"))?;
    let p = Prime::new(pv)?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| cache_err("missing integer field \"n\""))? as usize;
    if n < 1 || n > p.get() as usize {
        return Err(cache_err("field \"n\" must lie in 1..=p"));
    }
    let basis_raw = obj
        .get("basis")
        .and_then(Value::as_array)
        .ok_or_else(|| cache_err("missing array field \"basis\""))?;
    if basis_raw.is_empty() {
        return Err(cache_err("basis must be nonempty"));
    }
    let mut basis = Vec::with_capacity(basis_raw.len());
    for entry in basis_raw {
        let s = entry
            .as_str()
            .ok_or_else(|| cache_err("basis entries must be strings"))?;
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| cache_err(format!("basis entry {s:?} is not bracketed")))?;
        let mut entries = Vec::new();
        for part in inner.split(',') {
            let e: u32 = part
                .parse()
                .map_err(|_| cache_err(format!("basis entry {s:?} has a bad exponent")))?;
            entries.push(e);
        }
        if entries.len() != n {
            return Err(cache_err(format!("basis entry {s:?} does not have cardinality {n}")));
        }
        let class = RadiusClass::from_entries(p, entries)?;
        if entries_string(&class) != s {
            return Err(cache_err(format!("basis entry {s:?} is not in representative form")));
        }
        if !class.is_distinct() {
            return Err(cache_err(format!("basis entry {s:?} has repeated entries")));
        }
        if let Some(prev) = basis.last() {
            if *prev >= class {
                return Err(cache_err("basis entries must be strictly ascending"));
            }
        }
        basis.push(class);
    }
    let triples = obj
        .get("three_point")
        .and_then(Value::as_array)
        .ok_or_else(|| cache_err("missing array field \"three_point\""))?;
    let mut values = BTreeMap::new();
    let mut prev_key: Option<[usize; 3]> = None;
    for item in triples {
        let row = item
            .as_array()
            .filter(|r| r.len() == 4)
            .ok_or_else(|| cache_err("three_point entries must be arrays of four integers"))?;
        let mut nums = [0u64; 4];
        for (slot, cell) in nums.iter_mut().zip(row) {
            *slot = cell
                .as_u64()
                .ok_or_else(|| cache_err("three_point entries must be nonnegative integers"))?;
        }
        let key = [nums[0] as usize, nums[1] as usize, nums[2] as usize];
        if !(key[0] <= key[1] && key[1] <= key[2] && key[2] < basis.len()) {
            return Err(cache_err(format!(
                "triple [{},{},{}] is not sorted within the basis range",
                key[0], key[1], key[2]
            )));
        }
        if nums[3] == 0 {
            return Err(cache_err("zero multiplicities are omitted in canonical form"));
        }
        if let Some(prev) = prev_key {
            if prev >= key {
                return Err(cache_err("three_point keys must be strictly ascending"));
            }
        }
        prev_key = Some(key);
        values.insert(key, nums[3]);
    }
    Ok(ThreePointTable { p, n, basis, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operengine::brute_force_sl2_count;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pr(v: u32) -> Prime {
        Prime::new(v).unwrap()
    }

    fn rc(p: Prime, entries: &[u32]) -> RadiusClass {
        RadiusClass::from_entries(p, entries.to_vec()).unwrap()
    }

    #[test]
    fn membership_rule_on_labels() {
        let p = pr(5);
        assert_eq!(sl2_three_point(p, 0, 0, 0), 1);
        assert_eq!(sl2_three_point(p, 1, 1, 1), 1);
        for (a, b, c) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
            assert_eq!(sl2_three_point(p, a, b, c), 0);
        }
        let p7 = pr(7);
        assert_eq!(sl2_three_point(p7, 1, 1, 2), 1);
        assert_eq!(sl2_three_point(p7, 2, 2, 2), 0);
        // Symmetry under all label permutations.
        for a in 0..=2 {
            for b in 0..=2 {
                for c in 0..=2 {
                    let v = sl2_three_point(p7, a, b, c);
                    assert_eq!(v, sl2_three_point(p7, b, a, c));
                    assert_eq!(v, sl2_three_point(p7, c, b, a));
                }
            }
        }
    }

    #[test]
    fn cardinality_two_table_matches_the_membership_rule() {
        for pv in [5u32, 7, 11, 13] {
            let p = pr(pv);
            let t = sl2_table(p);
            assert_eq!(t.cardinality(), 2);
            assert_eq!(t.basis(), enumerate_radii(p, 2, true).as_slice());
            assert!(t.basis().iter().all(RadiusClass::is_distinct));
            let emb = f_set_embeddings(p);
            let top = (pv - 3) / 2;
            for a in 0..=top {
                for b in a..=top {
                    for c in b..=top {
                        let expect = sl2_three_point(p, a, b, c);
                        let got = t.value_at(
                            &emb.w[a as usize],
                            &emb.w[b as usize],
                            &emb.w[c as usize],
                        );
                        assert_eq!(got, expect, "p={pv} labels ({a},{b},{c})");
                    }
                }
            }
        }
        // Ordered count of nonzero triples at p = 5.
        let t = sl2_table(pr(5));
        let d = t.basis().len();
        let mut ordered = 0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if t.value(i, j, k) != 0 {
                        ordered += 1;
                    }
                }
            }
        }
        assert_eq!(ordered, 5);
    }

    #[test]
    fn star_transport_is_an_involution() {
        for pv in [5u32, 7, 11] {
            let p = pr(pv);
            let t2 = sl2_table(p);
            let t = transport_star(&t2);
            assert_eq!(t.cardinality(), pv as usize - 2);
            assert_eq!(t.basis(), enumerate_radii(p, pv as usize - 2, true).as_slice());
            assert_eq!(transport_star(&t), t2);
            // The transported table is the membership table read through
            // the complement-style indexing.
            let emb = f_set_embeddings(p);
            let top = (pv - 3) / 2;
            for a in 0..=top {
                for b in a..=top {
                    for c in b..=top {
                        let got = t.value_at(
                            &emb.iota[a as usize],
                            &emb.iota[b as usize],
                            &emb.iota[c as usize],
                        );
                        assert_eq!(got, sl2_three_point(p, a, b, c), "p={pv} ({a},{b},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn ring_construction_finds_the_unit_for_all_small_primes() {
        for pv in [5u32, 7, 11, 13, 17, 19, 23, 29, 31] {
            let p = pr(pv);
            let emb = f_set_embeddings(p);
            let t2 = sl2_table(p);
            let ring = build_fusion_ring(&t2).unwrap();
            assert_eq!(ring.rank(), (pv as usize - 1) / 2);
            assert_eq!(ring.basis()[ring.unit()], emb.w[0]);
            let ring_star = build_fusion_ring(&transport_star(&t2)).unwrap();
            assert_eq!(ring_star.basis()[ring_star.unit()], emb.iota[0]);
        }
    }

    #[test]
    fn fibonacci_structure_at_five() {
        let ring = build_fusion_ring(&sl2_table(pr(5))).unwrap();
        assert_eq!(ring.rank(), 2);
        assert_eq!(ring.unit(), 0);
        assert_eq!(ring.product(&[0, 1], &[0, 1]), vec![1, 1]);
        assert_eq!(casimir(&ring), vec![2, 1]);

        let ring7 = build_fusion_ring(&sl2_table(pr(7))).unwrap();
        assert_eq!(ring7.rank(), 3);
        assert!(casimir(&ring7)[ring7.unit()] >= 1);
    }

    #[test]
    fn characters_match_the_golden_ratio_at_five() {
        let ring = build_fusion_ring(&sl2_table(pr(5))).unwrap();
        let chars = characters(&ring, 1e-30).unwrap();
        assert_eq!(chars.num_chars(), 2);
        for c in 0..2 {
            assert_eq!(*chars.value(c, ring.unit()), BigRational::one());
        }
        let lo = chars.value_f64(0, 1);
        let hi = chars.value_f64(1, 1);
        let root5 = 5f64.sqrt();
        assert!((lo - (1.0 - root5) / 2.0).abs() < 1e-12);
        assert!((hi - (1.0 + root5) / 2.0).abs() < 1e-12);
        let cas = casimir(&ring);
        let cas_lo = chars.eval(0, &cas).to_f64().unwrap();
        let cas_hi = chars.eval(1, &cas).to_f64().unwrap();
        assert!((cas_lo - (5.0 - root5) / 2.0).abs() < 1e-12);
        assert!((cas_hi - (5.0 + root5) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn character_tables_are_multiplicative_at_larger_primes() {
        for pv in [11u32, 13] {
            let p = pr(pv);
            for table in [sl2_table(p), transport_star(&sl2_table(p))] {
                let ring = build_fusion_ring(&table).unwrap();
                let chars = characters(&ring, 1e-30).unwrap();
                assert_eq!(chars.num_chars(), ring.rank());
                let d = ring.rank();
                for c in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            let mut lhs = BigRational::zero();
                            for k in 0..d {
                                let m = ring.mult(i, j, k);
                                if m != 0 {
                                    lhs += chars.value(c, k) * q_int(m as i64);
                                }
                            }
                            let gap = (lhs - chars.value(c, i) * chars.value(c, j)).abs();
                            assert!(gap < *chars.eps(), "p={pv} chi_{c}(e{i} e{j})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn genus_degrees_at_five() {
        let p = pr(5);
        let ring = build_fusion_ring(&sl2_table(p)).unwrap();
        let w0 = rc(p, &[0, 1]);
        let w1 = rc(p, &[0, 2]);
        assert_eq!(genus_degree(&ring, 2, &[]).unwrap(), 5);
        assert_eq!(genus_degree(&ring, 0, &[w0.clone(), w0.clone(), w0.clone()]).unwrap(), 1);
        assert_eq!(
            genus_degree(&ring, 0, &[w1.clone(), w1.clone(), w1.clone(), w1.clone()]).unwrap(),
            2
        );
        // Classes with repeated entries carry no mass.
        let squashed = rc(p, &[0, 0]);
        assert_eq!(genus_degree(&ring, 0, &[squashed, w0.clone(), w0.clone()]).unwrap(), 0);
        // Preconditions.
        assert!(matches!(
            genus_degree(&ring, 0, &[w0.clone(), w1.clone()]),
            Err(FusionError::InvalidInput(_))
        ));
        let wrong_card = rc(p, &[0, 1, 2]);
        assert!(matches!(
            genus_degree(&ring, 1, &[wrong_card]),
            Err(FusionError::InvalidInput(_))
        ));
    }

    #[test]
    fn genus_zero_triples_match_the_brute_oracle() {
        for pv in [5u32, 7] {
            let p = pr(pv);
            let ring = build_fusion_ring(&sl2_table(p)).unwrap();
            let chars = characters(&ring, DEFAULT_CHARACTER_EPS).unwrap();
            let basis = ring.basis().to_vec();
            for i in 0..basis.len() {
                for j in i..basis.len() {
                    for k in j..basis.len() {
                        let triple = [basis[i].clone(), basis[j].clone(), basis[k].clone()];
                        let counted = brute_force_sl2_count(p, &triple).unwrap() as u64;
                        let formula =
                            genus_degree_with(&ring, &chars, 0, &triple).unwrap();
                        assert_eq!(formula, counted, "p={pv} triple ({i},{j},{k})");
                    }
                }
            }
        }
    }

    #[test]
    fn degree_duality_under_star_transport() {
        for pv in [5u32, 7, 11, 13] {
            let p = pr(pv);
            let t2 = sl2_table(p);
            let ring = build_fusion_ring(&t2).unwrap();
            let ring_star = build_fusion_ring(&transport_star(&t2)).unwrap();
            let chars = characters(&ring, DEFAULT_CHARACTER_EPS).unwrap();
            let chars_star = characters(&ring_star, DEFAULT_CHARACTER_EPS).unwrap();
            let basis = ring.basis().to_vec();
            let starred: Vec<RadiusClass> =
                basis.iter().map(|c| c.star().unwrap()).collect();
            // Unpointed genus 2 and singly pointed genus 1.
            assert_eq!(
                genus_degree_with(&ring, &chars, 2, &[]).unwrap(),
                genus_degree_with(&ring_star, &chars_star, 2, &[]).unwrap(),
                "p={pv} genus 2"
            );
            for (b, s) in basis.iter().zip(&starred) {
                assert_eq!(
                    genus_degree_with(&ring, &chars, 1, std::slice::from_ref(b)).unwrap(),
                    genus_degree_with(&ring_star, &chars_star, 1, std::slice::from_ref(s))
                        .unwrap(),
                    "p={pv} genus 1"
                );
            }
            for i in 0..basis.len() {
                for j in i..basis.len() {
                    for k in j..basis.len() {
                        let triple = [basis[i].clone(), basis[j].clone(), basis[k].clone()];
                        let dual = [starred[i].clone(), starred[j].clone(), starred[k].clone()];
                        assert_eq!(
                            genus_degree_with(&ring, &chars, 0, &triple).unwrap(),
                            genus_degree_with(&ring_star, &chars_star, 0, &dual).unwrap(),
                            "p={pv} triple ({i},{j},{k})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn factorization_examples() {
        let p = pr(5);
        let ring = build_fusion_ring(&sl2_table(p)).unwrap();
        let w0 = rc(p, &[0, 1]);
        let w1 = rc(p, &[0, 2]);
        let pair = [w1.clone(), w1.clone()];
        assert!(verify_factorization(&ring, 0, 0, &pair, &pair).unwrap());
        assert!(verify_factorization(&ring, 1, 1, &[w0.clone()], &[w0.clone()]).unwrap());

        let p7 = pr(7);
        let ring7 = build_fusion_ring(&sl2_table(p7)).unwrap();
        let emb = f_set_embeddings(p7);
        let x: Vec<RadiusClass> = (0..3).map(|a| emb.w[a].clone()).collect();
        assert!(verify_factorization(&ring7, 0, 2, &x, &[]).unwrap());

        // Inadmissible arity.
        assert!(matches!(
            verify_factorization(&ring, 0, 0, &[w1.clone()], &pair),
            Err(FusionError::InvalidInput(_))
        ));
    }

    #[test]
    fn random_factorizations_hold() {
        for pv in [5u32, 7, 11] {
            let p = pr(pv);
            let ring = build_fusion_ring(&sl2_table(p)).unwrap();
            let chars = characters(&ring, DEFAULT_CHARACTER_EPS).unwrap();
            let basis = ring.basis().to_vec();
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + u64::from(pv));
            for _ in 0..200 {
                let g1 = rng.gen_range(0usize..=2);
                let g2 = rng.gen_range(0usize..=2);
                let min1 = if g1 == 0 { 2 } else { 0 };
                let min2 = if g2 == 0 { 2 } else { 0 };
                let len1 = rng.gen_range(min1..=3);
                let len2 = rng.gen_range(min2..=3);
                let x: Vec<RadiusClass> = (0..len1)
                    .map(|_| basis[rng.gen_range(0..basis.len())].clone())
                    .collect();
                let y: Vec<RadiusClass> = (0..len2)
                    .map(|_| basis[rng.gen_range(0..basis.len())].clone())
                    .collect();
                assert!(
                    verify_factorization_with(&ring, &chars, g1, g2, &x, &y).unwrap(),
                    "p={pv} g1={g1} g2={g2} x={x:?} y={y:?}"
                );
            }
        }
    }

    #[test]
    fn json_round_trips_byte_exact() {
        for pv in [5u32, 7] {
            let p = pr(pv);
            for table in [sl2_table(p), transport_star(&sl2_table(p))] {
                let text = table_to_json(&table);
                let parsed = table_from_json(&text).unwrap();
                assert_eq!(parsed, table);
                assert_eq!(table_to_json(&parsed), text);
            }
        }
        let sample = table_to_json(&sl2_table(pr(5)));
        assert_eq!(
            sample,
            "{\"p\":5,\"n\":2,\"basis\":[\"[0,1]\",\"[0,2]\"],\
             \"three_point\":[[0,0,0,1],[0,1,1,1],[1,1,1,1]]}"
        );
    }

    #[test]
    fn json_parser_rejects_malformed_caches() {
        let good = table_to_json(&sl2_table(pr(5)));
        let cases = [
            ("not json", "invalid JSON"),
            ("{\"p\":4,\"n\":2,\"basis\":[\"[0,1]\"],\"three_point\":[]}", "prime"),
            ("{\"p\":5,\"basis\":[\"[0,1]\"],\"three_point\":[]}", "missing"),
            (
                "{\"p\":5,\"n\":2,\"basis\":[\"[1,2]\"],\"three_point\":[]}",
                "representative",
            ),
            (
                "{\"p\":5,\"n\":2,\"basis\":[\"[0,2]\",\"[0,1]\"],\"three_point\":[]}",
                "ascending",
            ),
            (
                "{\"p\":5,\"n\":2,\"basis\":[\"[0,1]\"],\"three_point\":[[0,0,0,0]]}",
                "zero",
            ),
            (
                "{\"p\":5,\"n\":2,\"basis\":[\"[0,1]\"],\"three_point\":[[0,0,1,1]]}",
                "range",
            ),
            (
                "{\"p\":5,\"n\":2,\"basis\":[\"[0,1]\"],\"three_point\":[],\"extra\":1}",
                "unknown",
            ),
        ];
        for (text, _hint) in cases {
            assert!(table_from_json(text).is_err(), "accepted {text:?}");
        }
        assert!(table_from_json(&good).is_ok());
    }
}
