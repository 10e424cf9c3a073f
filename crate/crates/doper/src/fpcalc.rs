//! Multisets over `F_p`, their shift classes, and the star duality.
//!
//! A multiset of residues mod `p` models a tuple of local exponents up to
//! reordering; a [`RadiusClass`] is such a multiset up to a simultaneous
//! shift by a constant. The involution [`ExponentSubset::star`] (negated
//! complement) descends to classes with distinct entries and exchanges
//! cardinalities `n` and `p - n`.
//!
//! The [`bits`] submodule holds a bitmask kernel for exhaustive scans over
//! all subsets of `F_p`; the struct-based API here stays allocation-friendly
//! and is cross-checked against it in the test suite.

use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Errors from multiset and radius-class operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FpError {
    #[error("{0} is not an odd prime in 3..=65521")]
    NotPrime(u64),
    #[error("entry {0} is not a residue mod {1}")]
    EntryOutOfRange(u32, u32),
    #[error("operation requires pairwise distinct entries")]
    RepeatedEntries,
    #[error("radius class representative has repeated entries")]
    NotDistinctClass,
    #[error("cardinality {0} is not invertible mod {1}")]
    NonInvertibleCardinality(u32, u32),
    #[error("cannot parse multiset encoding {0:?}: {1}")]
    Parse(String, String),
    #[error("prime {0} does not match expected prime {1}")]
    PrimeMismatch(u32, u32),
}

/// A validated odd prime `3 <= p <= 65521`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u32) -> Result<Self, FpError> {
        if p < 3 || p > 65521 || p % 2 == 0 || !is_prime(p) {
            return Err(FpError::NotPrime(p as u64));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Reduce a signed integer into `[0, p)`.
    #[inline]
    pub fn reduce_i64(self, v: i64) -> u32 {
        let p = self.0 as i64;
        (((v % p) + p) % p) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    /// Multiplicative inverse of `a != 0` by Fermat exponentiation.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a % self.0 != 0);
        self.pow(a, self.0 - 2)
    }

    pub fn pow(self, mut base: u32, mut e: u32) -> u32 {
        let mut acc = 1u32;
        base %= self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The odd primes up to `limit`, smallest first.
    pub fn all_up_to(limit: u32) -> Vec<Prime> {
        (3..=limit).filter_map(|p| Prime::new(p).ok()).collect()
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A multiset of residues mod `p`, stored as a non-decreasing sequence.
///
/// The empty multiset is permitted: it arises as the complement of the full
/// subset and keeps the star involution total on subsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentMultiset {
    p: Prime,
    entries: Vec<u32>,
}

impl ExponentMultiset {
    pub fn new(p: Prime, mut entries: Vec<u32>) -> Result<Self, FpError> {
        for &e in &entries {
            if e >= p.get() {
                return Err(FpError::EntryOutOfRange(e, p.get()));
            }
        }
        entries.sort_unstable();
        Ok(ExponentMultiset { p, entries })
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.entries.len()
    }

    pub fn is_distinct(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] != w[1])
    }

    pub fn sum(&self) -> u32 {
        self.entries
            .iter()
            .fold(0u32, |acc, &e| self.p.add(acc, e))
    }

    /// Entrywise shift by `a` mod `p`, re-sorted.
    pub fn shift(&self, a: u32) -> ExponentMultiset {
        let a = a % self.p.get();
        let mut entries: Vec<u32> = self.entries.iter().map(|&e| self.p.add(e, a)).collect();
        entries.sort_unstable();
        ExponentMultiset { p: self.p, entries }
    }

    /// Entrywise negation mod `p`, re-sorted.
    pub fn negate(&self) -> ExponentMultiset {
        let mut entries: Vec<u32> = self.entries.iter().map(|&e| self.p.neg(e)).collect();
        entries.sort_unstable();
        ExponentMultiset { p: self.p, entries }
    }

    pub fn to_subset(&self) -> Result<ExponentSubset, FpError> {
        if !self.is_distinct() {
            return Err(FpError::RepeatedEntries);
        }
        Ok(ExponentSubset(self.clone()))
    }

    /// The class of this multiset under diagonal shifts.
    pub fn canonicalize(&self) -> RadiusClass {
        RadiusClass {
            rep: ExponentMultiset {
                p: self.p,
                entries: canonical_entries(self.p, &self.entries),
            },
        }
    }

    /// Parse either `p=5:[0,1]` or, when `expect` is given, a bare `[0,1]`.
    pub fn parse_with_prime(s: &str, expect: Option<Prime>) -> Result<Self, FpError> {
        let s = s.trim();
        let (p, body) = if let Some(rest) = s.strip_prefix("p=") {
            let (num, body) = rest
                .split_once(':')
                .ok_or_else(|| FpError::Parse(s.into(), "missing ':' after p=<prime>".into()))?;
            let p: u32 = num
                .trim()
                .parse()
                .map_err(|_| FpError::Parse(s.into(), "bad prime".into()))?;
            let p = Prime::new(p)?;
            if let Some(exp) = expect {
                if exp != p {
                    return Err(FpError::PrimeMismatch(p.get(), exp.get()));
                }
            }
            (p, body.trim())
        } else {
            let p = expect
                .ok_or_else(|| FpError::Parse(s.into(), "no p=<prime> prefix and no context prime".into()))?;
            (p, s)
        };
        let inner = body
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| FpError::Parse(s.into(), "expected [..] entry list".into()))?;
        let mut entries = Vec::new();
        for tok in inner.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            let v: u32 = tok
                .parse()
                .map_err(|_| FpError::Parse(s.into(), format!("bad entry {tok:?}")))?;
            entries.push(v);
        }
        ExponentMultiset::new(p, entries)
    }
}

impl fmt::Display for ExponentMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}:[", self.p.get())?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for ExponentMultiset {
    type Err = FpError;
    fn from_str(s: &str) -> Result<Self, FpError> {
        ExponentMultiset::parse_with_prime(s, None)
    }
}

/// A multiset with pairwise distinct entries: a subset of `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentSubset(ExponentMultiset);

impl ExponentSubset {
    pub fn new(p: Prime, entries: Vec<u32>) -> Result<Self, FpError> {
        ExponentMultiset::new(p, entries)?.to_subset()
    }

    #[inline]
    pub fn as_multiset(&self) -> &ExponentMultiset {
        &self.0
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.0.p
    }

    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.0.entries
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.0.entries.len()
    }

    pub fn shift(&self, a: u32) -> ExponentSubset {
        ExponentSubset(self.0.shift(a))
    }

    pub fn negate(&self) -> ExponentSubset {
        ExponentSubset(self.0.negate())
    }

    /// The set complement in `F_p`; cardinality `p - n`.
    pub fn complement(&self) -> ExponentSubset {
        let p = self.0.p;
        let mut present = vec![false; p.get() as usize];
        for &e in &self.0.entries {
            present[e as usize] = true;
        }
        let entries: Vec<u32> = (0..p.get()).filter(|&e| !present[e as usize]).collect();
        ExponentSubset(ExponentMultiset { p, entries })
    }

    /// The negated complement; the basic duality on subsets of `F_p`.
    pub fn star(&self) -> ExponentSubset {
        self.complement().negate()
    }

    pub fn canonicalize(&self) -> RadiusClass {
        self.0.canonicalize()
    }
}

impl fmt::Display for ExponentSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Lexicographically smallest sorted shift-translate of `entries`.
///
/// The minimum always starts with 0 (shift the smallest entry down), so only
/// shifts that move some entry to 0 compete; each candidate is a rotation of
/// the sorted sequence and is compared entrywise with early exit.
fn canonical_entries(p: Prime, entries: &[u32]) -> Vec<u32> {
    let n = entries.len();
    if n == 0 {
        return Vec::new();
    }
    let pv = p.get();
    // Candidate shift rotations: for each index k with a distinct entry value,
    // the translate by -entries[k] is the sorted sequence rotated left by k.
    let value_at = |k: usize, i: usize| -> u32 {
        let j = (k + i) % n;
        let v = entries[j] + pv - entries[k];
        if v >= pv {
            v - pv
        } else {
            v
        }
    };
    let mut best_k = 0usize;
    for k in 1..n {
        if entries[k] == entries[k - 1] {
            continue;
        }
        // Compare candidate k against current best lexicographically.
        for i in 0..n {
            let a = value_at(k, i);
            let b = value_at(best_k, i);
            if a != b {
                if a < b {
                    best_k = k;
                }
                break;
            }
        }
    }
    (0..n).map(|i| value_at(best_k, i)).collect()
}

/// A multiset up to diagonal shift, stored by its canonical representative.
///
/// The representative is the lexicographically smallest sorted shift
/// translate; classes compare and hash through it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RadiusClass {
    rep: ExponentMultiset,
}

impl RadiusClass {
    pub fn from_entries(p: Prime, entries: Vec<u32>) -> Result<Self, FpError> {
        Ok(ExponentMultiset::new(p, entries)?.canonicalize())
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.rep.p
    }

    #[inline]
    pub fn rep(&self) -> &ExponentMultiset {
        &self.rep
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.rep.cardinality()
    }

    /// Whether the class lies in the distinct-entry locus.
    pub fn is_distinct(&self) -> bool {
        self.rep.is_distinct()
    }

    /// The unique shift-translate of the representative whose entry sum is
    /// `a` mod `p`. Requires the cardinality to be invertible mod `p`.
    pub fn lift(&self, a: u32) -> Result<ExponentMultiset, FpError> {
        let p = self.rep.p;
        let n = self.rep.cardinality() as u32;
        if n == 0 || n % p.get() == 0 {
            return Err(FpError::NonInvertibleCardinality(n, p.get()));
        }
        let delta = p.mul(p.sub(a % p.get(), self.rep.sum()), p.inv(n % p.get()));
        Ok(self.rep.shift(delta))
    }

    /// Star on classes with distinct entries: lift, star, re-canonicalize.
    /// Independent of the chosen lift since star intertwines shifts.
    pub fn star(&self) -> Result<RadiusClass, FpError> {
        if !self.is_distinct() {
            return Err(FpError::NotDistinctClass);
        }
        let lifted = self.lift(0)?.to_subset()?;
        Ok(lifted.star().canonicalize())
    }
}

impl fmt::Display for RadiusClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.rep.fmt(f)
    }
}

/// All shift classes of cardinality `n`, each once, sorted by representative.
/// With `distinct_only` the enumeration is restricted to classes whose
/// representative has pairwise distinct entries.
pub fn enumerate_radii(p: Prime, n: usize, distinct_only: bool) -> Vec<RadiusClass> {
    assert!(n >= 1 && n <= p.get() as usize, "cardinality out of range");
    let mut out = Vec::new();
    // Canonical representatives start with 0; walk non-decreasing (or
    // strictly increasing) sequences with leading 0 and keep the ones equal
    // to their own canonical form.
    let mut entries = vec![0u32; n];
    enumerate_rec(p, n, distinct_only, 1, &mut entries, &mut out);
    out
}

fn enumerate_rec(
    p: Prime,
    n: usize,
    distinct_only: bool,
    idx: usize,
    entries: &mut Vec<u32>,
    out: &mut Vec<RadiusClass>,
) {
    if idx == n {
        if canonical_entries(p, entries) == *entries {
            out.push(RadiusClass {
                rep: ExponentMultiset {
                    p,
                    entries: entries.clone(),
                },
            });
        }
        return;
    }
    let lo = if distinct_only {
        entries[idx - 1] + 1
    } else {
        entries[idx - 1]
    };
    for v in lo..p.get() {
        entries[idx] = v;
        enumerate_rec(p, n, distinct_only, idx + 1, entries, out);
    }
    entries.truncate(n);
}

/// The index set `{0, ..., (p-3)/2}` together with its two standard
/// embeddings into radius classes: `iota` lands in cardinality `p - 2`
/// (complement-of-pair classes) and `w` in cardinality `2`; they correspond
/// under the star involution.
pub struct FSetEmbeddings {
    pub f_set: Vec<u32>,
    pub iota: Vec<RadiusClass>,
    pub w: Vec<RadiusClass>,
}

pub fn f_set_embeddings(p: Prime) -> FSetEmbeddings {
    assert!(p.get() >= 5, "requires p >= 5");
    let f_set: Vec<u32> = (0..=(p.get() - 3) / 2).collect();
    let mut iota = Vec::with_capacity(f_set.len());
    let mut w = Vec::with_capacity(f_set.len());
    for &a in &f_set {
        let minus_2a_minus_1 = p.neg(p.add(p.mul(2, a), 1));
        let pair = ExponentSubset::new(p, vec![0, minus_2a_minus_1]).expect("0 != -2a-1 for a in F");
        iota.push(pair.complement().canonicalize());
        let two_a_plus_1 = p.add(p.mul(2, a), 1);
        w.push(
            ExponentSubset::new(p, vec![0, two_a_plus_1])
                .expect("0 != 2a+1 for a in F")
                .canonicalize(),
        );
    }
    FSetEmbeddings { f_set, iota, w }
}

/// Bitmask kernel for exhaustive subset scans.
///
/// A subset of `F_p` (p <= 63) is a `u64` with bit `i` set iff `i` is a
/// member. These functions mirror the struct-based operations above and are
/// cross-validated against them in the tests; they exist so that whole-space
/// scans (all `2^p` subsets) stay cheap.
pub mod bits {
    /// Mask with the low `p` bits set: the full subset.
    #[inline]
    pub fn full(p: u32) -> u64 {
        if p == 64 {
            u64::MAX
        } else {
            (1u64 << p) - 1
        }
    }

    /// Shift the subset by `a`: member `i` becomes `i + a` mod `p`.
    #[inline]
    pub fn shift(mask: u64, a: u32, p: u32) -> u64 {
        if a == 0 {
            return mask;
        }
        ((mask << a) | (mask >> (p - a))) & full(p)
    }

    /// Complement within `F_p`.
    #[inline]
    pub fn complement(mask: u64, p: u32) -> u64 {
        !mask & full(p)
    }

    /// Negate members: `i` becomes `p - i` mod `p`. Bit 0 is fixed and the
    /// field of bits `1..p` is reversed.
    #[inline]
    pub fn negate(mask: u64, p: u32) -> u64 {
        let rev = (mask >> 1).reverse_bits() >> (64 - (p - 1));
        (mask & 1) | (rev << 1)
    }

    /// Negated complement.
    #[inline]
    pub fn star(mask: u64, p: u32) -> u64 {
        negate(complement(mask, p), p)
    }

    /// Sorted member list of the subset.
    pub fn to_entries(mask: u64) -> Vec<u32> {
        let mut v = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            v.push(m.trailing_zeros());
            m &= m - 1;
        }
        v
    }

    /// Build a mask from entries.
    pub fn from_entries(entries: &[u32]) -> u64 {
        entries.iter().fold(0u64, |m, &e| m | (1u64 << e))
    }

    /// Whether `mask` (which must contain 0) is the canonical representative
    /// of its shift class, i.e. its sorted tuple is the lexicographic
    /// minimum among all shift translates.
    pub fn is_canonical_rep(mask: u64, p: u32) -> bool {
        if mask & 1 == 0 {
            return false;
        }
        let n = mask.count_ones() as usize;
        if n == 0 {
            return true;
        }
        let entries = to_entries(mask);
        let value_at = |k: usize, i: usize| -> u32 {
            let j = (k + i) % n;
            let v = entries[j] + p - entries[k];
            if v >= p {
                v - p
            } else {
                v
            }
        };
        for k in 1..n {
            for i in 0..n {
                let a = value_at(k, i);
                let b = value_at(0, i);
                if a != b {
                    if a < b {
                        return false;
                    }
                    break;
                }
            }
        }
        true
    }

    /// Canonical representative mask of the shift class of `mask`.
    pub fn canonical_rep(mask: u64, p: u32) -> u64 {
        if mask == 0 {
            return 0;
        }
        let entries = to_entries(mask);
        let n = entries.len();
        let value_at = |k: usize, i: usize| -> u32 {
            let j = (k + i) % n;
            let v = entries[j] + p - entries[k];
            if v >= p {
                v - p
            } else {
                v
            }
        };
        let mut best_k = 0usize;
        for k in 1..n {
            for i in 0..n {
                let a = value_at(k, i);
                let b = value_at(best_k, i);
                if a != b {
                    if a < b {
                        best_k = k;
                    }
                    break;
                }
            }
        }
        (0..n).fold(0u64, |m, i| m | (1u64 << value_at(best_k, i)))
    }
}
