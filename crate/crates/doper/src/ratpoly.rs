//! Dense univariate polynomials over the rationals: ascending coefficient
//! vectors with no trailing zeros.  Crate-internal helper shared by the
//! character routines and the cyclotomic field inverse.

use num_rational::BigRational;
use num_traits::Zero;

pub(crate) fn trim(mut f: Vec<BigRational>) -> Vec<BigRational> {
    while f.last().is_some_and(Zero::is_zero) {
        f.pop();
    }
    f
}

pub(crate) fn eval(f: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in f.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub(crate) fn derivative(f: &[BigRational]) -> Vec<BigRational> {
    if f.len() <= 1 {
        return Vec::new();
    }
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigRational::from_integer(k.into()))
        .collect()
}

pub(crate) fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let term = ai * bj;
            out[i + j] += term;
        }
    }
    trim(out)
}

pub(crate) fn sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = a.to_vec();
    if out.len() < b.len() {
        out.resize(b.len(), BigRational::zero());
    }
    for (o, bj) in out.iter_mut().zip(b) {
        *o -= bj;
    }
    trim(out)
}

/// Quotient and remainder by a nonzero trimmed divisor.
pub(crate) fn divrem(
    num: &[BigRational],
    den: &[BigRational],
) -> (Vec<BigRational>, Vec<BigRational>) {
    assert!(!den.is_empty(), "division by the zero polynomial");
    let dd = den.len() - 1;
    let lead = &den[dd];
    let mut r = trim(num.to_vec());
    if r.len() <= dd {
        return (Vec::new(), r);
    }
    let mut q = vec![BigRational::zero(); r.len() - dd];
    while r.len() > dd {
        let k = r.len() - 1;
        let c = &r[k] / lead;
        if !c.is_zero() {
            for t in 0..dd {
                let idx = k - dd + t;
                let s = &c * &den[t];
                r[idx] -= s;
            }
        }
        q[k - dd] = c;
        r.pop();
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    (trim(q), r)
}

pub(crate) fn rem(num: &[BigRational], den: &[BigRational]) -> Vec<BigRational> {
    divrem(num, den).1
}

/// Monic greatest common divisor; empty for two zero polynomials.
pub(crate) fn gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    if let Some(lead) = x.last().cloned() {
        for c in &mut x {
            *c /= lead.clone();
        }
    }
    x
}
