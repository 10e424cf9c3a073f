//! Dense polynomials over `F_p`.

use super::FieldError;
use crate::fpcalc::Prime;
use std::fmt;

/// A polynomial over `F_p`, dense coefficients with trailing zeros trimmed.
/// `coeffs[i]` is the coefficient of `x^i`; the zero polynomial has an empty
/// coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    p: Prime,
    coeffs: Vec<u32>,
}

impl Poly {
    pub fn new(p: Prime, mut coeffs: Vec<u32>) -> Self {
        for c in &mut coeffs {
            *c %= p.get();
        }
        let mut poly = Poly { p, coeffs };
        poly.trim();
        poly
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn zero(p: Prime) -> Self {
        Poly { p, coeffs: vec![] }
    }

    pub fn one(p: Prime) -> Self {
        Poly::constant(p, 1)
    }

    pub fn constant(p: Prime, c: u32) -> Self {
        Poly::new(p, vec![c])
    }

    pub fn x(p: Prime) -> Self {
        Poly::new(p, vec![0, 1])
    }

    /// `c * x^k`.
    pub fn monomial(p: Prime, c: u32, k: usize) -> Self {
        let mut coeffs = vec![0u32; k + 1];
        coeffs[k] = c;
        Poly::new(p, coeffs)
    }

    /// `x - lambda`.
    pub fn linear(p: Prime, lambda: u32) -> Self {
        Poly::new(p, vec![p.neg(lambda), 1])
    }

    /// Product of `x - lambda` over the given roots.
    pub fn from_roots(p: Prime, roots: &[u32]) -> Self {
        roots
            .iter()
            .fold(Poly::one(p), |acc, &r| acc.mul(&Poly::linear(p, r)))
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree as i64 with `deg 0 = -1`, convenient for valuation arithmetic.
    pub fn degree_i64(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn leading(&self) -> u32 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn coeff(&self, k: usize) -> u32 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| p.add(self.coeff(i), other.coeff(i)))
            .collect();
        Poly::new(p, coeffs)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            p: self.p,
            coeffs: self.coeffs.iter().map(|&c| self.p.neg(c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.p);
        }
        let p = self.p.get() as u64;
        let mut acc = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                let cell = &mut acc[i + j];
                *cell = (*cell + a as u64 * b as u64) % p;
            }
        }
        Poly::new(self.p, acc.into_iter().map(|c| c as u32).collect())
    }

    pub fn mul_scalar(&self, c: u32) -> Poly {
        Poly::new(
            self.p,
            self.coeffs.iter().map(|&a| self.p.mul(a, c)).collect(),
        )
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, x: u32) -> u32 {
        let p = self.p;
        self.coeffs
            .iter()
            .rev()
            .fold(0u32, |acc, &c| p.add(p.mul(acc, x), c))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero(self.p);
        }
        let p = self.p;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| p.mul((i as u64 % p.get() as u64) as u32, c))
            .collect();
        Poly::new(p, coeffs)
    }

    /// Euclidean division: `self = q * div + r` with `deg r < deg div`.
    pub fn divrem(&self, div: &Poly) -> Result<(Poly, Poly), FieldError> {
        if div.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let p = self.p;
        let dd = div.coeffs.len() - 1;
        let lead_inv = p.inv(div.leading());
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(p), self.clone()));
        }
        let mut quo = vec![0u32; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if c == 0 {
                continue;
            }
            let q = p.mul(c, lead_inv);
            quo[i - dd] = q;
            for (j, &dcoef) in div.coeffs.iter().enumerate() {
                rem[i - dd + j] = p.sub(rem[i - dd + j], p.mul(q, dcoef));
            }
        }
        Ok((Poly::new(p, quo), Poly::new(p, rem)))
    }

    /// Monic greatest common divisor; `gcd(0,0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Scale to leading coefficient 1 (zero stays zero).
    pub fn monic(&self) -> Poly {
        if self.is_zero() || self.leading() == 1 {
            return self.clone();
        }
        self.mul_scalar(self.p.inv(self.leading()))
    }

    /// Multiplicity of `lambda` as a root (0 when not a root).
    pub fn root_multiplicity(&self, lambda: u32) -> usize {
        if self.is_zero() {
            panic!("root multiplicity of the zero polynomial");
        }
        let lin = Poly::linear(self.p, lambda);
        let mut f = self.clone();
        let mut m = 0usize;
        loop {
            let (q, r) = f.divrem(&lin).unwrap();
            if !r.is_zero() {
                return m;
            }
            m += 1;
            f = q;
        }
    }

    /// `x^d * self(1/x)` with `d = deg self`: the coefficient-reversed
    /// polynomial, extended to a chosen degree bound `d >= deg self`.
    pub fn reverse_to(&self, d: usize) -> Poly {
        let mut coeffs = vec![0u32; d + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[d - i] = c;
        }
        Poly::new(self.p, coeffs)
    }

    /// All roots in `F_p`, with multiplicity, by exhaustive scan.
    pub fn roots_with_multiplicity(&self) -> Vec<(u32, usize)> {
        let mut out = Vec::new();
        if self.is_zero() {
            panic!("roots of the zero polynomial");
        }
        for lambda in 0..self.p.get() {
            if self.eval(lambda) == 0 {
                out.push((lambda, self.root_multiplicity(lambda)));
            }
        }
        out
    }

    /// Parse `x^2+3x+1` style syntax (an optional `*` and spaces allowed).
    pub fn parse(s: &str, p: Prime) -> Result<Poly, FieldError> {
        let src = s.trim();
        let compact: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(FieldError::Parse(s.into(), "empty polynomial".into()));
        }
        let mut acc = Poly::zero(p);
        let bytes = compact.as_bytes();
        let mut i = 0usize;
        let mut sign_neg = false;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            sign_neg = bytes[i] == b'-';
            i += 1;
        }
        loop {
            // One term: [digits] [*] [x [^digits]]
            let start = i;
            let mut coeff: Option<u64> = None;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                let d = (bytes[i] - b'0') as u64;
                coeff = Some(coeff.unwrap_or(0) * 10 + d);
                i += 1;
                if coeff.unwrap() > u32::MAX as u64 {
                    return Err(FieldError::Parse(s.into(), "coefficient overflow".into()));
                }
            }
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
            }
            let mut expo = 0usize;
            let mut saw_x = false;
            if i < bytes.len() && bytes[i] == b'x' {
                saw_x = true;
                expo = 1;
                i += 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let estart = i;
                    let mut e = 0usize;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        e = e * 10 + (bytes[i] - b'0') as usize;
                        i += 1;
                        if e > 100_000 {
                            return Err(FieldError::Parse(s.into(), "exponent overflow".into()));
                        }
                    }
                    if i == estart {
                        return Err(FieldError::Parse(s.into(), "missing exponent".into()));
                    }
                    expo = e;
                }
            }
            if i == start || (coeff.is_none() && !saw_x) {
                return Err(FieldError::Parse(s.into(), "expected a term".into()));
            }
            let mut c = (coeff.unwrap_or(1) % p.get() as u64) as u32;
            if sign_neg {
                c = p.neg(c);
            }
            acc = acc.add(&Poly::monomial(p, c, expo));
            if i == bytes.len() {
                break;
            }
            match bytes[i] {
                b'+' => sign_neg = false,
                b'-' => sign_neg = true,
                _ => {
                    return Err(FieldError::Parse(
                        s.into(),
                        format!("unexpected character {:?}", bytes[i] as char),
                    ))
                }
            }
            i += 1;
        }
        Ok(acc)
    }

    /// Render with an explicit modulus, e.g. `x^2+3x+1 (mod 5)`.
    pub fn display_mod(&self) -> String {
        format!("{} (mod {})", self, self.p.get())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{c}x")?,
                (_, 1) => write!(f, "x^{i}")?,
                _ => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}
