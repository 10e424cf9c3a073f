//! Rational functions over `F_p` and points of the projective line.

use super::poly::Poly;
use super::FieldError;
use crate::fpcalc::Prime;
use std::fmt;

/// A point of the projective line over `F_p`: an element of `F_p` or the
/// point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointOnLine {
    Finite(u32),
    Infinity,
}

impl fmt::Display for PointOnLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointOnLine::Finite(a) => write!(f, "{a}"),
            PointOnLine::Infinity => write!(f, "inf"),
        }
    }
}

impl PointOnLine {
    pub fn parse(s: &str, p: Prime) -> Result<Self, FieldError> {
        let t = s.trim();
        if t == "inf" || t == "infinity" || t == "oo" {
            return Ok(PointOnLine::Infinity);
        }
        let v: u64 = t
            .parse()
            .map_err(|_| FieldError::Parse(s.into(), "expected a field element or inf".into()))?;
        if v >= p.get() as u64 {
            return Err(FieldError::Parse(
                s.into(),
                format!("point {v} out of range for p={}", p.get()),
            ));
        }
        Ok(PointOnLine::Finite(v as u32))
    }
}

/// A rational function `num/den` over `F_p`, kept reduced: `den` monic and
/// `gcd(num, den) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let mut f = RationalFunction { num, den };
        f.reduce();
        Ok(f)
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one(self.den.prime());
            return;
        }
        let g = self.num.gcd(&self.den);
        if !g.is_one() {
            self.num = self.num.divrem(&g).expect("nonzero gcd").0;
            self.den = self.den.divrem(&g).expect("nonzero gcd").0;
        }
        let lc = self.den.leading();
        if lc != 1 {
            let inv = self.den.prime().inv(lc);
            self.den = self.den.mul_scalar(inv);
            self.num = self.num.mul_scalar(inv);
        }
    }

    pub fn from_poly(num: Poly) -> Self {
        let one = Poly::one(num.prime());
        RationalFunction { num, den: one }
    }

    pub fn zero(p: Prime) -> Self {
        Self::from_poly(Poly::zero(p))
    }

    pub fn one(p: Prime) -> Self {
        Self::from_poly(Poly::one(p))
    }

    pub fn constant(p: Prime, c: u32) -> Self {
        Self::from_poly(Poly::constant(p, c))
    }

    pub fn x(p: Prime) -> Self {
        Self::from_poly(Poly::x(p))
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.num.prime()
    }

    #[inline]
    pub fn num(&self) -> &Poly {
        &self.num
    }

    #[inline]
    pub fn den(&self) -> &Poly {
        &self.den
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// The numerator when the function is a polynomial.
    pub fn as_poly(&self) -> Option<&Poly> {
        self.is_polynomial().then_some(&self.num)
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        let mut f = RationalFunction { num, den };
        f.reduce();
        f
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RationalFunction) -> RationalFunction {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        if self.is_zero() || other.is_zero() {
            return RationalFunction::zero(self.prime());
        }
        let mut f = RationalFunction {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        };
        f.reduce();
        f
    }

    pub fn mul_scalar(&self, c: u32) -> RationalFunction {
        let mut f = RationalFunction {
            num: self.num.mul_scalar(c),
            den: self.den.clone(),
        };
        f.reduce();
        f
    }

    pub fn inv(&self) -> Result<RationalFunction, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let mut f = RationalFunction {
            num: self.den.clone(),
            den: self.num.clone(),
        };
        f.reduce();
        Ok(f)
    }

    pub fn div(&self, other: &RationalFunction) -> Result<RationalFunction, FieldError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Integer power; negative exponents invert (`DivisionByZero` on 0).
    pub fn pow_i64(&self, e: i64) -> Result<RationalFunction, FieldError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut sq = base;
        let mut acc = RationalFunction::one(self.prime());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Logarithmic derivative `f'/f`.
    pub fn dlog(&self) -> Result<RationalFunction, FieldError> {
        self.derivative().div(self)
    }

    /// Formal derivative by the quotient rule.
    pub fn derivative(&self) -> RationalFunction {
        if self.den.is_one() {
            return RationalFunction::from_poly(self.num.derivative());
        }
        let num = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        let den = self.den.mul(&self.den);
        let mut f = RationalFunction { num, den };
        f.reduce();
        f
    }

    pub fn eval(&self, x: u32) -> Result<u32, FieldError> {
        let d = self.den.eval(x);
        if d == 0 {
            return Err(FieldError::PoleAtEvaluation);
        }
        Ok(self.prime().mul(self.num.eval(x), self.prime().inv(d)))
    }

    /// Order of vanishing at a point (negative at a pole).
    /// Panics on the zero function.
    pub fn ord_at(&self, pt: PointOnLine) -> i64 {
        assert!(!self.is_zero(), "order of the zero function");
        match pt {
            PointOnLine::Finite(a) => {
                self.num.root_multiplicity(a) as i64 - self.den.root_multiplicity(a) as i64
            }
            PointOnLine::Infinity => self.den.degree_i64() - self.num.degree_i64(),
        }
    }

    /// Value at a point of the projective line; errors at a pole.
    pub fn value_at(&self, pt: PointOnLine) -> Result<u32, FieldError> {
        match pt {
            PointOnLine::Finite(a) => self.eval(a),
            PointOnLine::Infinity => {
                if self.is_zero() {
                    return Ok(0);
                }
                match self.ord_at(PointOnLine::Infinity) {
                    o if o > 0 => Ok(0),
                    0 => Ok(self.num.leading()),
                    _ => Err(FieldError::PoleAtEvaluation),
                }
            }
        }
    }

    /// Substitute `x -> 1/t` and reduce. An involution up to renaming the
    /// variable.
    pub fn chart_swap(&self) -> RationalFunction {
        if self.is_zero() {
            return self.clone();
        }
        let d = self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0));
        let mut f = RationalFunction {
            num: self.num.reverse_to(d),
            den: self.den.reverse_to(d),
        };
        f.reduce();
        f
    }

    /// Residue at a point of the 1-form `self * dx`. At infinity the form is
    /// rewritten in the chart `t = 1/x` (where `dx = -t^{-2} dt`) first.
    pub fn residue_at(&self, pt: PointOnLine) -> Result<u32, FieldError> {
        match pt {
            PointOnLine::Finite(a) => {
                let shifted = self.mul(&RationalFunction::from_poly(Poly::linear(self.prime(), a)));
                shifted.eval(a).map_err(|_| FieldError::HigherOrderPole)
            }
            PointOnLine::Infinity => {
                // -f(1/t)/t^2 is the dt-coefficient at infinity.
                let t = RationalFunction::x(self.prime());
                let form = self.chart_swap().neg().div(&t.mul(&t)).expect("t^2 != 0");
                form.residue_at(PointOnLine::Finite(0))
            }
        }
    }

    /// Finite poles (with multiplicity) plus infinity when the function
    /// grows there.
    pub fn poles(&self) -> Vec<(PointOnLine, usize)> {
        if self.is_zero() {
            return vec![];
        }
        let mut out: Vec<(PointOnLine, usize)> = self
            .den
            .roots_with_multiplicity()
            .into_iter()
            .map(|(a, m)| (PointOnLine::Finite(a), m))
            .collect();
        let oi = self.ord_at(PointOnLine::Infinity);
        if oi < 0 {
            out.push((PointOnLine::Infinity, (-oi) as usize));
        }
        out
    }

    /// Parse `f`, `f/g`, or `(f)/(g)` where `f`, `g` use polynomial syntax.
    pub fn parse(s: &str, p: Prime) -> Result<Self, FieldError> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut depth = 0i32;
        let mut split = None;
        for (i, c) in compact.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '/' if depth == 0 => {
                    if split.is_some() {
                        return Err(FieldError::Parse(s.into(), "more than one '/'".into()));
                    }
                    split = Some(i);
                }
                _ => {}
            }
            if depth < 0 {
                return Err(FieldError::Parse(s.into(), "unbalanced parentheses".into()));
            }
        }
        if depth != 0 {
            return Err(FieldError::Parse(s.into(), "unbalanced parentheses".into()));
        }
        let strip = |part: &str| -> String {
            let t = part.trim();
            if t.len() >= 2 && t.starts_with('(') && t.ends_with(')') {
                // Only strip when the outer parens match each other.
                let inner = &t[1..t.len() - 1];
                let mut d = 0i32;
                for c in inner.chars() {
                    match c {
                        '(' => d += 1,
                        ')' => d -= 1,
                        _ => {}
                    }
                    if d < 0 {
                        return t.to_string();
                    }
                }
                return inner.to_string();
            }
            t.to_string()
        };
        match split {
            None => Ok(Self::from_poly(Poly::parse(&strip(&compact), p)?)),
            Some(i) => {
                let num = Poly::parse(&strip(&compact[..i]), p)?;
                let den = Poly::parse(&strip(&compact[i + 1..]), p)?;
                Self::new(num, den)
            }
        }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
