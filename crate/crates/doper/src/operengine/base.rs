//! The marked projective line, its log tangent field, and line bundle data.

use super::OperError;
use crate::fpcalc::Prime;
use crate::funcfield::{Poly, PointOnLine, RationalFunction};
use std::collections::BTreeMap;
use std::fmt;

/// The projective line over `F_p` with `r >= 3` distinct marked points, one
/// of which must be the point at infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedLine {
    p: Prime,
    /// Sorted, deduplicated; always contains `Infinity`.
    marked: Vec<PointOnLine>,
}

impl MarkedLine {
    /// Builds a marked line, validating the marking.
    pub fn new(p: Prime, points: &[PointOnLine]) -> Result<Self, OperError> {
        let mut marked: Vec<PointOnLine> = points.to_vec();
        marked.sort();
        let before = marked.len();
        marked.dedup();
        if marked.len() != before {
            return Err(OperError::InvalidBase("marked points must be distinct".into()));
        }
        if marked.len() < 3 {
            return Err(OperError::InvalidBase(format!(
                "need at least 3 marked points, got {}",
                marked.len()
            )));
        }
        if !marked.contains(&PointOnLine::Infinity) {
            return Err(OperError::InvalidBase(
                "the point at infinity must be marked".into(),
            ));
        }
        for pt in &marked {
            if let PointOnLine::Finite(a) = pt {
                if *a >= p.get() {
                    return Err(OperError::InvalidBase(format!(
                        "finite marked point {a} is not reduced mod {}",
                        p.get()
                    )));
                }
            }
        }
        Ok(Self { p, marked })
    }

    /// The standard three-pointed line `{0, 1, inf}`.
    pub fn standard(p: Prime) -> Self {
        Self::new(
            p,
            &[
                PointOnLine::Finite(0),
                PointOnLine::Finite(1),
                PointOnLine::Infinity,
            ],
        )
        .expect("0,1,inf is a valid marking for every p >= 3")
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// All marked points in sorted order (finite points first, then infinity).
    pub fn marked(&self) -> &[PointOnLine] {
        &self.marked
    }

    /// Number of marked points `r`.
    pub fn r(&self) -> usize {
        self.marked.len()
    }

    /// The finite marked points.
    pub fn finite_marked(&self) -> Vec<u32> {
        self.marked
            .iter()
            .filter_map(|pt| match pt {
                PointOnLine::Finite(a) => Some(*a),
                PointOnLine::Infinity => None,
            })
            .collect()
    }

    /// The squarefree polynomial `h` vanishing exactly at the finite marked
    /// points.
    pub fn h(&self) -> Poly {
        Poly::from_roots(self.p, &self.finite_marked())
    }

    /// The canonical log vector field `h * d/dx`.
    pub fn vector_field(&self) -> LogVectorField {
        LogVectorField { base: self.clone() }
    }
}

impl fmt::Display for MarkedLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.marked.iter().map(|pt| pt.to_string()).collect();
        write!(f, "P^1/F_{} marked at {{{}}}", self.p.get(), pts.join(", "))
    }
}

/// The global log vector field `h * d/dx` on a marked line, where `h`
/// vanishes simply at the finite marked points.
///
/// It generates the log tangent sheaf: at each finite marked point it
/// vanishes to order one, and in the chart at infinity it equals
/// `-t * (t^(r-2) h(1/t)) d/dt`, vanishing to order one at `t = 0` as well.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogVectorField {
    base: MarkedLine,
}

impl LogVectorField {
    pub fn base(&self) -> &MarkedLine {
        &self.base
    }

    /// The coefficient polynomial `h`.
    pub fn h(&self) -> Poly {
        self.base.h()
    }

    /// Applies the field to a rational function: `f -> h * f'`.
    pub fn apply(&self, f: &RationalFunction) -> RationalFunction {
        f.derivative()
            .mul(&RationalFunction::from_poly(self.h()))
    }

    /// The scalar `g` with `D^p = g * D` in the associative algebra of
    /// differential operators, for `D = h * d/dx`.
    pub fn symbolic_power(&self) -> Poly {
        symbolic_power_of(self.base.p, &self.h())
    }
}

/// The p-th symbolic power scalar of `D = h * d/dx`: the polynomial `g`
/// with `D^p = g * D`.
///
/// `D^p` is a derivation in characteristic p, so it is `u * d/dx` with
/// `u = D^(p-1)(h) = D^p(x)`; since `D` preserves every ideal `(x - a)`
/// with `h(a) = 0` and `h` is squarefree, `h` divides `u` exactly.
pub fn symbolic_power_of(p: Prime, h: &Poly) -> Poly {
    assert_eq!(h.prime(), p, "prime mismatch");
    let mut u = Poly::x(p);
    for _ in 0..p.get() {
        u = h.mul(&u.derivative());
    }
    let (g, rem) = u.divrem(h).expect("h divides its own p-th power image");
    assert!(rem.is_zero(), "h must divide D^p(x) for squarefree h");
    g
}

/// A line bundle on a marked line, presented by a divisor supported on the
/// marked points together with a formal tangent-power twist.
///
/// The underlying sheaf is `O(divisor)`; `t_twist` records that the bundle
/// is regarded as `T^t(-t(r-2)[inf])`-normalized, i.e. the divisor already
/// contains the `-t(r-2)[inf]` part and reported degrees add back
/// `t * r` per tangent factor so that the log tangent bundle reports
/// degree 2 regardless of `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineBundleDatum {
    base: MarkedLine,
    divisor: BTreeMap<PointOnLine, i64>,
    t_twist: i64,
}

impl LineBundleDatum {
    /// The trivial bundle `O`.
    pub fn trivial(base: MarkedLine) -> Self {
        Self {
            base,
            divisor: BTreeMap::new(),
            t_twist: 0,
        }
    }

    /// Builds a bundle from an explicit divisor and tangent-twist count.
    pub fn new(
        base: MarkedLine,
        divisor: BTreeMap<PointOnLine, i64>,
        t_twist: i64,
    ) -> Result<Self, OperError> {
        for pt in divisor.keys() {
            if !base.marked().contains(pt) {
                return Err(OperError::InvalidBase(format!(
                    "divisor point {pt} is not marked"
                )));
            }
        }
        let divisor = divisor.into_iter().filter(|(_, m)| *m != 0).collect();
        Ok(Self {
            base,
            divisor,
            t_twist,
        })
    }

    /// The t-th power of the log tangent bundle, `T^t` with
    /// `T = O(-(r-2)[inf])` trivialized by the log field `h d/dx`.
    pub fn tangent_power(base: MarkedLine, t: i64) -> Self {
        let r = base.r() as i64;
        let mut divisor = BTreeMap::new();
        let m = -t * (r - 2);
        if m != 0 {
            divisor.insert(PointOnLine::Infinity, m);
        }
        Self {
            base,
            divisor,
            t_twist: t,
        }
    }

    pub fn base(&self) -> &MarkedLine {
        &self.base
    }

    pub fn divisor(&self) -> &BTreeMap<PointOnLine, i64> {
        &self.divisor
    }

    pub fn t_twist(&self) -> i64 {
        self.t_twist
    }

    /// Multiplicity of the divisor at a point.
    pub fn multiplicity(&self, pt: PointOnLine) -> i64 {
        self.divisor.get(&pt).copied().unwrap_or(0)
    }

    /// Tensor product of bundles: divisors and twists add.
    pub fn tensor(&self, other: &Self) -> Self {
        assert_eq!(self.base, other.base, "base mismatch");
        let mut divisor = self.divisor.clone();
        for (pt, m) in &other.divisor {
            let e = divisor.entry(*pt).or_insert(0);
            *e += m;
            if *e == 0 {
                divisor.remove(pt);
            }
        }
        Self {
            base: self.base.clone(),
            divisor,
            t_twist: self.t_twist + other.t_twist,
        }
    }

    /// The dual bundle: divisor and twist negate.
    pub fn dual(&self) -> Self {
        Self {
            base: self.base.clone(),
            divisor: self.divisor.iter().map(|(pt, m)| (*pt, -m)).collect(),
            t_twist: -self.t_twist,
        }
    }

    /// Tensors with `O(m[pt])`.
    pub fn twisted(&self, pt: PointOnLine, m: i64) -> Self {
        let mut divisor = self.divisor.clone();
        let e = divisor.entry(pt).or_insert(0);
        *e += m;
        if *e == 0 {
            divisor.remove(&pt);
        }
        Self {
            base: self.base.clone(),
            divisor,
            t_twist: self.t_twist,
        }
    }

    /// The n-th tensor power (n may be negative).
    pub fn power(&self, n: i64) -> Self {
        Self {
            base: self.base.clone(),
            divisor: self
                .divisor
                .iter()
                .filter_map(|(pt, m)| {
                    let v = m * n;
                    (v != 0).then_some((*pt, v))
                })
                .collect(),
            t_twist: self.t_twist * n,
        }
    }

    /// Degree of the underlying sheaf `O(divisor)`.
    pub fn degree_honest(&self) -> i64 {
        self.divisor.values().sum()
    }

    /// Reported degree: each tangent-twist factor contributes `r`, so the
    /// log tangent bundle always reports degree 2.
    pub fn degree_reported(&self) -> i64 {
        self.degree_honest() + self.t_twist * (self.base.r() as i64)
    }

    /// The rational function trivializing the bundle on the affine chart:
    /// a section generating `O(divisor)` over `A^1` is
    /// `prod_(P finite) (x - P)^(-m_P)`.
    pub fn affine_frame(&self) -> RationalFunction {
        let p = self.base.prime();
        let mut f = RationalFunction::one(p);
        for (pt, m) in &self.divisor {
            if let PointOnLine::Finite(a) = pt {
                let lin = RationalFunction::from_poly(Poly::linear(p, *a));
                f = f.mul(&lin.pow_i64(-m).expect("x - a is nonzero"));
            }
        }
        f
    }

    /// The transition ratio `s_aff / s_inf` between the affine generator and
    /// the generator at infinity, as a rational function of `x`. It equals
    /// `x^(m_inf) * prod_(P finite) (x - P)^(m_P)` up to the sign-free
    /// monic normalization used throughout.
    pub fn inf_ratio(&self) -> RationalFunction {
        let p = self.base.prime();
        let mut f = RationalFunction::x(p)
            .pow_i64(self.multiplicity(PointOnLine::Infinity))
            .expect("x is nonzero");
        for (pt, m) in &self.divisor {
            if let PointOnLine::Finite(a) = pt {
                let lin = RationalFunction::from_poly(Poly::linear(p, *a));
                f = f.mul(&lin.pow_i64(*m).expect("x - a is nonzero"));
            }
        }
        f
    }

    /// Converts a connection form expressed in a rational trivialization of
    /// the bundle into the form in the affine-lattice frame: gauging by
    /// `affine_frame` adds its dlog.
    pub fn lattice_form(&self, form_rat: &RationalFunction) -> RationalFunction {
        form_rat.add(&self.affine_frame().dlog().expect("frame is nonzero"))
    }
}

impl fmt::Display for LineBundleDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.t_twist != 0 {
            parts.push(format!("T^{}", self.t_twist));
        }
        let div: Vec<String> = self
            .divisor
            .iter()
            .map(|(pt, m)| format!("{m}[{pt}]"))
            .collect();
        if !div.is_empty() {
            parts.push(format!("O({})", div.join(" + ")));
        }
        if parts.is_empty() {
            parts.push("O".into());
        }
        write!(f, "{}", parts.join(" (x) "))
    }
}
