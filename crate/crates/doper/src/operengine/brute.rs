//! Independent rank-2 oracle on the three-pointed line: second-order
//! operators in hypergeometric normal form, scanned directly for vanishing
//! p-curvature without going through the oper constructions.

use super::base::{LineBundleDatum, MarkedLine};
use super::connection::LogConnection;
use super::detdata::DeterminantData;
use super::oper::{oper_check, OperData};
use super::ore::p_curvature_raw;
use super::OperError;
use crate::fpcalc::{ExponentMultiset, Prime, RadiusClass};
use crate::funcfield::{Poly, RatMatrix, RationalFunction};

/// The companion matrix, along the log field `h d/dx` with `h = x(x-1)`, of
/// the unique second-order operator
/// `y'' + (A/x + B/(x-1)) y' + (C/x^2 + D/(x-1)^2 + E/(x(x-1))) y`
/// whose indicial roots at 0, 1 and infinity are the given pairs.
fn companion(
    p: Prime,
    al: &ExponentMultiset,
    be: &ExponentMultiset,
    ga: &ExponentMultiset,
) -> RatMatrix {
    let (a1, a2) = (al.entries()[0], al.entries()[1]);
    let (b1, b2) = (be.entries()[0], be.entries()[1]);
    let (g1, g2) = (ga.entries()[0], ga.entries()[1]);
    let big_a = p.sub(1, p.add(a1, a2));
    let big_c = p.mul(a1, a2);
    let big_b = p.sub(1, p.add(b1, b2));
    let big_d = p.mul(b1, b2);
    let big_e = p.sub(p.mul(g1, g2), p.add(big_c, big_d));

    // In first-order form for (y, h y') the entries are polynomial:
    // q~ = q h - h' = (A+B-2) x + (1-A), r~ = r h^2 = C(x-1)^2 + Dx^2 + Ex(x-1).
    let q_t = Poly::new(
        p,
        vec![p.sub(1, big_a), p.sub(p.add(big_a, big_b), 2)],
    );
    let r_t = Poly::new(
        p,
        vec![
            big_c,
            p.neg(p.add(p.mul(2, big_c), big_e)),
            p.add(p.add(big_c, big_d), big_e),
        ],
    );
    let h = RationalFunction::from_poly(Poly::from_roots(p, &[0, 1]));
    let zero = RationalFunction::zero(p);
    let a_d = RatMatrix::from_rows(
        p,
        vec![
            vec![zero, RationalFunction::from_poly(r_t).neg()],
            vec![
                RationalFunction::one(p),
                RationalFunction::from_poly(q_t).neg(),
            ],
        ],
    );
    a_d.scale(&h.inv().expect("h is nonzero"))
}

fn is_dormant_companion(
    p: Prime,
    al: &ExponentMultiset,
    be: &ExponentMultiset,
    ga: &ExponentMultiset,
) -> Result<bool, OperError> {
    let h = Poly::from_roots(p, &[0, 1]);
    Ok(p_curvature_raw(&companion(p, al, be, ga), &h)?.is_zero())
}

fn checked_lifts(
    p: Prime,
    radii: &[RadiusClass; 3],
) -> Result<[ExponentMultiset; 3], OperError> {
    for rc in radii {
        if rc.prime() != p {
            return Err(OperError::InvalidBase("radius class prime mismatch".into()));
        }
        if rc.cardinality() != 2 {
            return Err(OperError::InvalidBase(
                "oracle handles rank-2 radius classes only".into(),
            ));
        }
        if !rc.is_distinct() {
            return Err(OperError::IndistinctExponents(format!(
                "radius class {rc} has repeated entries"
            )));
        }
    }
    // Residue sums 0, 0, 1: the only distribution compatible with a rank-2
    // oper on the trivial bundle in this normal form.
    Ok([radii[0].lift(0)?, radii[1].lift(0)?, radii[2].lift(1)?])
}

/// Searches every joint lift of the three radius classes consistent with
/// the residue-sum constraint and reports the dormant oper if one exists.
///
/// Dormancy only depends on the shift class (twisting by a degree-zero
/// rank-1 datum moves all three indicial pairs diagonally), so the scan
/// must come out all-or-nothing; that invariance is checked rather than
/// assumed. There is one normal form per joint lift because three marked
/// points leave no accessory parameters.
pub fn brute_force_sl2_oper(
    p: Prime,
    radii: &[RadiusClass; 3],
) -> Result<Option<OperData>, OperError> {
    let [al, be, ga] = checked_lifts(p, radii)?;
    let mut dormant = 0usize;
    let mut total = 0usize;
    for s in 0..p.get() {
        for u in 0..p.get() {
            let t = p.neg(p.add(s, u));
            total += 1;
            if is_dormant_companion(p, &al.shift(s), &be.shift(u), &ga.shift(t))? {
                dormant += 1;
            }
        }
    }
    if dormant != 0 && dormant != total {
        return Err(OperError::InternalInconsistency(format!(
            "dormancy is not shift-invariant: {dormant} of {total} lifts"
        )));
    }
    if dormant == 0 {
        return Ok(None);
    }

    let base = MarkedLine::standard(p);
    let a = companion(p, &al, &be, &ga);
    let x = RationalFunction::x(p);
    let h = RationalFunction::from_poly(base.h());
    let w = x.neg().div(&h).expect("h is nonzero");
    let one = RationalFunction::one(p);
    let zero = RationalFunction::zero(p);
    let m = RatMatrix::from_rows(p, vec![vec![one.clone(), zero.clone()], vec![zero, w]]);
    let conn = LogConnection::new(base.clone(), a, m)?;
    let det = DeterminantData::new(
        2,
        LineBundleDatum::trivial(base.clone()),
        RationalFunction::zero(p),
    )?;
    let f = OperData::from_parts(conn, det, one);

    oper_check(&f)?;
    if !f.is_dormant()? {
        return Err(OperError::InternalInconsistency(
            "packaged oracle oper lost dormancy".into(),
        ));
    }
    for (pt, want) in base.marked().iter().zip([&al, &be, &ga]) {
        let got = f.exponents_at(*pt)?;
        if got != *want {
            return Err(OperError::InternalInconsistency(format!(
                "oracle exponents at {pt} are {:?}, wanted {:?}",
                got.entries(),
                want.entries()
            )));
        }
    }
    Ok(Some(f))
}

/// The number of dormant rank-2 opers on the trivial bundle over the
/// three-pointed line with the given radius classes: 0 or 1.
pub fn brute_force_sl2_count(p: Prime, radii: &[RadiusClass; 3]) -> Result<usize, OperError> {
    Ok(match brute_force_sl2_oper(p, radii)? {
        Some(_) => 1,
        None => 0,
    })
}
