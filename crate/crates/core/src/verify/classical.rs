//! The `q -> 1`, `n = 1` picture: Gauss `₂F₁` contiguous relations and the
//! `2×2` system they come from.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{digest_of, IdentityReport, Measured, Recorder, RATIONAL_TOL, SERIES_TOL};
use crate::gauss::{
    build_classical_M, classical_reference_n1, compare, max_scale, ClassicalParams, Order,
};
use crate::qcore::{Error, NeumaierSum, Result};

/// Relative size of the last term at which the series is cut.
pub const SERIES_TERM_TOL: f64 = 1e-14;
const MAX_TERMS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: C64,
    /// `Σ |term|`.
    pub abs_sum: f64,
    pub terms: usize,
}

/// `₂F₁(a, b; c; x)` by its power series, for `|x| < 1`.
pub fn hyp2f1(a: C64, b: C64, c: C64, x: C64) -> Result<SeriesValue> {
    if x.norm().is_nan() || x.norm() >= 1.0 {
        return Err(Error::SeriesDiverged(format!(
            "|x| = {} is not below 1",
            x.norm()
        )));
    }
    let mut sum = NeumaierSum::new();
    let mut term = C64::new(1.0, 0.0);
    let mut abs_sum = 0.0;
    for m in 0..MAX_TERMS {
        sum.add(term);
        abs_sum += term.norm();
        let s = sum.value();
        if term.norm() <= SERIES_TERM_TOL * s.norm() && m > 0 || term.norm() == 0.0 {
            return Ok(SeriesValue {
                value: s,
                abs_sum,
                terms: m + 1,
            });
        }
        let mf = m as f64;
        let den = (c + mf) * (mf + 1.0);
        if den.norm() == 0.0 {
            return Err(Error::SeriesDiverged(format!(
                "c = {c} is a non-positive integer"
            )));
        }
        term *= (a + mf) * (b + mf) / den * x;
    }
    Err(Error::SeriesDiverged(format!(
        "no convergence in {MAX_TERMS} terms"
    )))
}

/// `Σ c_m F_m = 0`, scaled by the largest `|c_m| Σ|terms of F_m|`.
fn series_relation(terms: &[(C64, SeriesValue)]) -> Measured {
    let mut sum = C64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for (c, f) in terms {
        sum += c * f.value;
        scale = scale.max(c.norm() * f.abs_sum);
    }
    Measured::new(sum.norm(), scale)
}

/// The two contiguous relations at `(a, b, c, x)`: one raising `b` and `c`,
/// one raising `a` and `c`, each against `₂F₁(a+1, b+1; c+2; x)`.
pub fn verify_contiguous(
    a: C64,
    b: C64,
    c: C64,
    x: C64,
    deterministic: bool,
) -> Vec<IdentityReport> {
    let mut rec = Recorder::new(digest_of(&[a, b, c, x]), 1, deterministic);
    let den = c * (c + 1.0);
    rec.check("classical.contiguous.raise-b".into(), SERIES_TOL, || {
        let f0 = hyp2f1(a, b, c, x)?;
        let f1 = hyp2f1(a, b + 1.0, c + 1.0, x)?;
        let f3 = hyp2f1(a + 1.0, b + 1.0, c + 2.0, x)?;
        let one = C64::new(1.0, 0.0);
        Ok(series_relation(&[
            (one, f0),
            (-one, f1),
            (x * a * (c - b) / den, f3),
        ]))
    });
    rec.check("classical.contiguous.raise-a".into(), SERIES_TOL, || {
        let f0 = hyp2f1(a, b, c, x)?;
        let f2 = hyp2f1(a + 1.0, b, c + 1.0, x)?;
        let f3 = hyp2f1(a + 1.0, b + 1.0, c + 2.0, x)?;
        let one = C64::new(1.0, 0.0);
        Ok(series_relation(&[
            (one, f0),
            (-one, f2),
            (x * b * (c - a) / den, f3),
        ]))
    });
    rec.reports
}

/// The `n = 1` brackets `⟨e_0⟩, ⟨e_1⟩` and their `α -> α+1` shifts as
/// `₂F₁` series in `1/x`, with the common factor `x^γ B(α, β)` removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBrackets {
    pub e0: SeriesValue,
    pub e1: SeriesValue,
    pub shifted_e0: SeriesValue,
    pub shifted_e1: SeriesValue,
}

fn scaled(s: SeriesValue, f: C64) -> SeriesValue {
    SeriesValue {
        value: s.value * f,
        abs_sum: s.abs_sum * f.norm(),
        terms: s.terms,
    }
}

pub fn classical_brackets_n1(cp: &ClassicalParams) -> Result<ClassicalBrackets> {
    // a = α, b = -γ, c = α + β, argument 1/x.
    let (a, b, c) = (cp.alpha, -cp.gamma, cp.alpha + cp.beta);
    let xi = cp.x.inv();
    Ok(ClassicalBrackets {
        e0: hyp2f1(a, b, c, xi)?,
        e1: scaled(hyp2f1(a, b + 1.0, c + 1.0, xi)?, xi * (c - a) / c),
        shifted_e0: scaled(hyp2f1(a + 1.0, b, c + 1.0, xi)?, a / c),
        shifted_e1: scaled(
            hyp2f1(a + 1.0, b + 1.0, c + 2.0, xi)?,
            xi * a * (c - a) / (c * (c + 1.0)),
        ),
    })
}

/// `L D U = U' D' L'` for `M`.
pub fn verify_classical_ldu_udl(cp: &ClassicalParams, deterministic: bool) -> Vec<IdentityReport> {
    let n = cp.n;
    let mut rec = Recorder::new(digest_of(cp), n, deterministic);
    rec.check(format!("classical.ldu-udl[n={n}]"), RATIONAL_TOL, || {
        let f = build_classical_M(cp, Order::Ldu)?;
        let g = build_classical_M(cp, Order::Udl)?;
        let r = compare(
            &f.product(),
            &g.product(),
            &max_scale(&f.term_scale(), &g.term_scale()),
        );
        let (i, j) = r.worst;
        let d = (f.product()[(i, j)] - g.product()[(i, j)]).norm();
        Ok(if r.max_rel == 0.0 {
            Measured::new(0.0, 1.0)
        } else {
            Measured::new(d, d / r.max_rel)
        })
    });
    rec.reports
}

/// Both decompositions of `M`, and for `n = 1` the three-term forms and the
/// `2×2` system checked on series values, plus the contiguous relations
/// under `a = α`, `b = -γ`, `c = α + β`, `x -> 1/x`.
pub fn verify_classical(cp: &ClassicalParams, deterministic: bool) -> Vec<IdentityReport> {
    let n = cp.n;
    let mut rec = Recorder::new(digest_of(cp), n, deterministic);
    rec.reports = verify_classical_ldu_udl(cp, deterministic);
    let cp1 = ClassicalParams { n: 1, ..*cp };
    for order in [Order::Ldu, Order::Udl] {
        rec.check(
            format!("classical.reference-2x2.{order}[n={n}]"),
            RATIONAL_TOL,
            || {
                let m = build_classical_M(&cp1, order)?;
                let r = classical_reference_n1(&cp1, order)?;
                let res = compare(&m.product(), &r, &m.term_scale());
                Ok(Measured::new(
                    res.max_abs,
                    m.product().max_abs().max(r.max_abs()),
                ))
            },
        );
    }
    let (al, be, ga, x) = (cp.alpha, cp.beta, cp.gamma, cp.x);
    let one = C64::new(1.0, 0.0);
    rec.check(
        format!("classical.three-term.first[n={n}]"),
        SERIES_TOL,
        || {
            let br = classical_brackets_n1(cp)?;
            Ok(series_relation(&[
                (al + be + ga, br.shifted_e1),
                (be, br.e0),
                (-x * (al + be), br.e1),
            ]))
        },
    );
    rec.check(
        format!("classical.three-term.second[n={n}]"),
        SERIES_TOL,
        || {
            let br = classical_brackets_n1(cp)?;
            Ok(series_relation(&[
                (ga, br.shifted_e1),
                (al + be, br.shifted_e0),
                (-al, br.e0),
            ]))
        },
    );
    for order in [Order::Ldu, Order::Udl] {
        for j in 0..2 {
            rec.check(
                format!("classical.system.{order}[n={n},j={j}]"),
                SERIES_TOL,
                || {
                    let br = classical_brackets_n1(cp)?;
                    let m = build_classical_M(&cp1, order)?.product();
                    let shifted = [br.shifted_e0, br.shifted_e1];
                    Ok(series_relation(&[
                        (one, shifted[j]),
                        (-m[(0, j)], br.e0),
                        (-m[(1, j)], br.e1),
                    ]))
                },
            );
        }
    }
    let mut series = verify_contiguous(al, -ga, al + be, x.inv(), deterministic);
    for r in &mut series {
        r.identity_id = format!("{}[n={n}]", r.identity_id);
        r.params_digest = digest_of(cp);
        r.n = n;
    }
    rec.reports.extend(series);
    rec.reports
}
