//! Identities among the polynomial families at special and random points.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::random_point;
use super::{IdentityReport, Measured, Recorder, RATIONAL_TOL};
use crate::interp::{
    closed_form, delta, etilde, etilde_prime, eval_poly_with, lagrange_f, lagrange_subset,
    leading_coefficient, materialize, measured_leading_coefficient, Base, EvalOptions, PointKind,
    PolySpec, Slot, SpecialPoint,
};
use crate::jackson::{
    fg_eval_bounded, nabla_expansion, nabla_skew, special_point_claims, NablaFamily, SpecialSide,
};
use crate::qcore::{Error, Params};

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(
        rng.gen_range(0.5..1.5),
        rng.gen_range(0.0..std::f64::consts::TAU),
    )
}

/// Direct evaluation against the closed form; pairs without a closed form are skipped.
fn closed_check(rec: &mut Recorder, id: String, spec: &PolySpec, sp: &SpecialPoint, p: &Params) {
    match closed_form(spec, sp, p) {
        Err(Error::Unsupported(_)) => {}
        closed => rec.check(id, RATIONAL_TOL, || {
            let closed = closed?;
            let z = materialize(sp, p)?;
            let direct = eval_poly_with(spec, p, &z, &EvalOptions::default())?;
            Ok(Measured::new(
                (direct.value - closed).norm(),
                direct.scale.max(closed.norm()),
            ))
        }),
    }
}

fn interpolation_points(rec: &mut Recorder, p: &Params, rng: &mut ChaCha8Rng) {
    let n = p.n;
    for j in 0..=n {
        for i in 0..=n {
            closed_check(
                rec,
                format!("poly.orthogonality[n={n},i={i},j={j}]"),
                &PolySpec::matsuo(i, Slot::A1, Slot::B2),
                &SpecialPoint::zeta(j, Slot::A1, Slot::B2Inv),
                p,
            );
        }
        let x = random_c(rng);
        let y = random_c(rng);
        let pre_free: Vec<C64> = (0..n - j).map(|_| random_c(rng)).collect();
        let suf_free: Vec<C64> = (0..j).map(|_| random_c(rng)).collect();
        let pre = SpecialPoint::with_free(
            PointKind::PrefixDescending {
                start: Slot::B2Inv.into(),
                base: Base::T,
            },
            j,
            pre_free,
        );
        let suf = SpecialPoint::with_free(
            PointKind::SuffixAscending {
                start: Slot::A1.into(),
                base: Base::T,
            },
            j,
            suf_free,
        );
        for k in 0..=n {
            for i in 0..=n {
                let spec = PolySpec::etilde(k, i, Slot::A1, Slot::B2);
                let tag = format!("n={n},j={j},k={k},i={i}");
                closed_check(
                    rec,
                    format!("poly.zeta-x[{tag}]"),
                    &spec,
                    &SpecialPoint::zeta(j, x, Slot::B2Inv),
                    p,
                );
                closed_check(
                    rec,
                    format!("poly.zeta-a[{tag}]"),
                    &spec,
                    &SpecialPoint::zeta(j, Slot::A1, y),
                    p,
                );
                closed_check(rec, format!("poly.prefix-b[{tag}]"), &spec, &pre, p);
                closed_check(rec, format!("poly.suffix-a[{tag}]"), &spec, &suf, p);
            }
        }
    }
    let w: Vec<C64> = (0..n).map(|_| random_c(rng)).collect();
    for k in 0..=n {
        for i in 0..=n {
            rec.check(
                format!("poly.leading-coefficient[n={n},k={k},i={i}]"),
                RATIONAL_TOL,
                || {
                    let m = measured_leading_coefficient(
                        k,
                        i,
                        p.a1,
                        p.b2,
                        p.t,
                        &w,
                        &EvalOptions::default(),
                    )?;
                    let f = leading_coefficient(n, k, i, p.a1, p.b2, p.t)?;
                    Ok(Measured::new((m - f).norm(), m.norm().max(f.norm())))
                },
            );
        }
    }
}

fn lagrange(rec: &mut Recorder, p: &Params, rng: &mut ChaCha8Rng) {
    let n = p.n;
    for (base, bname, xs, ys) in [
        (Base::T, "t", Slot::A1, Slot::A2),
        (Base::TInv, "tinv", Slot::B1Inv, Slot::B2Inv),
    ] {
        for j in 0..=n {
            let pts = [
                ("delta", SpecialPoint::xi(j, xs, ys, base)),
                ("xi-free", SpecialPoint::xi(j, random_c(rng), ys, base)),
                (
                    "prefix",
                    SpecialPoint::with_free(
                        PointKind::PrefixAscending {
                            start: xs.into(),
                            base,
                        },
                        j,
                        (0..n - j).map(|_| random_c(rng)).collect(),
                    ),
                ),
                (
                    "suffix",
                    SpecialPoint::with_free(
                        PointKind::SuffixAscending {
                            start: ys.into(),
                            base,
                        },
                        j,
                        (0..j).map(|_| random_c(rng)).collect(),
                    ),
                ),
            ];
            for r in 0..=n {
                let spec = PolySpec::lagrange(r, xs, ys, base);
                for (pname, sp) in &pts {
                    closed_check(
                        rec,
                        format!("poly.lagrange.{bname}.{pname}[n={n},j={j},r={r}]"),
                        &spec,
                        sp,
                        p,
                    );
                }
            }
        }
        let z = random_point(rng, n);
        for r in 0..=n {
            rec.check(
                format!("poly.lagrange.{bname}.recurrence[n={n},r={r}]"),
                RATIONAL_TOL,
                || {
                    let s = base.resolve(p);
                    let (x, y) = (xs.resolve(p), ys.resolve(p));
                    let a = lagrange_f(r, x, y, s, &z.coords)?;
                    let b = lagrange_subset(r, x, y, s, &z.coords)?;
                    Ok(Measured::new((a.value - b).norm(), a.scale.max(b.norm())))
                },
            );
        }
    }
}

fn special_factors(rec: &mut Recorder, p: &Params, rng: &mut ChaCha8Rng) {
    let n = p.n;
    for (side, sname) in [(SpecialSide::XOverB2, "x-binv"), (SpecialSide::A1Y, "a1-y")] {
        for j in 0..=n {
            let free = random_c(rng);
            let claims = match special_point_claims(p, side, j, free) {
                Ok(c) => c,
                Err(e) => {
                    rec.check(
                        format!("poly.fg-special.{sname}[n={n},j={j}]"),
                        RATIONAL_TOL,
                        || Err(e),
                    );
                    continue;
                }
            };
            let (z, claims) = claims;
            for cl in claims {
                let kind = if cl.vanishing { "zero" } else { "value" };
                rec.check(
                    format!(
                        "poly.fg-special.{sname}[n={n},j={j},{:?}{},{kind}]",
                        cl.which, cl.i
                    ),
                    RATIONAL_TOL,
                    || {
                        let (v, bound) = fg_eval_bounded(p, cl.which, cl.i, &z.coords)?;
                        Ok(Measured::new(
                            (v - cl.expected).norm(),
                            bound.max(cl.expected.norm()),
                        ))
                    },
                );
            }
        }
    }
}

fn nabla_expansions(rec: &mut Recorder, p: &Params, rng: &mut ChaCha8Rng) {
    let n = p.n;
    let opts = EvalOptions::default();
    let z = random_point(rng, n);
    let d = delta(&z.coords);
    for (fam, fname) in [(NablaFamily::E, "E"), (NablaFamily::EPrime, "Eprime")] {
        let is: Vec<usize> = match fam {
            NablaFamily::E => (0..n).collect(),
            NablaFamily::EPrime => (1..=n).collect(),
        };
        for k in 1..=n {
            for &i in &is {
                let exps = match nabla_expansion(p, fam, k, i) {
                    Ok(e) => e,
                    Err(e) => {
                        rec.check(
                            format!("poly.nabla-expansion.{fname}[n={n},k={k},i={i}]"),
                            RATIONAL_TOL,
                            || Err(e),
                        );
                        continue;
                    }
                };
                for e in exps {
                    rec.check(
                        format!(
                            "poly.nabla-expansion.{fname}.{}[n={n},k={k},i={i}]",
                            e.case.name()
                        ),
                        RATIONAL_TOL,
                        || {
                            let lhs = nabla_skew(p, fam, k, i, &z.coords, &opts)?;
                            let mut rhs = C64::new(0.0, 0.0);
                            let mut scale = lhs.abs_sum / d.norm();
                            for ((kk, ii), coef) in &e.terms {
                                let v = match fam {
                                    NablaFamily::E => {
                                        etilde(*kk, *ii, p.a1, p.b2, p.t, &z.coords, &opts)
                                    }
                                    NablaFamily::EPrime => {
                                        etilde_prime(*kk, *ii, p.a1, p.b2, p.t, &z.coords, &opts)
                                    }
                                }?;
                                rhs += coef * v.value;
                                scale = scale.max(coef.norm() * v.scale);
                            }
                            Ok(Measured::new((lhs.value / d - rhs).norm(), scale))
                        },
                    );
                }
            }
        }
    }
}

/// Every polynomial identity at `p`; `seed` draws the free coordinates.
pub fn verify_polynomial_identities(
    p: &Params,
    seed: u64,
    deterministic: bool,
) -> Vec<IdentityReport> {
    let mut rec = Recorder::for_params(p, deterministic);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    interpolation_points(&mut rec, p, &mut rng);
    lagrange(&mut rec, p, &mut rng);
    special_factors(&mut rec, p, &mut rng);
    nabla_expansions(&mut rec, p, &mut rng);
    rec.reports
}
