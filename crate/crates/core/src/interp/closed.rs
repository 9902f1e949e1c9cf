//! Closed-form values of the polynomial families at structured points.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{
    etilde, materialize, Base, EvalOptions, Family, PointArg, PointKind, PolySpec, SpecialPoint,
};
use crate::qcore::{
    choose2, one, powi, qbinom, shifted_factorial as sf, sign, zero, Error, Params, Result,
};

/// Which of two equivalent displayed forms to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ConstantForm {
    #[default]
    First,
    Second,
}

fn same(u: C64, v: C64) -> bool {
    (u - v).norm() <= 1e-13 * u.norm().max(v.norm())
}

fn tpow(t: C64, k: i64) -> C64 {
    powi(t, k)
}

/// The diagonal constant `c_i = e_i(a,b; ζ_i(a, b^{-1}))`.
pub fn matsuo_constant(
    n: usize,
    i: usize,
    a: C64,
    b: C64,
    t: C64,
    form: ConstantForm,
) -> Result<C64> {
    let (n, i) = (n as i64, i as i64);
    let ab = a * b;
    let ti = t.inv();
    Ok(match form {
        ConstantForm::First => {
            sf(ab * tpow(t, i), t, n - i)?
                * sf(ab.inv() * tpow(t, -(i - 1)), t, i)?
                * sf(t, t, i)?
                * sf(t, t, n - i)?
                / (tpow(t, choose2(n)) * (one() - t).powi(n as i32))
        }
        ConstantForm::Second => {
            sf(ab, t, n - i)?
                * sf(ab.inv() * tpow(t, -(n - 1)), t, i)?
                * sf(ti, ti, i)?
                * sf(ti, ti, n - i)?
                / (one() - ti).powi(n as i32)
        }
    })
}

/// The constant `C_{ki}` in the top homogeneous component
/// `Ẽ_{k,i}(a,b;z) = C_{ki} m_{(2^k 1^{n-k})}(z) + lower degree`, with `m`
/// the monomial symmetric polynomial with unit coefficients.
pub fn leading_coefficient(n: usize, k: usize, i: usize, a: C64, b: C64, t: C64) -> Result<C64> {
    let ti = t.inv();
    let (n, k, i) = (n as i64, k as i64, i as i64);
    Ok(sign(n) * sf(ti, ti, k)? * sf(ti, ti, n - k)?
        / (powi(a, i) * powi(b, -(n - i)) * (one() - ti).powi(n as i32)))
}

/// Measure the coefficient of `z_1⋯z_n e_k(z)` in `Ẽ_{k,i}` at the direction
/// `w`: the degree `n+k` component is isolated exactly by averaging over
/// `n+k+1` roots of unity, then divided by `m_{(2^k 1^{n-k})}(w)`.
pub fn measured_leading_coefficient(
    k: usize,
    i: usize,
    a: C64,
    b: C64,
    t: C64,
    w: &[C64],
    opts: &EvalOptions,
) -> Result<C64> {
    let n = w.len();
    let d = n + k;
    let m = d + 1;
    let mut top = zero();
    for s in 0..m {
        let om = C64::from_polar(1.0, std::f64::consts::TAU * s as f64 / m as f64);
        let z: Vec<C64> = w.iter().map(|x| om * x).collect();
        top += etilde(k, i, a, b, t, &z, opts)?.value * om.powi(-(d as i32));
    }
    top /= m as f64;
    let prod: C64 = w.iter().product();
    Ok(top / (prod * elementary(k, w)))
}

fn elementary(k: usize, w: &[C64]) -> C64 {
    let mut e = vec![zero(); k + 1];
    e[0] = one();
    for x in w {
        for r in (1..=k).rev() {
            e[r] = e[r] + e[r - 1] * x;
        }
    }
    e[k]
}

/// Closed-form value of `spec` at `sp`, first displayed form.
pub fn closed_form(spec: &PolySpec, sp: &SpecialPoint, p: &Params) -> Result<C64> {
    closed_form_with(spec, sp, p, ConstantForm::First)
}

/// Closed-form value; `Second` selects the alternative display where one
/// exists and is `Unsupported` otherwise.
pub fn closed_form_with(
    spec: &PolySpec,
    sp: &SpecialPoint,
    p: &Params,
    form: ConstantForm,
) -> Result<C64> {
    let n = p.n;
    spec.validate(n)?;
    let z = materialize(sp, p)?;
    let unsupported = || Error::Unsupported(format!("{spec} at {:?} (j = {})", sp.kind, sp.j));
    let j = sp.j;
    let (a, b) = (spec.a.resolve(p), spec.b.resolve(p));
    let t = p.t;
    match spec.family {
        Family::Matsuo { i } => {
            interp_closed(n, 0, i, a, b, t, sp, &z.coords, p, form).ok_or_else(unsupported)?
        }
        Family::Etilde { k, i } => {
            interp_closed(n, k, i, a, b, t, sp, &z.coords, p, form).ok_or_else(unsupported)?
        }
        Family::MatsuoTimesProd { i } => {
            interp_closed(n, n, i, a, b, t, sp, &z.coords, p, form).ok_or_else(unsupported)?
        }
        Family::EtildePrime { .. } => Err(unsupported()),
        Family::LagrangeF { r } => {
            if form == ConstantForm::Second {
                return Err(unsupported());
            }
            let s = spec.base.resolve(p);
            lagrange_closed(n, r, j, a, b, s, spec.base, sp, p).ok_or_else(unsupported)?
        }
    }
}

fn arg_is(arg: PointArg, p: &Params, v: C64) -> bool {
    same(arg.resolve(p), v)
}

#[allow(clippy::too_many_arguments)]
fn interp_closed(
    n: usize,
    k: usize,
    i: usize,
    a: C64,
    b: C64,
    t: C64,
    sp: &SpecialPoint,
    z: &[C64],
    p: &Params,
    form: ConstantForm,
) -> Option<Result<C64>> {
    let j = sp.j;
    let binv = b.inv();
    let ti = t.inv();
    let (ni, ii) = (n as i64, i as i64);
    match sp.kind {
        PointKind::Zeta { x, y } => {
            let first = if arg_is(y, p, binv) {
                zeta_b_side(n, k, i, j, a, b, t, x.resolve(p), form)
            } else {
                None
            };
            first.or_else(|| {
                if arg_is(x, p, a) {
                    zeta_a_side(n, k, i, j, a, b, t, y.resolve(p), form)
                } else {
                    None
                }
            })
        }
        PointKind::PrefixDescending {
            start,
            base: Base::T,
        } if arg_is(start, p, binv) => {
            if i < j {
                return Some(Ok(zero()));
            }
            if i != j || k != 0 {
                return None;
            }
            let free = &z[j..];
            Some((|| {
                let mut tail = one();
                for f in free {
                    tail *= one() - f * b * tpow(t, ii);
                }
                let head = sf((a * b).inv() * tpow(t, -(ii - 1)), t, ii)?;
                Ok(match form {
                    ConstantForm::First => {
                        tpow(t, -ii * (ni - ii)) * sf(ti, ti, ii)? * sf(ti, ti, ni - ii)?
                            / (one() - ti).powi(n as i32)
                            * head
                            * tail
                    }
                    ConstantForm::Second => {
                        sf(t, t, ii)? * sf(t, t, ni - ii)?
                            / (tpow(t, choose2(ni)) * (one() - t).powi(n as i32))
                            * head
                            * tail
                    }
                })
            })())
        }
        PointKind::SuffixAscending {
            start,
            base: Base::T,
        } if arg_is(start, p, a) => {
            if j < i {
                return Some(Ok(zero()));
            }
            if i != j || k != 0 || form == ConstantForm::Second {
                return None;
            }
            let free = &z[..j];
            Some((|| {
                let mut head = one();
                let inv = (a * tpow(t, ni - ii)).inv();
                for f in free {
                    head *= one() - f * inv;
                }
                Ok(
                    sf(ti, ti, ii)? * sf(ti, ti, ni - ii)? / (one() - ti).powi(n as i32)
                        * sf(a * b, t, ni - ii)?
                        * head,
                )
            })())
        }
        _ => None,
    }
}

/// Points `ζ_j(x, b^{-1})`.
#[allow(clippy::too_many_arguments)]
fn zeta_b_side(
    n: usize,
    k: usize,
    i: usize,
    j: usize,
    a: C64,
    b: C64,
    t: C64,
    xv: C64,
    form: ConstantForm,
) -> Option<Result<C64>> {
    let (ni, ii, ji, ki) = (n as i64, i as i64, j as i64, k as i64);
    if k == 0 && same(xv, a) {
        // Diagonal evaluation: c_i δ_ij.
        return Some(if i == j {
            matsuo_constant(n, i, a, b, t, form)
        } else {
            Ok(zero())
        });
    }
    if form == ConstantForm::Second {
        return None;
    }
    if i < j {
        return Some(Ok(zero()));
    }
    if i + k > n {
        return None;
    }
    Some((|| {
        let e0 = sf(xv * b * tpow(t, ii), t, ni - ii)?
            * sf(xv / a, t, ii - ji)?
            * sf((a * b).inv() * tpow(t, -(ji - 1)), t, ji)?
            * sf(t, t, ni)?
            / (tpow(t, choose2(ni)) * (one() - t).powi(n as i32))
            * qbinom(ii, ji, t)?
            / qbinom(ni, ji, t)?;
        Ok(powi(xv, ki) * tpow(t, (ni - ji) * ki - choose2(ki + 1)) * e0)
    })())
}

/// Points `ζ_j(a, y)`.
#[allow(clippy::too_many_arguments)]
fn zeta_a_side(
    n: usize,
    k: usize,
    i: usize,
    j: usize,
    a: C64,
    b: C64,
    t: C64,
    yv: C64,
    form: ConstantForm,
) -> Option<Result<C64>> {
    let (ni, ii, ji, ki) = (n as i64, i as i64, j as i64, k as i64);
    let ti = t.inv();
    if form == ConstantForm::Second {
        return None;
    }
    if i > j {
        return Some(Ok(zero()));
    }
    if i + k < n {
        return None;
    }
    Some((|| {
        let e0 = sf(yv * b * tpow(t, -(ji - ii - 1)), t, ji - ii)?
            * sf(yv / (a * tpow(t, ni - 1)), t, ii)?
            * sf(a * b, t, ni - ji)?
            * sf(ti, ti, ni)?
            / (one() - ti).powi(n as i32)
            * qbinom(ni - ii, ni - ji, ti)?
            / qbinom(ni, ji, ti)?;
        let m = ki + ji - ni;
        Ok(powi(yv, m) * powi(a, ni - ji) * tpow(t, choose2(ni - ji) - choose2(m)) * e0)
    })())
}

#[allow(clippy::too_many_arguments)]
fn lagrange_closed(
    n: usize,
    r: usize,
    j: usize,
    x: C64,
    y: C64,
    s: C64,
    base: Base,
    sp: &SpecialPoint,
    p: &Params,
) -> Option<Result<C64>> {
    let (ni, ri, ji) = (n as i64, r as i64, j as i64);
    let si = s.inv();
    match sp.kind {
        PointKind::Xi {
            x: px,
            y: py,
            base: pb,
        } if pb == base && arg_is(py, p, y) => {
            let xv = px.resolve(p);
            if same(xv, x) {
                return Some(Ok(if r == j { one() } else { zero() }));
            }
            if r > j {
                return Some(Ok(zero()));
            }
            Some((|| {
                Ok(qbinom(ji, ri, si)?
                    * sf(xv / x, s, ji - ri)?
                    * sf(xv / y * powi(s, -(ni - ji)), s, ri)?
                    / (sf(y / x * powi(s, ni - ji - ri), s, ji - ri)?
                        * sf(x / y * powi(s, -(ni - ri)), s, ri)?))
            })())
        }
        PointKind::PrefixAscending { start, base: pb } if pb == base && arg_is(start, p, x) => {
            if r < j {
                return Some(Ok(zero()));
            }
            if r != j {
                return None;
            }
            let free = &sp.free;
            Some((|| {
                let mut num = one();
                let c = x.inv() * powi(s, -ri);
                for f in free {
                    num *= one() - f * c;
                }
                Ok(num / sf(y / x * powi(s, -ri), s, ni - ri)?)
            })())
        }
        PointKind::SuffixAscending { start, base: pb } if pb == base && arg_is(start, p, y) => {
            if r > j {
                return Some(Ok(zero()));
            }
            if r != j {
                return None;
            }
            let free = &sp.free;
            Some((|| {
                let mut num = one();
                let c = y.inv() * powi(s, -(ni - ri));
                for f in free {
                    num *= one() - f * c;
                }
                Ok(num / sf(x / y * powi(s, -(ni - ri)), s, ri)?)
            })())
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{eval_poly_with, Slot};
    use crate::qcore::{c, sample_params};

    fn rel(u: C64, v: C64) -> f64 {
        (u - v).norm() / u.norm().max(v.norm()).max(1e-300)
    }

    fn check(spec: &PolySpec, sp: &SpecialPoint, p: &Params) {
        let z = materialize(sp, p).unwrap();
        let direct = eval_poly_with(spec, p, &z, &EvalOptions::default()).unwrap();
        let closed = closed_form(spec, sp, p).unwrap();
        let err = (direct.value - closed).norm() / direct.scale.max(closed.norm()).max(1.0);
        assert!(
            err < 1e-10,
            "{spec} at {:?} j={}: {} vs {closed}, err {err:e}, scale {:e}",
            sp.kind,
            sp.j,
            direct.value,
            direct.scale
        );
    }

    fn free(seed: u64, m: usize) -> Vec<C64> {
        (0..m)
            .map(|k| {
                C64::from_polar(
                    0.6 + 0.13 * (seed as f64 + k as f64) % 1.0,
                    1.3 * k as f64 + seed as f64,
                )
            })
            .collect()
    }

    #[test]
    fn diagonal_constants_agree() {
        for n in 1..=4 {
            let p = sample_params(40 + n as u64, n).unwrap();
            for i in 0..=n {
                let a = matsuo_constant(n, i, p.a1, p.b2, p.t, ConstantForm::First).unwrap();
                let b = matsuo_constant(n, i, p.a1, p.b2, p.t, ConstantForm::Second).unwrap();
                assert!(rel(a, b) < 1e-12);
                for j in 0..=n {
                    check(
                        &PolySpec::matsuo(i, Slot::A1, Slot::B2),
                        &SpecialPoint::zeta(j, Slot::A1, Slot::B2Inv),
                        &p,
                    );
                }
            }
        }
    }

    #[test]
    fn zeta_scaling_forms() {
        for n in 1..=4 {
            let p = sample_params(50 + n as u64, n).unwrap();
            let x = c(0.8, -0.35);
            let y = c(-0.4, 0.9);
            for j in 0..=n {
                for i in 0..=n {
                    for k in 0..=n {
                        let spec = PolySpec::etilde(k, i, Slot::A1, Slot::B2);
                        for sp in [
                            SpecialPoint::zeta(j, x, Slot::B2Inv),
                            SpecialPoint::zeta(j, Slot::A1, y),
                        ] {
                            match closed_form(&spec, &sp, &p) {
                                Ok(_) => check(&spec, &sp, &p),
                                Err(Error::Unsupported(_)) => {}
                                Err(e) => panic!("{e}"),
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn triangular_points() {
        for n in 1..=4 {
            let p = sample_params(60 + n as u64, n).unwrap();
            for j in 0..=n {
                let pre = SpecialPoint::with_free(
                    PointKind::PrefixDescending {
                        start: Slot::B2Inv.into(),
                        base: Base::T,
                    },
                    j,
                    free(j as u64, n - j),
                );
                let suf = SpecialPoint::with_free(
                    PointKind::SuffixAscending {
                        start: Slot::A1.into(),
                        base: Base::T,
                    },
                    j,
                    free(7 + j as u64, j),
                );
                for i in 0..=n {
                    for k in 0..=n {
                        let spec = PolySpec::etilde(k, i, Slot::A1, Slot::B2);
                        for sp in [&pre, &suf] {
                            if closed_form(&spec, sp, &p).is_ok() {
                                check(&spec, sp, &p);
                            }
                        }
                    }
                    let spec = PolySpec::matsuo(i, Slot::A1, Slot::B2);
                    if i == j {
                        let u = closed_form_with(&spec, &pre, &p, ConstantForm::First).unwrap();
                        let v = closed_form_with(&spec, &pre, &p, ConstantForm::Second).unwrap();
                        assert!(rel(u, v) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn lagrange_points() {
        for n in 1..=4 {
            let p = sample_params(70 + n as u64, n).unwrap();
            for base in [Base::T, Base::TInv] {
                let (xs, ys) = match base {
                    Base::T => (Slot::A1, Slot::A2),
                    Base::TInv => (Slot::B1Inv, Slot::B2Inv),
                };
                for j in 0..=n {
                    let pts = [
                        SpecialPoint::xi(j, xs, ys, base),
                        SpecialPoint::xi(j, c(0.45, 0.7), ys, base),
                        SpecialPoint::with_free(
                            PointKind::PrefixAscending {
                                start: xs.into(),
                                base,
                            },
                            j,
                            free(3, n - j),
                        ),
                        SpecialPoint::with_free(
                            PointKind::SuffixAscending {
                                start: ys.into(),
                                base,
                            },
                            j,
                            free(5, j),
                        ),
                    ];
                    for r in 0..=n {
                        let spec = PolySpec::lagrange(r, xs, ys, base);
                        for sp in &pts {
                            if closed_form(&spec, sp, &p).is_ok() {
                                check(&spec, sp, &p);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn uncovered_pair_is_unsupported() {
        let p = sample_params(80, 3).unwrap();
        let spec = PolySpec::etilde_prime(1, 1, Slot::A1, Slot::B2);
        let err =
            closed_form(&spec, &SpecialPoint::zeta(1, Slot::A1, Slot::B2Inv), &p).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
        let spec = PolySpec::matsuo(1, Slot::A1, Slot::B2);
        let err =
            closed_form(&spec, &SpecialPoint::xi(1, Slot::A1, Slot::A2, Base::T), &p).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn off_triangle_lagrange_is_zero() {
        let p = sample_params(81, 3).unwrap();
        let sp = SpecialPoint::xi(1, c(0.45, 0.7), Slot::A2, Base::T);
        let v = closed_form(&PolySpec::lagrange(2, Slot::A1, Slot::A2, Base::T), &sp, &p).unwrap();
        assert_eq!(v, zero());
    }

    #[test]
    fn leading_coefficient_exact() {
        let p = sample_params(90, 4).unwrap();
        for n in 1..=4 {
            let w: Vec<C64> = free(11 + n as u64, n);
            for k in 0..=n {
                for i in 0..=n {
                    let m = measured_leading_coefficient(
                        k,
                        i,
                        p.a1,
                        p.b2,
                        p.t,
                        &w,
                        &EvalOptions::default(),
                    )
                    .unwrap();
                    let f = leading_coefficient(n, k, i, p.a1, p.b2, p.t).unwrap();
                    assert!(rel(m, f) < 1e-9, "n={n} k={k} i={i}: {m} vs {f}");
                }
            }
        }
    }
}
