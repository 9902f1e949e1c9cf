//! The operator `∇φ = φ - (T_{q,z_1}Φ / Φ) T_{q,z_1}φ`, the factors `F_i`,
//! `G_i` with `T_{q,z_1}Φ / Φ = G_1(z) / F_1(q z_1, z_2, …)`, and the
//! polynomials whose `∇` images give the three-term relations.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::interp::{e_product, materialize, EvalOptions, EvalPoint, SpecialPoint};
use crate::interp::{skew_symmetrize_bounded, SkewSum};
use crate::qcore::{choose2, one, powi, shifted_factorial, sign, zero, Error, Params, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FgKind {
    F,
    G,
}

/// Value of `F_i` or `G_i` with the product of its factor magnitudes.
pub fn fg_eval_bounded(p: &Params, which: FgKind, i: usize, z: &[C64]) -> Result<(C64, f64)> {
    let n = z.len();
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange(format!(
            "factor index {i} with n = {n}"
        )));
    }
    let zi = z[i - 1];
    let (mut v, mut m) = match which {
        FgKind::F => {
            let (u1, u2) = (zi / p.a1, zi / p.a2);
            (
                (one() - u1) * (one() - u2),
                (1.0 + u1.norm()) * (1.0 + u2.norm()),
            )
        }
        FgKind::G => {
            let c = p.qalpha * powi(p.t, 2 * (n as i64 - 1));
            let (u1, u2) = (p.b1 * zi, p.b2 * zi);
            (
                c * (one() - u1) * (one() - u2),
                c.norm() * (1.0 + u1.norm()) * (1.0 + u2.norm()),
            )
        }
    };
    let s = match which {
        FgKind::F => p.t,
        FgKind::G => p.t.inv(),
    };
    for (k, zk) in z.iter().enumerate() {
        if k + 1 != i {
            v *= zi - s * zk;
            m *= zi.norm() + (s * zk).norm();
        }
    }
    Ok((v, m))
}

/// `F_i(z) = (1 - z_i/a1)(1 - z_i/a2) ∏_{k≠i} (z_i - t z_k)` and
/// `G_i(z) = qalpha t^{2(n-1)} (1 - b1 z_i)(1 - b2 z_i) ∏_{k≠i} (z_i - z_k/t)`,
/// with `i` counted from 1.
pub fn fg_eval(p: &Params, which: FgKind, i: usize, z: &[C64]) -> Result<C64> {
    fg_eval_bounded(p, which, i, z).map(|r| r.0)
}

/// `(∇φ)(z)` for an arbitrary function `φ`.
pub fn nabla_integrand(p: &Params, phi: &dyn Fn(&[C64]) -> Result<C64>, z: &[C64]) -> Result<C64> {
    if z.is_empty() {
        return Err(Error::Invalid("∇ needs at least one variable".into()));
    }
    let mut zs = z.to_vec();
    zs[0] *= p.q;
    let (f1, fb) = fg_eval_bounded(p, FgKind::F, 1, &zs)?;
    if f1.norm() <= 8.0 * f64::EPSILON * fb {
        return Err(Error::PoleHit(format!(
            "F_1(q z_1, …) vanishes at z_1 = {}",
            z[0]
        )));
    }
    let g1 = fg_eval(p, FgKind::G, 1, z)?;
    Ok(phi(z)? - g1 / f1 * phi(&zs)?)
}

/// Which auxiliary polynomial multiplies `F_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NablaFamily {
    /// `E^{(n-1)}_{k-1,i}(a1, b2; z_2, …, z_n)`, `1 ≤ k ≤ n`, `0 ≤ i ≤ n-1`.
    E,
    /// `E'^{(n-1)}_{k-1,i-1}(a1, b2; z_2, …, z_n)`, `1 ≤ k, i ≤ n`.
    EPrime,
}

fn check_family(fam: NablaFamily, n: usize, k: usize, i: usize) -> Result<(usize, bool)> {
    let ok = match fam {
        NablaFamily::E => (1..=n).contains(&k) && i < n,
        NablaFamily::EPrime => (1..=n).contains(&k) && (1..=n).contains(&i),
    };
    if !ok {
        return Err(Error::IndexOutOfRange(format!(
            "(k, i) = ({k}, {i}) for the {fam:?} family with n = {n}"
        )));
    }
    Ok(match fam {
        NablaFamily::E => (i, false),
        NablaFamily::EPrime => (i - 1, true),
    })
}

/// The auxiliary polynomial factor and its magnitude bound.
fn aux(p: &Params, fam: NablaFamily, k: usize, i: usize, z: &[C64]) -> Result<(C64, f64)> {
    let (ii, prime) = check_family(fam, z.len(), k, i)?;
    Ok(e_product(k - 1, ii, p.a1, p.b2, p.t, &z[1..], prime))
}

/// `φ_{k,i}(z) = F_1(z) · E^{(n-1)}(z_2, …, z_n)`; `∇` sends it to `(F_1 - G_1) E^{(n-1)}`.
pub fn phi_ki(p: &Params, fam: NablaFamily, k: usize, i: usize, z: &[C64]) -> Result<C64> {
    let (e, _) = aux(p, fam, k, i, z)?;
    Ok(fg_eval(p, FgKind::F, 1, z)? * e)
}

/// Skew-symmetrization of `∇φ_{k,i} = (F_1 - G_1) E^{(n-1)}`.
pub fn nabla_skew(
    p: &Params,
    fam: NablaFamily,
    k: usize,
    i: usize,
    z: &[C64],
    opts: &EvalOptions,
) -> Result<SkewSum> {
    check_family(fam, z.len(), k, i)?;
    skew_symmetrize_bounded(
        |w| {
            let (f, fb) = fg_eval_bounded(p, FgKind::F, 1, w).expect("index checked");
            let (g, gb) = fg_eval_bounded(p, FgKind::G, 1, w).expect("index checked");
            let (e, eb) = aux(p, fam, k, i, w).expect("index checked");
            ((f - g) * e, (fb + gb) * eb)
        },
        z,
        opts,
    )
}

/// Which form of the expansion of `A∇φ_{k,i} / Δ` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpansionCase {
    SumAtMostN,
    SumAtLeastN,
    KAtMostI,
    KAtLeastI,
}

impl ExpansionCase {
    pub fn name(self) -> &'static str {
        match self {
            ExpansionCase::SumAtMostN => "i+k<=n",
            ExpansionCase::SumAtLeastN => "i+k>=n",
            ExpansionCase::KAtMostI => "k<=i",
            ExpansionCase::KAtLeastI => "k>=i",
        }
    }
}

/// One expansion: coefficients on `Ẽ_{k',i'}(a1, b2)` (family `E`) or
/// `Ẽ'_{k',i'}(a1, b2)` (family `EPrime`).
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub case: ExpansionCase,
    pub terms: Vec<((usize, usize), C64)>,
}

/// Every expansion of `A∇φ_{k,i} / Δ` whose index condition holds.
pub fn nabla_expansion(p: &Params, fam: NablaFamily, k: usize, i: usize) -> Result<Vec<Expansion>> {
    let n = p.n;
    check_family(fam, n, k, i)?;
    let (ni, ki, ii) = (n as i64, k as i64, i as i64);
    let (q_, t) = (p.qalpha, p.t);
    let (a1, a2, b1, b2) = (p.a1, p.a2, p.b1, p.b2);
    let tp = |e: i64| powi(t, e);
    let all = a1 * a2 * b1 * b2;
    let mut out = Vec::new();
    match fam {
        NablaFamily::E => {
            if i + k <= n {
                out.push(Expansion {
                    case: ExpansionCase::SumAtMostN,
                    terms: vec![
                        (
                            (k, i),
                            -tp(ki - 1) * (one() - q_ * all * tp(2 * ni - ki - 1)) / (a1 * a2 * b2),
                        ),
                        (
                            (k - 1, i),
                            tp(ni - ii - 1) * (one() - q_ * a2 * b2 * tp(ni + ii - ki)) / (a2 * b2),
                        ),
                        (
                            (k - 1, i + 1),
                            -tp(ni - ii - 1) * (one() - a2 * b2 * tp(ii)) / (a2 * b2),
                        ),
                    ],
                });
            }
            if i + k >= n {
                out.push(Expansion {
                    case: ExpansionCase::SumAtLeastN,
                    terms: vec![
                        (
                            (k, i),
                            -q_ / a1 * tp(ni + ii - 1) * (one() - a1 * b1 * tp(ni - ii - 1)),
                        ),
                        (
                            (k, i + 1),
                            -tp(ki - 1) * (one() - q_ * a2 * b2 * tp(ni + ii - ki)) / a2,
                        ),
                        ((k - 1, i + 1), tp(ni - 1) * (one() - q_ * tp(ni - ki))),
                    ],
                });
            }
        }
        NablaFamily::EPrime => {
            if k <= i {
                out.push(Expansion {
                    case: ExpansionCase::KAtMostI,
                    terms: vec![
                        (
                            (k, i),
                            -tp(ni - 1) * (one() - q_ * all * tp(2 * ni - ki - 1)) / a2,
                        ),
                        (
                            (k - 1, i),
                            tp(ni + ki - 2) * (one() - q_ * a1 * b1 * tp(2 * ni - ki - ii)),
                        ),
                        (
                            (k - 1, i - 1),
                            -q_ * tp(2 * ni - 2) * (one() - a1 * b1 * tp(ni - ii)),
                        ),
                    ],
                });
            }
            if k >= i {
                out.push(Expansion {
                    case: ExpansionCase::KAtLeastI,
                    terms: vec![
                        ((k, i), -tp(ni - 1) * (one() - a2 * b2 * tp(ii - 1)) / a2),
                        (
                            (k, i - 1),
                            -tp(ni + ii - 2) * (one() - q_ * a1 * b1 * tp(2 * ni - ki - ii)) / a1,
                        ),
                        ((k - 1, i - 1), tp(ni + ki - 2) * (one() - q_ * tp(ni - ki))),
                    ],
                });
            }
        }
    }
    Ok(out)
}

/// The two families of special points at which `F_i`, `G_i` are known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialSide {
    /// `ζ_j(x, b2^{-1})` with `x` free.
    XOverB2,
    /// `ζ_j(a1, y)` with `y` free.
    A1Y,
}

/// A stated value of `F_i` or `G_i` at a special point; `expected = 0` for
/// the vanishing statements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgClaim {
    pub which: FgKind,
    pub i: usize,
    pub expected: C64,
    pub vanishing: bool,
}

fn zero_claim(which: FgKind, i: usize) -> FgClaim {
    FgClaim {
        which,
        i,
        expected: zero(),
        vanishing: true,
    }
}

fn value_claim(which: FgKind, i: usize, expected: C64) -> FgClaim {
    FgClaim {
        which,
        i,
        expected,
        vanishing: false,
    }
}

/// The special point and every closed-form statement about `F_i`, `G_i` there.
pub fn special_point_claims(
    p: &Params,
    side: SpecialSide,
    j: usize,
    free: C64,
) -> Result<(EvalPoint, Vec<FgClaim>)> {
    let n = p.n;
    let (ni, ji) = (n as i64, j as i64);
    let (q_, t) = (p.qalpha, p.t);
    let (a1, a2, b1, b2) = (p.a1, p.a2, p.b1, p.b2);
    let ti = t.inv();
    let tp = |e: i64| powi(t, e);
    let sf = |x: C64, c: C64, m: i64| shifted_factorial(x, c, m);
    let gpre = q_ * tp(2 * (ni - 1));
    let sp = match side {
        SpecialSide::XOverB2 => SpecialPoint::zeta(j, free, b2.inv()),
        SpecialSide::A1Y => SpecialPoint::zeta(j, a1, free),
    };
    let z = materialize(&sp, p)?;
    let mut claims = Vec::new();
    match side {
        SpecialSide::XOverB2 => {
            let x = free;
            for m in 2..=n {
                if m != j + 1 {
                    claims.push(zero_claim(FgKind::F, m));
                }
            }
            for m in 1..n {
                claims.push(zero_claim(FgKind::G, m));
            }
            if j >= 1 {
                let v = (one() - tp(-(ji - 1)) / (a1 * b2)) * (one() - tp(-(ji - 1)) / (a2 * b2))
                    / (powi(b2 * tp(ji - 1), ni - 1) * (one() - t))
                    * sf(t, t, ji)?
                    * sf(x * b2 * tp(ji), t, ni - ji)?;
                claims.push(value_claim(FgKind::F, 1, v));
            }
            if j < n {
                let v = sign(ji) * (one() - x / a1) * (one() - x / a2) * powi(x, ni - ji - 1)
                    / (powi(b2, ji) * tp(choose2(ji - 1) - 1) * (one() - t))
                    * sf(t, t, ni - ji)?
                    * sf(x * b2 / t, t, ji)?;
                claims.push(value_claim(FgKind::F, j + 1, v));
                let v = gpre
                    * (one() - b1 * x * tp(ni - ji - 1))
                    * (one() - b2 * x * tp(ni - ji - 1))
                    * powi(-b2.inv(), ji)
                    * tp(-choose2(ji + 1))
                    * sf(x * b2 * tp(ni - ji), t, ji)?
                    * powi(x * tp(ni - ji - 1), ni - ji - 1)
                    * sf(ti, ti, ni - ji)?
                    / (one() - ti);
                claims.push(value_claim(FgKind::G, n, v));
            } else {
                claims.push(zero_claim(FgKind::G, n));
            }
        }
        SpecialSide::A1Y => {
            let y = free;
            for m in 2..=n {
                claims.push(zero_claim(FgKind::F, m));
            }
            for m in 1..n {
                if m != j {
                    claims.push(zero_claim(FgKind::G, m));
                }
            }
            if j == 0 {
                claims.push(zero_claim(FgKind::F, 1));
            } else {
                let v = (one() - y * tp(-(ji - 1)) / a2)
                    * powi(-y * t, ji - 1)
                    * powi(-a1 * t, ni - ji)
                    * tp(choose2(ni - ji) - choose2(ji - 1))
                    * sf(y / a1 * tp(-(ni - 1)), t, ni - ji + 1)?
                    * sf(ti, ti, ji)?
                    / (one() - ti);
                claims.push(value_claim(FgKind::F, 1, v));
                let v = gpre
                    * (one() - y * b1)
                    * (one() - y * b2)
                    * powi(y, ji - 1)
                    * powi(-a1 / t, ni - ji)
                    * tp(choose2(ni - ji))
                    * sf(y / a1 * tp(-(ni - ji - 2)), t, ni - ji)?
                    * sf(ti, ti, ji)?
                    / (one() - ti);
                claims.push(value_claim(FgKind::G, j, v));
            }
            if j < n {
                let v = gpre
                    * (one() - a1 * b1 * tp(ni - ji - 1))
                    * (one() - a1 * b2 * tp(ni - ji - 1))
                    * powi(a1 * tp(ni - ji - 1), ni - 1)
                    * sf(y / a1 * tp(-(ni - 1)), t, ji)?
                    * sf(ti, ti, ni - ji)?
                    / (one() - ti);
                claims.push(value_claim(FgKind::G, n, v));
            }
        }
    }
    Ok((z, claims))
}
