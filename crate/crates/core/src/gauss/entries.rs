//! Entry closures for `R`, `R^{-1}`, `K1`, `K2`, `A` and the intermediate
//! triangular matrices, each indexed by `0 <= i, j <= n`.
#![allow(non_snake_case)]

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{CMatrix, GaussFactorization, Order};
use crate::interp::{
    etilde, materialize, matsuo_constant, ConstantForm, EvalOptions, Slot, SpecialPoint,
};
use crate::qcore::{
    choose2, choose3, ensure_generic, one, powi, qbinom, shifted_factorial, sign, zero, Error,
    Params, Result,
};

/// Parameters unpacked for the entry formulas.
struct Ctx {
    n: i64,
    t: C64,
    ti: C64,
    qa: C64,
    a1: C64,
    a2: C64,
    b1: C64,
    b2: C64,
}

impl Ctx {
    fn new(p: &Params) -> Self {
        Ctx {
            n: p.n as i64,
            t: p.t,
            ti: p.t.inv(),
            qa: p.qalpha,
            a1: p.a1,
            a2: p.a2,
            b1: p.b1,
            b2: p.b2,
        }
    }

    fn tp(&self, k: i64) -> C64 {
        powi(self.t, k)
    }

    /// `(x;t)_m`.
    fn sf(&self, x: C64, m: i64) -> Result<C64> {
        shifted_factorial(x, self.t, m)
    }

    fn qb(&self, i: i64, j: i64) -> Result<C64> {
        qbinom(i, j, self.t)
    }

    fn qbi(&self, i: i64, j: i64) -> Result<C64> {
        qbinom(i, j, self.ti)
    }

    fn dim(&self) -> usize {
        self.n as usize + 1
    }

    fn lower(&self, f: impl Fn(&Ctx, i64, i64) -> Result<C64>) -> Result<CMatrix> {
        CMatrix::try_from_fn(self.dim(), |i, j| {
            if i < j {
                Ok(zero())
            } else {
                f(self, i as i64, j as i64)
            }
        })
    }

    fn upper(&self, f: impl Fn(&Ctx, i64, i64) -> Result<C64>) -> Result<CMatrix> {
        CMatrix::try_from_fn(self.dim(), |i, j| {
            if i > j {
                Ok(zero())
            } else {
                f(self, i as i64, j as i64)
            }
        })
    }

    fn diag(&self, f: impl Fn(&Ctx, i64) -> Result<C64>) -> Result<CMatrix> {
        let d = (0..=self.n)
            .map(|j| f(self, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(CMatrix::diagonal(&d))
    }

    /// Unit triangular factors get an exact 1 on the diagonal.
    fn unit(mut m: CMatrix) -> CMatrix {
        for i in 0..m.dim() {
            m[(i, i)] = one();
        }
        m
    }

    fn factorization(
        &self,
        order: Order,
        l: impl Fn(&Ctx, i64, i64) -> Result<C64>,
        d: impl Fn(&Ctx, i64) -> Result<C64>,
        u: impl Fn(&Ctx, i64, i64) -> Result<C64>,
    ) -> Result<GaussFactorization> {
        Ok(GaussFactorization {
            order,
            lower: Self::unit(self.lower(l)?),
            diag: self.diag(d)?,
            upper: Self::unit(self.upper(u)?),
        })
    }
}

// R, first decomposition.

fn l_R(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let (n, t) = (c.n, c.t);
    Ok(c.qbi(n - j, n - i)?
        * sign(i - j)
        * c.tp(-choose2(i - j))
        * c.sf(c.a2 * c.b2 * c.tp(j), i - j)?
        / c.sf(c.a2 / c.a1 * powi(t, -(n - 2 * j - 1)), i - j)?)
}

fn d_R(c: &Ctx, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.sf(c.a1 / c.a2 * c.tp(-j), n - j)? * c.sf(c.a2 * c.b1, j)?
        / (c.sf(c.a1 * c.b2, n - j)? * c.sf(c.a2 / c.a1 * c.tp(-(n - j)), j)?))
}

fn u_R(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.qbi(j, i)? * c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        / c.sf(c.a1 / c.a2 * c.tp(n - i - j), j - i)?)
}

// R, second decomposition.

fn up_R(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.qb(j, i)?
        * sign(j - i)
        * c.tp(choose2(j - i))
        * c.sf((c.a1 * c.b1).inv() * c.tp(-(n - i - 1)), j - i)?
        / c.sf(c.b2 / c.b1 * c.tp(i + j - n), j - i)?)
}

fn dp_R(c: &Ctx, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.sf(c.b1 / c.b2 * c.tp(n - 2 * j + 1), j)?
        * c.sf((c.a2 * c.b1).inv() * c.tp(-(n - j - 1)), n - j)?
        / (c.sf((c.a1 * c.b2).inv() * c.tp(-(j - 1)), j)?
            * c.sf(c.b2 / c.b1 * c.tp(-(n - 2 * j - 1)), n - j)?))
}

fn lp_R(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(
        c.qb(n - j, n - i)? * c.sf((c.a2 * c.b2).inv() * c.tp(-(i - 1)), i - j)?
            / c.sf(c.b1 / c.b2 * c.tp(n - 2 * i + 1), i - j)?,
    )
}

// R^{-1} = U* D* L*.

fn l_Rinv(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.qbi(n - j, n - i)? * c.sf(c.a2 * c.b2 * c.tp(j), i - j)?
        / c.sf(c.a2 / c.a1 * c.tp(i + j - n), i - j)?)
}

fn d_Rinv(c: &Ctx, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(
        c.sf(c.a2 / c.a1 * c.tp(-(n - j)), j)? * c.sf(c.a1 * c.b2, n - j)?
            / (c.sf(c.a2 * c.b1, j)? * c.sf(c.a1 / c.a2 * c.tp(-j), n - j)?),
    )
}

fn u_Rinv(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(sign(j - i)
        * c.tp(-choose2(j - i))
        * c.qbi(j, i)?
        * c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        / c.sf(c.a1 / c.a2 * c.tp(n - 2 * j + 1), j - i)?)
}

// R^{-1} = L'* D'* U'*.

fn up_Rinv(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(
        c.qb(j, i)? * c.sf((c.a1 * c.b1).inv() * c.tp(-(n - i - 1)), j - i)?
            / c.sf(c.b2 / c.b1 * c.tp(-(n - 2 * i - 1)), j - i)?,
    )
}

fn dp_Rinv(c: &Ctx, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.sf(c.b2 / c.b1 * c.tp(-(n - 2 * j - 1)), n - j)?
        * c.sf((c.a1 * c.b2).inv() * c.tp(-(j - 1)), j)?
        / (c.sf((c.a2 * c.b1).inv() * c.tp(-(n - j - 1)), n - j)?
            * c.sf(c.b1 / c.b2 * c.tp(n - 2 * j + 1), j)?))
}

fn lp_Rinv(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(sign(i - j)
        * c.tp(choose2(i - j))
        * c.qb(n - j, n - i)?
        * c.sf((c.a2 * c.b2).inv() * c.tp(-(i - 1)), i - j)?
        / c.sf(c.b1 / c.b2 * c.tp(n - i - j), i - j)?)
}

// A, both decompositions.

fn l_A(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(sign(i - j)
        * c.tp(choose2(n - i) - choose2(n - j))
        * c.qb(n - j, n - i)?
        * c.sf(c.a2 * c.b2 * c.tp(j), i - j)?
        / c.sf(c.qa * c.a2 * c.b2 * c.tp(2 * j), i - j)?)
}

fn d_A(c: &Ctx, j: i64) -> Result<C64> {
    let n = c.n;
    let ab = c.a1 * c.a2 * c.b1 * c.b2;
    Ok(powi(c.a1, n - j)
        * powi(c.a2, j)
        * c.tp(choose2(j) + choose2(n - j))
        * c.sf(c.qa, j)?
        * c.sf(c.qa * c.a2 * c.b2 * c.tp(2 * j), n - j)?
        / (c.sf(c.qa * c.a2 * c.b2 * c.tp(j - 1), j)?
            * c.sf(c.qa * ab * c.tp(n + j - 1), n - j)?))
}

fn u_A(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(powi(-c.qa * c.a2 / c.a1, j - i)
        * c.tp(choose2(j) - choose2(i))
        * c.qb(j, i)?
        * c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        / c.sf(c.qa * c.a2 * c.b2 * c.tp(2 * i), j - i)?)
}

fn up_A(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(powi(-c.qa, j - i)
        * c.tp(choose2(n - i) - choose2(n - j))
        * c.qb(j, i)?
        * c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        / c.sf(c.qa * c.a1 * c.b1 * c.tp(2 * (n - j)), j - i)?)
}

fn dp_A(c: &Ctx, j: i64) -> Result<C64> {
    let n = c.n;
    let ab = c.a1 * c.a2 * c.b1 * c.b2;
    Ok(powi(c.a1, n - j)
        * powi(c.a2, j)
        * c.tp(choose2(j) + choose2(n - j))
        * c.sf(c.qa * c.a1 * c.b1 * c.tp(2 * (n - j)), j)?
        * c.sf(c.qa, n - j)?
        / (c.sf(c.qa * ab * c.tp(2 * n - j - 1), j)?
            * c.sf(c.qa * c.a1 * c.b1 * c.tp(n - j - 1), n - j)?))
}

fn lp_A(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(powi(-c.a1 / c.a2, i - j)
        * c.tp(choose2(j) - choose2(i))
        * c.qb(n - j, n - i)?
        * c.sf(c.a2 * c.b2 * c.tp(j), i - j)?
        / c.sf(c.qa * c.a1 * c.b1 * c.tp(2 * (n - i)), i - j)?)
}

// Intermediates on the A side.

fn ltilde(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    let ab = c.a1 * c.a2 * c.b1 * c.b2;
    Ok(c.qb(n - j, n - i)?
        * sign(i - j)
        * powi(c.a1, n - j)
        * c.tp(choose2(n - i))
        * c.sf(c.a2 * c.b2 * c.tp(j), i - j)?
        * c.sf(c.qa * c.a2 * c.b2 * c.tp(i + j), n - i)?
        / c.sf(c.qa * ab * c.tp(n + j - 1), n - j)?)
}

fn utilde(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.qb(j, i)?
        * powi(-c.qa / c.a1, j - i)
        * powi(c.a2, j)
        * c.tp(choose2(j))
        * c.sf(c.qa, i)?
        * c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        / (c.sf(c.qa * c.a2 * c.b2 * c.tp(i - 1), i)?
            * c.sf(c.qa * c.a2 * c.b2 * c.tp(2 * i), j - i)?))
}

fn vtilde(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.qb(j, i)?
        * powi(c.qa / c.a1 * c.tp(j - 1), j - i)
        * c.tp(choose2(i) - choose2(j - i))
        * c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        * c.sf(c.qa * c.a2 * c.b2 * c.tp(j - 1), i)?
        / (powi(c.a2 * c.tp(j - 1), i) * c.sf(c.qa, j)?))
}

fn u_A_inv(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(powi(c.qa * c.a2 / c.a1 * c.tp(j - 1), j - i)
        * c.qb(j, i)?
        * c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        / c.sf(c.qa * c.a2 * c.b2 * c.tp(j + i - 1), j - i)?)
}

fn utilde_prime(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    let ab = c.a1 * c.a2 * c.b1 * c.b2;
    Ok(powi(-c.qa * c.tp(n - 1), j - i)
        * powi(c.a2, j)
        * c.tp(choose2(i))
        * c.qb(j, i)?
        * c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        * c.sf(c.qa * c.a1 * c.b1 * c.tp(2 * n - i - j), i)?
        / c.sf(c.qa * ab * c.tp(2 * n - j - 1), j)?)
}

fn ltilde_prime(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(sign(i - j)
        * c.qb(n - j, n - i)?
        * powi(c.a1, n - j)
        * powi(c.a2, -(i - j))
        * c.tp(choose2(n - i) + choose2(j) - choose2(i))
        * c.sf(c.qa, n - i)?
        * c.sf(c.a2 * c.b2 * c.tp(j), i - j)?
        / (c.sf(c.qa * c.a1 * c.b1 * c.tp(n - i - 1), n - i)?
            * c.sf(c.qa * c.a1 * c.b1 * c.tp(2 * (n - i)), i - j)?))
}

fn lp_A_inv(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let n = c.n;
    Ok(c.qb(n - j, n - i)?
        * powi(c.a1 / c.a2 * c.tp(-j), i - j)
        * c.sf(c.a2 * c.b2 * c.tp(j), i - j)?
        / c.sf(c.qa * c.a1 * c.b1 * c.tp(2 * n - i - j - 1), i - j)?)
}

// Intermediates on the R side.

fn utilde_R(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let (n, ti) = (c.n, c.ti);
    Ok(c.sf(c.a1 * c.b1 * c.tp(n - j), j - i)?
        * c.sf(c.a1 / c.a2 * c.tp(-i), n - j)?
        * c.sf(c.a2 * c.b1, i)?
        * shifted_factorial(ti, ti, n)?
        / (one() - ti).powi(n as i32)
        * c.qbi(j, i)?
        / c.qbi(n, i)?)
}

fn ltilde_R(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let (n, ti) = (c.n, c.ti);
    Ok(sign(i - j)
        * c.tp(-choose2(i - j))
        * c.sf(c.a2 * c.b2 * c.tp(j), i - j)?
        * (one() - ti).powi(n as i32)
        / (c.sf(c.a2 / c.a1 * c.tp(-(n - 2 * j - 1)), i - j)?
            * c.sf(c.a1 * c.b2, n - j)?
            * c.sf(c.a2 / c.a1 * c.tp(-(n - j)), j)?
            * shifted_factorial(ti, ti, n)?)
        * c.qbi(n, i)?
        * c.qbi(i, j)?)
}

fn ltilde_prime_R(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let (n, t) = (c.n, c.t);
    Ok(c.sf((c.a2 * c.b2).inv() * c.tp(-(i - 1)), i - j)?
        * c.sf((c.a2 * c.b1).inv() * c.tp(-(n - i - 1)), n - i)?
        * c.sf(c.b1 / c.b2 * c.tp(n - i - j + 1), j)?
        * c.sf(t, n)?
        / (c.tp(choose2(n)) * (one() - t).powi(n as i32))
        * c.qb(i, j)?
        / c.qb(n, j)?)
}

fn utilde_prime_R(c: &Ctx, i: i64, j: i64) -> Result<C64> {
    let (n, t) = (c.n, c.t);
    Ok(sign(j - i)
        * c.tp(choose2(j - i) + choose2(n))
        * c.sf((c.a1 * c.b1).inv() * c.tp(-(n - i - 1)), j - i)?
        * (one() - t).powi(n as i32)
        / (c.sf(c.b2 / c.b1 * c.tp(-(n - i - j)), j - i)?
            * c.sf(c.b2 / c.b1 * c.tp(-(n - 2 * j - 1)), n - j)?
            * c.sf((c.a1 * c.b2).inv() * c.tp(-(j - 1)), j)?
            * c.sf(t, n)?)
        * c.qb(n, j)?
        * c.qb(j, i)?)
}

/// `R` in the requested Gauss decomposition.
pub fn build_R_factors(p: &Params, order: Order) -> Result<GaussFactorization> {
    ensure_generic(p)?;
    let c = Ctx::new(p);
    match order {
        Order::Ldu => c.factorization(order, l_R, d_R, u_R),
        Order::Udl => c.factorization(order, lp_R, dp_R, up_R),
    }
}

/// `R^{-1}`: `Udl` gives `U* D* L*`, `Ldu` gives `L'* D'* U'*`.
pub fn build_R_inverse(p: &Params, order: Order) -> Result<GaussFactorization> {
    ensure_generic(p)?;
    let c = Ctx::new(p);
    match order {
        Order::Udl => c.factorization(order, l_Rinv, d_Rinv, u_Rinv),
        Order::Ldu => c.factorization(order, lp_Rinv, dp_Rinv, up_Rinv),
    }
}

/// `A` in the requested Gauss decomposition.
pub fn build_A_factors(p: &Params, order: Order) -> Result<GaussFactorization> {
    ensure_generic(p)?;
    let c = Ctx::new(p);
    match order {
        Order::Ldu => c.factorization(order, l_A, d_A, u_A),
        Order::Udl => c.factorization(order, lp_A, dp_A, up_A),
    }
}

/// `R` from its defining relation: row `i` is the `e(a2,b1)` basis evaluated at
/// `ζ_i(a1, b2^{-1})`, where the `e(a1,b2)` basis collapses to `c_i δ_ij`.
pub fn build_R_direct(p: &Params) -> Result<CMatrix> {
    build_R_direct_with(p, &EvalOptions::default()).map(|(m, _)| m)
}

/// As [`build_R_direct`], with the per-entry cancellation scale.
pub fn build_R_direct_with(p: &Params, opts: &EvalOptions) -> Result<(CMatrix, Vec<f64>)> {
    ensure_generic(p)?;
    let n = p.n;
    let dim = n + 1;
    let mut m = CMatrix::zeros(dim);
    let mut scale = vec![0.0; dim * dim];
    for i in 0..=n {
        let z = materialize(&SpecialPoint::zeta(i, Slot::A1, Slot::B2Inv), p)?;
        let ci = matsuo_constant(n, i, p.a1, p.b2, p.t, ConstantForm::First)?;
        if ci == zero() {
            return Err(Error::DivisionByZero(format!("c_{i} vanishes")));
        }
        for j in 0..=n {
            let e = etilde(0, n - j, p.a2, p.b1, p.t, &z.coords, opts)?;
            m[(i, j)] = e.value / ci;
            scale[i * dim + j] = e.scale / ci.norm();
        }
    }
    Ok((m, scale))
}

/// `K1 = R^{-1} D1` or `K2 = D2 R(a2 -> q a2, b2 -> b2/q)`.
pub fn build_K(p: &Params, which: u8) -> Result<CMatrix> {
    let f = build_K_factors(p, which)?;
    Ok(f[1..].iter().fold(f[0].clone(), |acc, m| &acc * m))
}

/// The factors whose product is `K1` or `K2`, in multiplication order: the
/// Gauss factors of `R^{-1}` and `D1`, or `D2` and the Gauss factors of the
/// shifted `R`.
pub fn build_K_factors(p: &Params, which: u8) -> Result<Vec<CMatrix>> {
    let n = p.n as i64;
    let step = p.qalpha * powi(p.t, n - 1);
    match which {
        1 => {
            let rinv = build_R_inverse(p, Order::Udl)?;
            let d1: Vec<C64> = (0..=n).map(|i| powi(step, n - i)).collect();
            let mut out: Vec<CMatrix> = rinv.factors().into_iter().cloned().collect();
            out.push(CMatrix::diagonal(&d1));
            Ok(out)
        }
        2 => {
            let shifted = p.shift_ab(2, 1);
            ensure_generic(p)?;
            let r = build_R_factors(&shifted, Order::Ldu)?;
            let d2: Vec<C64> = (0..=n).map(|i| powi(step, i)).collect();
            let mut out = vec![CMatrix::diagonal(&d2)];
            out.extend(r.factors().into_iter().cloned());
            Ok(out)
        }
        _ => Err(Error::IndexOutOfRange(format!(
            "K matrix index {which}, expected 1 or 2"
        ))),
    }
}

/// The triangular matrices met in the derivations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intermediate {
    /// Lower factor of `A = L~ U~`.
    Ltilde,
    /// Upper factor of `A = L~ U~`.
    Utilde,
    /// Inverse of [`Intermediate::Utilde`].
    Vtilde,
    /// Inverse of the unit upper factor of `A`.
    UAinv,
    /// Inverse of the unit lower factor of `A = U' D' L'`.
    LprimeAinv,
    /// Lower factor of `R = L~_R U~_R`.
    #[serde(rename = "Ltilde_R")]
    LtildeR,
    /// Upper factor of `R = L~_R U~_R`.
    #[serde(rename = "Utilde_R")]
    UtildeR,
    /// Lower factor of `R = U~'_R L~'_R`.
    #[serde(rename = "LtildePrime_R")]
    LtildePrimeR,
    /// Upper factor of `R = U~'_R L~'_R`.
    #[serde(rename = "UtildePrime_R")]
    UtildePrimeR,
    /// Upper factor of `A = U~' L~'`.
    #[serde(rename = "UtildePrime_app")]
    UtildePrimeApp,
    /// Lower factor of `A = U~' L~'`.
    #[serde(rename = "LtildePrime_app")]
    LtildePrimeApp,
}

impl Intermediate {
    pub const ALL: [Intermediate; 11] = [
        Intermediate::Ltilde,
        Intermediate::Utilde,
        Intermediate::Vtilde,
        Intermediate::UAinv,
        Intermediate::LprimeAinv,
        Intermediate::LtildeR,
        Intermediate::UtildeR,
        Intermediate::LtildePrimeR,
        Intermediate::UtildePrimeR,
        Intermediate::UtildePrimeApp,
        Intermediate::LtildePrimeApp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Intermediate::Ltilde => "Ltilde",
            Intermediate::Utilde => "Utilde",
            Intermediate::Vtilde => "Vtilde",
            Intermediate::UAinv => "UAinv",
            Intermediate::LprimeAinv => "LprimeAinv",
            Intermediate::LtildeR => "Ltilde_R",
            Intermediate::UtildeR => "Utilde_R",
            Intermediate::LtildePrimeR => "LtildePrime_R",
            Intermediate::UtildePrimeR => "UtildePrime_R",
            Intermediate::UtildePrimeApp => "UtildePrime_app",
            Intermediate::LtildePrimeApp => "LtildePrime_app",
        }
    }

    pub fn is_lower(self) -> bool {
        matches!(
            self,
            Intermediate::Ltilde
                | Intermediate::LprimeAinv
                | Intermediate::LtildeR
                | Intermediate::LtildePrimeR
                | Intermediate::LtildePrimeApp
        )
    }
}

impl fmt::Display for Intermediate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Intermediate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Intermediate::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown intermediate matrix {s:?}")))
    }
}

pub fn build_intermediate(p: &Params, which: Intermediate) -> Result<CMatrix> {
    ensure_generic(p)?;
    let c = Ctx::new(p);
    let f: fn(&Ctx, i64, i64) -> Result<C64> = match which {
        Intermediate::Ltilde => ltilde,
        Intermediate::Utilde => utilde,
        Intermediate::Vtilde => vtilde,
        Intermediate::UAinv => u_A_inv,
        Intermediate::LprimeAinv => lp_A_inv,
        Intermediate::LtildeR => ltilde_R,
        Intermediate::UtildeR => utilde_R,
        Intermediate::LtildePrimeR => ltilde_prime_R,
        Intermediate::UtildePrimeR => utilde_prime_R,
        Intermediate::UtildePrimeApp => utilde_prime,
        Intermediate::LtildePrimeApp => ltilde_prime,
    };
    if which.is_lower() {
        c.lower(f)
    } else {
        c.upper(f)
    }
}

/// Matrices with a closed-form determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetKind {
    R,
    K1,
    K2,
    A,
}

impl FromStr for DetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "R" => Ok(DetKind::R),
            "K1" => Ok(DetKind::K1),
            "K2" => Ok(DetKind::K2),
            "A" => Ok(DetKind::A),
            _ => Err(Error::Invalid(format!("no determinant formula for {s:?}"))),
        }
    }
}

/// Closed-form determinants as products over `1 <= i <= n`.
pub fn det_formula(p: &Params, which: DetKind) -> Result<C64> {
    ensure_generic(p)?;
    let c = Ctx::new(p);
    let n = c.n;
    let m = choose2(n + 1);
    let step = c.qa * c.tp(n - 1);
    let ratio = |x: C64, y: C64| -> Result<C64> {
        let mut r = one();
        for i in 1..=n {
            r *= c.sf(x, i)? / c.sf(y, i)?;
        }
        Ok(r)
    };
    Ok(match which {
        DetKind::R => powi(-c.a1 / c.a2, m) * ratio(c.a2 * c.b1, c.a1 * c.b2)?,
        DetKind::K1 => powi(-c.a2 / c.a1 * step, m) * ratio(c.a1 * c.b2, c.a2 * c.b1)?,
        DetKind::K2 => {
            let q = p.q;
            powi(-c.a1 / c.a2 * step / q, m) * ratio(q * c.a2 * c.b1, c.a1 * c.b2 / q)?
        }
        DetKind::A => {
            let mut r = powi(c.a1 * c.a2, m) * c.tp(2 * choose3(n + 1));
            let ab = c.a1 * c.a2 * c.b1 * c.b2;
            for i in 1..=n {
                r *= c.sf(c.qa, i)? / c.sf(c.qa * ab * c.tp(2 * n - i - 1), i)?;
            }
            r
        }
    })
}

#[cfg(test)]
mod tests {
    use super::super::{compare, term_scale};
    use super::*;
    use crate::qcore::sample_params;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / a.norm().max(b.norm())
    }

    #[test]
    fn factor_shapes() {
        let p = sample_params(11, 4).unwrap();
        for order in [Order::Ldu, Order::Udl] {
            assert!(build_R_factors(&p, order).unwrap().is_well_formed());
            assert!(build_R_inverse(&p, order).unwrap().is_well_formed());
            assert!(build_A_factors(&p, order).unwrap().is_well_formed());
        }
    }

    #[test]
    fn both_r_decompositions_agree() {
        for n in 1..=6 {
            let p = sample_params(20 + n as u64, n).unwrap();
            let f = build_R_factors(&p, Order::Ldu).unwrap();
            let g = build_R_factors(&p, Order::Udl).unwrap();
            let sc = super::super::max_scale(&f.term_scale(), &g.term_scale());
            let r = compare(&f.product(), &g.product(), &sc);
            assert!(r.max_rel < 1e-10, "n={n} {r:?}");
        }
    }

    #[test]
    fn r_times_inverse_is_identity() {
        for n in 1..=8 {
            let p = sample_params(40 + n as u64, n).unwrap();
            let f = build_R_factors(&p, Order::Ldu).unwrap();
            let r = f.product();
            for order in [Order::Ldu, Order::Udl] {
                let g = build_R_inverse(&p, order).unwrap();
                let inv = g.product();
                let chain: Vec<&CMatrix> = f.factors().into_iter().chain(g.factors()).collect();
                let res = compare(&(&r * &inv), &CMatrix::identity(n + 1), &term_scale(&chain));
                assert!(res.max_rel < 1e-10, "n={n} {order} {res:?}");
            }
        }
    }

    #[test]
    fn inverse_swap_rule() {
        let p = sample_params(5, 4).unwrap();
        let n = 4;
        let inv = build_R_inverse(&p, Order::Udl).unwrap();
        let sw = build_R_factors(&p.swapped(), Order::Ldu).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                let a = inv.lower[(i, j)];
                let b = sw.upper[(n - i, n - j)];
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "{i} {j}");
            }
            assert!(rel(inv.diag[(i, i)], sw.diag[(n - i, n - i)]) < 1e-12);
        }
    }

    #[test]
    fn direct_r_matches_factors() {
        for n in 1..=4 {
            let p = sample_params(60 + n as u64, n).unwrap();
            let f = build_R_factors(&p, Order::Ldu).unwrap();
            let (d, sc) = build_R_direct_with(&p, &EvalOptions::default()).unwrap();
            let r = compare(
                &d,
                &f.product(),
                &super::super::max_scale(&sc, &f.term_scale()),
            );
            assert!(r.max_rel < 1e-9, "n={n} {r:?}");
        }
    }

    #[test]
    fn determinants() {
        for n in 0..=6 {
            let p = sample_params(80 + n as u64, n).unwrap();
            let f = build_R_factors(&p, Order::Ldu).unwrap();
            let dr = det_formula(&p, DetKind::R).unwrap();
            assert!(rel(f.diag_product(), dr) < 1e-10, "n={n}");
            assert!(rel(f.product().det_elimination(), dr) < 1e-9, "n={n}");
            let a = build_A_factors(&p, Order::Udl).unwrap();
            let da = det_formula(&p, DetKind::A).unwrap();
            assert!(rel(a.product().det_elimination(), da) < 1e-9, "n={n}");
            for (k, kind) in [(1, DetKind::K1), (2, DetKind::K2)] {
                let m = build_K(&p, k).unwrap();
                assert!(
                    rel(m.det_elimination(), det_formula(&p, kind).unwrap()) < 1e-9,
                    "n={n} K{k}"
                );
            }
        }
    }

    #[test]
    fn a_routes() {
        for n in 1..=6 {
            let p = sample_params(100 + n as u64, n).unwrap();
            let f = build_A_factors(&p, Order::Ldu).unwrap();
            let g = build_A_factors(&p, Order::Udl).unwrap();
            let a = f.product();
            let sc = super::super::max_scale(&f.term_scale(), &g.term_scale());
            assert!(compare(&a, &g.product(), &sc).max_rel < 1e-10, "n={n}");
            let lt = build_intermediate(&p, Intermediate::Ltilde).unwrap();
            let ut = build_intermediate(&p, Intermediate::Utilde).unwrap();
            let sc2 = super::super::max_scale(&f.term_scale(), &term_scale(&[&lt, &ut]));
            assert!(compare(&a, &(&lt * &ut), &sc2).max_rel < 1e-10, "n={n}");
            let up = build_intermediate(&p, Intermediate::UtildePrimeApp).unwrap();
            let lp = build_intermediate(&p, Intermediate::LtildePrimeApp).unwrap();
            let sc3 = super::super::max_scale(&f.term_scale(), &term_scale(&[&up, &lp]));
            assert!(compare(&a, &(&up * &lp), &sc3).max_rel < 1e-10, "n={n}");
            let id = CMatrix::identity(n + 1);
            for (m, inv) in [
                (
                    f.upper.clone(),
                    build_intermediate(&p, Intermediate::UAinv).unwrap(),
                ),
                (
                    g.lower.clone(),
                    build_intermediate(&p, Intermediate::LprimeAinv).unwrap(),
                ),
                (
                    ut.clone(),
                    build_intermediate(&p, Intermediate::Vtilde).unwrap(),
                ),
            ] {
                let r = compare(&(&m * &inv), &id, &term_scale(&[&m, &inv]));
                assert!(r.max_rel < 1e-10, "n={n} {r:?}");
            }
        }
    }

    #[test]
    fn r_routes() {
        for n in 1..=6 {
            let p = sample_params(120 + n as u64, n).unwrap();
            let f = build_R_factors(&p, Order::Ldu).unwrap();
            let r = f.product();
            for (x, y) in [
                (Intermediate::LtildeR, Intermediate::UtildeR),
                (Intermediate::UtildePrimeR, Intermediate::LtildePrimeR),
            ] {
                let a = build_intermediate(&p, x).unwrap();
                let b = build_intermediate(&p, y).unwrap();
                let sc = super::super::max_scale(&f.term_scale(), &term_scale(&[&a, &b]));
                let res = compare(&r, &(&a * &b), &sc);
                assert!(res.max_rel < 1e-10, "n={n} {x} {res:?}");
            }
        }
    }

    #[test]
    fn n_zero_is_one_by_one() {
        let p = sample_params(7, 0).unwrap();
        let f = build_R_factors(&p, Order::Ldu).unwrap();
        assert_eq!(f.lower.dim(), 1);
        assert!(rel(det_formula(&p, DetKind::R).unwrap(), f.diag[(0, 0)]) < 1e-14);
    }

    #[test]
    fn non_generic_rejected() {
        let mut p = sample_params(3, 3).unwrap();
        p.a2 = p.a1;
        assert!(matches!(
            build_R_factors(&p, Order::Ldu),
            Err(Error::NonGeneric { .. })
        ));
        assert!(matches!(build_K(&p, 1), Err(Error::NonGeneric { .. })));
        assert!(matches!(
            build_K(&sample_params(3, 3).unwrap(), 3),
            Err(Error::IndexOutOfRange(_))
        ));
    }
}
