//! The lattice weight `Φ(ξ q^ν) / Φ(ξ)` for `Φ` with two parameter pairs.
//!
//! Per coordinate the ratio is `qalpha^ν ∏_r (b_r ξ;q)_ν / (q a_r^{-1} ξ;q)_ν`;
//! per pair `j < k`, with `d = ν_k - ν_j` and `w = ξ_k / ξ_j`, it is
//! `(t^2/q)^{ν_j} (t w;q)_d / (q t^{-1} w;q)_d`.

use num_complex::Complex64 as C64;

use crate::qcore::{one, powi, shifted_factorial_ratio, Error, Params, Result};

fn pole(e: Error) -> Error {
    match e {
        Error::DivisionByZero(m) => Error::PoleHit(m),
        other => other,
    }
}

/// The weight at `ξ q^ν`, from the shifted factorials directly.
pub fn weight_ratio(p: &Params, xi: &[C64], nu: &[i64]) -> Result<C64> {
    let n = xi.len();
    if nu.len() != n {
        return Err(Error::Invalid(
            "lattice point and base point differ in length".into(),
        ));
    }
    let mut w = one();
    for i in 0..n {
        w *= powi(p.qalpha, nu[i]);
        for (a, b) in [(p.a1, p.b1), (p.a2, p.b2)] {
            w *= shifted_factorial_ratio(b * xi[i], p.q / a * xi[i], p.q, nu[i]).map_err(pole)?;
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let d = nu[k] - nu[j];
            let w0 = xi[k] / xi[j];
            w *= powi(p.t * p.t / p.q, nu[j])
                * shifted_factorial_ratio(p.t * w0, p.q / p.t * w0, p.q, d).map_err(pole)?;
        }
    }
    Ok(w)
}

fn checked(num: C64, den: C64, what: &str) -> Result<C64> {
    if den.norm() <= 8.0 * f64::EPSILON * (one() - den).norm().max(1.0) {
        return Err(Error::PoleHit(what.to_string()));
    }
    Ok(num / den)
}

/// Values `(x;q)_m / (y;q)_m` for `m ∈ [-len, len]`, built by one factor per step.
fn ratio_chain(x: C64, y: C64, q: C64, len: i64, what: &str) -> Result<Vec<C64>> {
    let mut out = vec![one(); (2 * len + 1) as usize];
    let mid = len as usize;
    let mut qm = one();
    for m in 0..len as usize {
        // (x;q)_{m+1}/(y;q)_{m+1} = prev · (1 - q^m x)/(1 - q^m y)
        out[mid + m + 1] = out[mid + m] * checked(one() - qm * x, one() - qm * y, what)?;
        qm *= q;
    }
    let qinv = q.inv();
    let mut qm = qinv;
    for m in 0..len as usize {
        // (x;q)_{-m-1}/(y;q)_{-m-1} = prev · (1 - q^{-m-1} y)/(1 - q^{-m-1} x)
        out[mid - m - 1] = out[mid - m] * checked(one() - qm * y, one() - qm * x, what)?;
        qm *= qinv;
    }
    Ok(out)
}

/// Precomputed per-coordinate and per-pair factors for a fixed `ξ` and radius.
#[derive(Debug, Clone)]
pub struct WeightTable {
    radius: i64,
    coord: Vec<Vec<C64>>,
    pair: Vec<Vec<C64>>,
    pair_power: Vec<C64>,
    n: usize,
}

impl WeightTable {
    pub fn new(p: &Params, xi: &[C64], radius: usize) -> Result<Self> {
        let n = xi.len();
        let r = radius as i64;
        let mut coord = Vec::with_capacity(n);
        for (i, &x) in xi.iter().enumerate() {
            let what = format!("coordinate {} factor on the lattice", i + 1);
            let c1 = ratio_chain(p.b1 * x, p.q / p.a1 * x, p.q, r, &what)?;
            let c2 = ratio_chain(p.b2 * x, p.q / p.a2 * x, p.q, r, &what)?;
            coord.push(
                (-r..=r)
                    .zip(c1.iter().zip(&c2))
                    .map(|(v, (u1, u2))| powi(p.qalpha, v) * u1 * u2)
                    .collect(),
            );
        }
        let mut pair = Vec::new();
        for j in 0..n {
            for k in (j + 1)..n {
                let w0 = xi[k] / xi[j];
                let what = format!("pair ({}, {}) factor on the lattice", j + 1, k + 1);
                pair.push(ratio_chain(p.t * w0, p.q / p.t * w0, p.q, 2 * r, &what)?);
            }
        }
        let tq = p.t * p.t / p.q;
        let pair_power = (-r..=r).map(|v| powi(tq, v)).collect();
        Ok(WeightTable {
            radius: r,
            coord,
            pair,
            pair_power,
            n,
        })
    }

    /// The weight at `ξ q^ν` for `ν` inside the box.
    pub fn weight(&self, nu: &[i64]) -> C64 {
        let r = self.radius;
        let mut w = one();
        for (i, &v) in nu.iter().enumerate() {
            w *= self.coord[i][(v + r) as usize];
        }
        let mut idx = 0;
        for j in 0..self.n {
            for k in (j + 1)..self.n {
                let d = nu[k] - nu[j];
                w *= self.pair_power[(nu[j] + r) as usize] * self.pair[idx][(d + 2 * r) as usize];
                idx += 1;
            }
        }
        w
    }
}
