//! Truncated Jackson integrals over the lattice `ξ q^ν`, `ν ∈ [-N, N]^n`.
//!
//! All sums are taken in the gauge `Φ(ξ) = 1`: the weight at `ξ q^ν` is the
//! ratio `Φ(ξ q^ν) / Φ(ξ)`, which is a finite product of rational factors
//! and needs no branch of `z^α`. Absolute values therefore depend on the
//! gauge; ratios and linear relations among brackets with a common `ξ` do not.

mod nabla;
mod weight;

pub use nabla::{
    fg_eval, fg_eval_bounded, nabla_expansion, nabla_integrand, nabla_skew, phi_ki,
    special_point_claims, Expansion, ExpansionCase, FgClaim, FgKind, NablaFamily, SpecialSide,
};
pub use weight::{weight_ratio, WeightTable};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::interp::{eval_times_delta, EvalOptions, EvalPoint, PolySpec};
use crate::qcore::{one, powi, Accumulator, Error, Params, Precision, Result};

/// Lattice radius used when none is given.
pub fn default_radius(n: usize) -> usize {
    match n {
        0 | 1 => 60,
        2 => 40,
        _ => 24,
    }
}

/// Truncation of the bilateral sum to the box `[-N, N]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    #[serde(rename = "N")]
    pub radius: usize,
    /// Largest allowed ratio of the outer shell to the accumulated magnitude.
    pub tail_tol: f64,
    pub precision_bits: u32,
    pub deterministic: bool,
}

impl TruncationSpec {
    pub fn for_n(n: usize) -> Self {
        TruncationSpec {
            radius: default_radius(n),
            tail_tol: 1e-10,
            precision_bits: 53,
            deterministic: true,
        }
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = radius;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius < 1 {
            return Err(Error::Invalid("lattice radius must be at least 1".into()));
        }
        if self.tail_tol.is_nan() || self.tail_tol <= 0.0 {
            return Err(Error::Invalid("tail_tol must be positive".into()));
        }
        Precision::from_bits(self.precision_bits)?;
        Ok(())
    }

    fn precision(&self) -> Result<Precision> {
        Precision::from_bits(self.precision_bits)
    }
}

/// A bracket `⟨φ, ξ⟩` together with the parameter shifts applied to it.
///
/// `params` are the parameters of the unshifted weight. The polynomial is
/// evaluated at the shifted parameters, while the weight stays put and the
/// shift is carried by a rational multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketSpec {
    pub poly: PolySpec,
    pub xi: EvalPoint,
    pub params: Params,
    #[serde(default)]
    pub alpha_shift: u32,
    #[serde(default)]
    pub ab_shift: [u32; 2],
}

impl BracketSpec {
    pub fn new(poly: PolySpec, xi: EvalPoint, params: Params) -> Self {
        BracketSpec {
            poly,
            xi,
            params,
            alpha_shift: 0,
            ab_shift: [0, 0],
        }
    }

    /// Parameters after all recorded shifts.
    pub fn effective_params(&self) -> Params {
        self.params
            .shift_alpha(self.alpha_shift as i64)
            .shift_ab(1, self.ab_shift[0] as i64)
            .shift_ab(2, self.ab_shift[1] as i64)
    }

    /// Product of the shift multipliers at `z`.
    pub fn multiplier(&self, z: &[C64]) -> Result<C64> {
        let p = &self.params;
        let mut m: C64 = powi(z.iter().product(), self.alpha_shift as i64);
        for (r, (a, b)) in [(p.a1, p.b1), (p.a2, p.b2)].into_iter().enumerate() {
            for s in 0..self.ab_shift[r] as i64 {
                let qs = powi(p.q, -s);
                for zi in z {
                    let den = one() - b * qs / p.q * zi;
                    if den.norm() <= 8.0 * f64::EPSILON * (b * qs / p.q * zi).norm().max(1.0) {
                        return Err(Error::PoleHit(format!(
                            "shift multiplier for pair {} at z = {zi}",
                            r + 1
                        )));
                    }
                    m *= (one() - qs / a * zi) / den;
                }
            }
        }
        Ok(m)
    }
}

/// Value of a truncated sum with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketResult {
    pub value: C64,
    #[serde(rename = "N")]
    pub radius: usize,
    pub shells_used: usize,
    /// Magnitude of the outermost shell, `(1-q)^n Σ_{|ν|∞ = N} |w f|`.
    pub tail_estimate: f64,
    /// `(1-q)^n Σ |w f|` over the whole box.
    pub abs_sum: f64,
    pub gauge: Gauge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    #[serde(rename = "phi_at_xi_normalized")]
    PhiAtXiNormalized,
}

/// Why the parameters fall outside the convergence region, if they do.
pub fn convergence_violation(p: &Params) -> Option<String> {
    let lower = (p.q / (p.a1 * p.a2 * p.b1 * p.b2)).norm();
    let qa = p.qalpha.norm();
    let qat = (p.qalpha * powi(p.t, 2 * (p.n as i64 - 1))).norm();
    if !(lower < qa && qa < 1.0) {
        return Some(format!(
            "need |q/(a1 a2 b1 b2)| < |qalpha| < 1, got {lower:.4} and {qa:.4}"
        ));
    }
    if !(lower < qat && qat < 1.0) {
        return Some(format!(
            "need |q/(a1 a2 b1 b2)| < |qalpha t^(2n-2)| < 1, got {lower:.4} and {qat:.4}"
        ));
    }
    None
}

pub fn check_convergence(p: &Params) -> bool {
    convergence_violation(p).is_none()
}

fn ensure_convergent(p: &Params) -> Result<()> {
    match convergence_violation(p) {
        Some(msg) => Err(Error::ConditionViolated(msg)),
        None => Ok(()),
    }
}

#[allow(non_snake_case)]
/// `T_α`: one more factor `z_1⋯z_n`, and `qalpha -> q qalpha`.
pub fn apply_T_alpha(spec: &BracketSpec) -> BracketSpec {
    let mut s = spec.clone();
    s.alpha_shift += 1;
    s
}

#[allow(non_snake_case)]
/// `T_{q,b_r}^{-1} T_{q,a_r}` for `r ∈ {1, 2}`.
pub fn apply_T_ab(spec: &BracketSpec, r: usize) -> Result<BracketSpec> {
    if !(r == 1 || r == 2) {
        return Err(Error::IndexOutOfRange(format!("pair index r = {r}")));
    }
    let mut s = spec.clone();
    s.ab_shift[r - 1] += 1;
    Ok(s)
}

/// Base point `ξ_k = ρ_k e^{iθ_k} t^k` with `ρ_k` log-uniform in `[0.5, 1.5]`.
pub fn default_xi(p: &Params, seed: u64) -> EvalPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..p.n)
        .map(|k| {
            let rho = rng.gen_range(0.5f64.ln()..1.5f64.ln()).exp();
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            C64::from_polar(rho, th) * powi(p.t, k as i64)
        })
        .collect();
    EvalPoint::new(coords)
}

/// Points `ν` with `max |ν_i| = s`, in lexicographic order.
fn shell(n: usize, s: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut nu = vec![-s; n];
    loop {
        if nu.iter().any(|v| v.abs() == s) || n == 0 {
            out.push(nu.clone());
        }
        let mut d = 0;
        loop {
            if d == n {
                return out;
            }
            if nu[d] < s {
                nu[d] += 1;
                break;
            }
            nu[d] = -s;
            d += 1;
        }
    }
}

/// `(1-q)^n Σ_ν w(ν) f(ξ q^ν)` over the box of radius `trunc.radius`.
///
/// Shells `max |ν_i| = s` are summed independently (in parallel) and then
/// added in increasing `s`, so the result does not depend on scheduling.
pub fn jackson_sum(
    p: &Params,
    xi: &EvalPoint,
    trunc: &TruncationSpec,
    f: &(dyn Fn(&[C64]) -> Result<C64> + Sync),
) -> Result<BracketResult> {
    trunc.validate()?;
    let prec = trunc.precision()?;
    let n = xi.n();
    if n != p.n {
        return Err(Error::Invalid(format!(
            "base point has {n} coordinates, parameters have n = {}",
            p.n
        )));
    }
    let big_n = trunc.radius as i64;
    let table = WeightTable::new(p, &xi.coords, trunc.radius)?;
    let qpow: Vec<C64> = (-big_n..=big_n).map(|k| powi(p.q, k)).collect();
    let sum_shell = |s: i64| -> Result<(C64, f64)> {
        let mut acc = Accumulator::for_series(prec);
        let mut mag = 0.0;
        let mut z = vec![C64::new(0.0, 0.0); n];
        for nu in shell(n, s) {
            for i in 0..n {
                z[i] = xi.coords[i] * qpow[(nu[i] + big_n) as usize];
            }
            let w = table.weight(&nu);
            let v = w * f(&z)?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(format!("lattice term at ν = {nu:?}")));
            }
            acc.add(v);
            mag += v.norm();
        }
        Ok((acc.value(), mag))
    };
    let shells: Vec<(C64, f64)> = (0..=big_n)
        .into_par_iter()
        .map(sum_shell)
        .collect::<Result<_>>()?;
    let norm = powi(one() - p.q, n as i64);
    let mut acc = Accumulator::for_series(prec);
    let mut mag = 0.0;
    for (v, m) in &shells {
        acc.add(*v);
        mag += m;
    }
    let outer = shells.last().map(|s| s.1).unwrap_or(0.0);
    let res = BracketResult {
        value: acc.value() * norm,
        radius: trunc.radius,
        shells_used: shells.len(),
        tail_estimate: outer * norm.norm(),
        abs_sum: mag * norm.norm(),
        gauge: Gauge::PhiAtXiNormalized,
    };
    if res.tail_estimate > trunc.tail_tol * res.abs_sum {
        return Err(Error::NotConverged {
            tail: res.tail_estimate / res.abs_sum,
            bound: trunc.tail_tol,
        });
    }
    Ok(res)
}

/// `⟨φ, ξ⟩` with the shifts recorded in `spec`.
pub fn bracket(spec: &BracketSpec, trunc: &TruncationSpec) -> Result<BracketResult> {
    let eff = spec.effective_params();
    ensure_convergent(&eff)?;
    let opts = EvalOptions {
        precision: trunc.precision()?,
        ..Default::default()
    };
    let f = |z: &[C64]| -> Result<C64> {
        Ok(spec.multiplier(z)? * eval_times_delta(&spec.poly, &eff, z, &opts)?)
    };
    jackson_sum(&spec.params, &spec.xi, trunc, &f)
}

/// Lattice sum of an arbitrary integrand `g` (no `Δ` is added) at the
/// unshifted parameters.
pub fn integrate(
    p: &Params,
    xi: &EvalPoint,
    trunc: &TruncationSpec,
    g: &(dyn Fn(&[C64]) -> Result<C64> + Sync),
) -> Result<BracketResult> {
    ensure_convergent(p)?;
    jackson_sum(p, xi, trunc, g)
}

#[cfg(test)]
mod tests;
