//! Evaluation of the symmetric polynomial families at points of `(C*)^n`.

mod closed;
mod points;
mod poly;

pub use closed::{
    closed_form, closed_form_with, leading_coefficient, matsuo_constant,
    measured_leading_coefficient, ConstantForm,
};
pub use points::{materialize, PointArg, PointKind, SpecialPoint};
pub(crate) use poly::e_product;
pub use poly::{
    big_e, big_e_prime, etilde, etilde_prime, eval_poly, eval_poly_with, eval_times_delta,
    lagrange_f, lagrange_subset, Base, Evaluated, Family, PolySpec, Slot,
};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::qcore::{one, Accumulator, Error, Precision, Result};

/// Default factorial cap for skew-symmetrization.
pub const FACTORIAL_CAP: usize = 8;
/// Relative tolerance on the minimum pairwise gap for Δ-divided evaluations.
pub const GAP_TOL: f64 = 1e-8;

/// A point `z = (z_1, …, z_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub coords: Vec<C64>,
}

impl EvalPoint {
    pub fn new(coords: Vec<C64>) -> Self {
        EvalPoint { coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Minimum `|z_i - z_j|` over pairs, with the largest `|z_i|` as scale.
    pub fn min_gap(&self) -> (f64, f64) {
        let scale = self.coords.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut gap = f64::INFINITY;
        for i in 0..self.coords.len() {
            for j in (i + 1)..self.coords.len() {
                gap = gap.min((self.coords[i] - self.coords[j]).norm());
            }
        }
        (gap, scale)
    }

    pub fn check_distinct(&self) -> Result<()> {
        let (gap, scale) = self.min_gap();
        let tol = GAP_TOL * scale;
        if gap < tol {
            return Err(Error::NearCoincident { gap, tol });
        }
        Ok(())
    }

    pub fn check_nonzero(&self) -> Result<()> {
        if self.coords.iter().any(|z| z.norm() == 0.0) {
            return Err(Error::Invalid("coordinates must be nonzero".into()));
        }
        Ok(())
    }
}

impl From<Vec<C64>> for EvalPoint {
    fn from(v: Vec<C64>) -> Self {
        EvalPoint::new(v)
    }
}

/// How `f_r` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LagrangeMethod {
    #[default]
    Recurrence,
    SubsetSum,
}

/// Evaluation controls.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Largest `n` allowed in skew-symmetrization.
    pub cap: usize,
    pub precision: Precision,
    pub lagrange: LagrangeMethod,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            cap: FACTORIAL_CAP,
            precision: Precision::Double,
            lagrange: LagrangeMethod::Recurrence,
        }
    }
}

/// `Δ(z) = ∏_{i<j} (z_i - z_j)`.
pub fn delta(z: &[C64]) -> C64 {
    let mut p = one();
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            p *= z[i] - z[j];
        }
    }
    p
}

/// `Δ(t;z) = ∏_{i<j} (z_i - t^{-1} z_j)`.
pub fn delta_t(z: &[C64], t: C64) -> C64 {
    let tinv = t.inv();
    let mut p = one();
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            p *= z[i] - tinv * z[j];
        }
    }
    p
}

/// Alternating sum with the magnitude of its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewSum {
    pub value: C64,
    /// `Σ_σ |f(σ z)|`, the natural scale for cancellation.
    pub abs_sum: f64,
}

/// `Σ_{σ∈S_n} sgn(σ) f(z_{σ(1)}, …, z_{σ(n)})`.
///
/// Permutations are generated by Heap's algorithm; each step is one
/// transposition so the sign alternates. The visiting order is fixed, which
/// keeps the result reproducible.
pub fn skew_symmetrize<F>(f: F, z: &[C64], opts: &EvalOptions) -> Result<SkewSum>
where
    F: Fn(&[C64]) -> C64,
{
    skew_symmetrize_bounded(
        |w| {
            let v = f(w);
            (v, v.norm())
        },
        z,
        opts,
    )
}

/// As [`skew_symmetrize`], for an `f` that also returns a magnitude bound
/// for its own rounding (for a product, the product of the factor
/// magnitudes). `abs_sum` then accumulates the bounds.
pub fn skew_symmetrize_bounded<F>(f: F, z: &[C64], opts: &EvalOptions) -> Result<SkewSum>
where
    F: Fn(&[C64]) -> (C64, f64),
{
    let n = z.len();
    if n > opts.cap {
        return Err(Error::CapExceeded { n, cap: opts.cap });
    }
    let mut w = z.to_vec();
    let mut acc = Accumulator::for_products(opts.precision);
    let mut abs_sum = 0.0;
    let mut sgn = 1.0;
    let mut visit = |w: &[C64], sgn: f64| {
        let (v, bound) = f(w);
        abs_sum += bound;
        acc.add(v * sgn);
    };
    visit(&w, sgn);
    let mut cnt = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if cnt[i] < i {
            if i % 2 == 0 {
                w.swap(0, i);
            } else {
                w.swap(cnt[i], i);
            }
            sgn = -sgn;
            visit(&w, sgn);
            cnt[i] += 1;
            i = 1;
        } else {
            cnt[i] = 0;
            i += 1;
        }
    }
    Ok(SkewSum {
        value: acc.value(),
        abs_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::c;

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&[c(0.3, 0.1)]), one());
        assert_eq!(delta(&[c(2.0, 0.0), c(1.0, 0.0)]), one());
        assert_eq!(delta(&[c(3.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]), c(2.0, 0.0));
    }

    #[test]
    fn delta_t_examples() {
        let z = [c(2.0, 0.0), c(1.0, 0.0)];
        assert_eq!(delta_t(&z, c(0.5, 0.0)), c(0.0, 0.0));
        assert_eq!(delta_t(&z, one()), delta(&z));
        let w = [c(0.3, 1.0), c(-0.2, 0.5), c(1.1, -0.4)];
        assert!((delta_t(&w, one()) - delta(&w)).norm() < 1e-15);
        assert_eq!(delta_t(&w[..1], c(0.7, 0.2)), one());
    }

    #[test]
    fn skew_of_symmetric_is_zero() {
        let z = [c(0.3, 1.0), c(-0.2, 0.5), c(1.1, -0.4), c(0.9, 0.9)];
        let s = skew_symmetrize(
            |w| w.iter().product::<C64>() + w.iter().sum::<C64>(),
            &z,
            &EvalOptions::default(),
        )
        .unwrap();
        assert!(s.value.norm() < 1e-14 * s.abs_sum);
    }

    #[test]
    fn skew_of_delta_is_factorial_multiple() {
        let z = [c(0.3, 1.0), c(-0.2, 0.5), c(1.1, -0.4), c(0.9, 0.9)];
        let s = skew_symmetrize(delta, &z, &EvalOptions::default()).unwrap();
        assert!((s.value - delta(&z) * 24.0).norm() < 1e-13 * s.abs_sum);
    }

    #[test]
    fn skew_two_terms() {
        let z = [c(0.3, 1.0), c(-0.2, 0.5)];
        let s = skew_symmetrize(|w| w[0], &z, &EvalOptions::default()).unwrap();
        assert_eq!(s.value, z[0] - z[1]);
    }

    #[test]
    fn cap_is_enforced() {
        let z = vec![one(); 9];
        let err = skew_symmetrize(|_| one(), &z, &EvalOptions::default()).unwrap_err();
        assert_eq!(err, Error::CapExceeded { n: 9, cap: 8 });
    }

    #[test]
    fn all_permutations_visited() {
        let z: Vec<C64> = (0..5).map(|k| c(k as f64, 0.0)).collect();
        // f encodes the permutation; the alternating sum of a skew function is n! f(z).
        let s = skew_symmetrize(delta, &z, &EvalOptions::default()).unwrap();
        assert!((s.value - delta(&z) * 120.0).norm() < 1e-9);
    }
}
