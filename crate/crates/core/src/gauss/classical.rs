//! The `q -> 1` coefficient matrix `M` of the Selberg-type integrals with
//! kernel `∏ z^{α-1} (1-z)^{β-1} (x-z)^{γ-1} ∏ |z_j - z_k|^{2τ}`.
#![allow(non_snake_case)]

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::binomial;

use super::{CMatrix, GaussFactorization, Order};
use crate::qcore::{one, powi, sign, zero, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalParams {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub tau: C64,
    pub x: C64,
    pub n: usize,
}

/// Rising product `x (x+τ) ⋯ (x+(i-1)τ)`.
pub(crate) fn pochhammer(x: C64, tau: C64, i: i64) -> C64 {
    (0..i).map(|k| x + tau * k as f64).product()
}

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        0.0
    } else {
        binomial(n as u64, k as u64)
    }
}

impl ClassicalParams {
    /// A Pochhammer symbol that must not vanish.
    fn den(&self, x: C64, i: i64, what: &str) -> Result<C64> {
        let mut p = one();
        for k in 0..i {
            let f = x + self.tau * k as f64;
            let sc = x.norm().max(self.tau.norm() * k as f64).max(1.0);
            if f.norm() < 1e-12 * sc {
                return Err(Error::Degenerate(format!("factor {k} of {what} vanishes")));
            }
            p *= f;
        }
        Ok(p)
    }

    fn poch(&self, x: C64, i: i64) -> C64 {
        pochhammer(x, self.tau, i)
    }
}

/// `M` as `L D U` or `U' D' L'`.
pub fn build_classical_M(cp: &ClassicalParams, order: Order) -> Result<GaussFactorization> {
    let n = cp.n as i64;
    let dim = cp.n + 1;
    let (a, b, g, tau, x) = (cp.alpha, cp.beta, cp.gamma, cp.tau, cp.x);
    let tj = |j: i64| tau * j as f64;
    if x == zero() {
        return Err(Error::Degenerate("x = 0".into()));
    }
    let mut lower = CMatrix::identity(dim);
    let mut upper = CMatrix::identity(dim);
    let mut diag = vec![zero(); dim];
    match order {
        Order::Ldu => {
            for i in 0..=n {
                for j in 0..i {
                    lower[(i as usize, j as usize)] =
                        powi(-x, i - j) * binom(n - j, n - i) * cp.poch(g + tj(j), i - j)
                            / cp.den(a + g + tj(2 * j), i - j, "(α+γ+2jτ;τ)_{i-j}")?;
                }
                for j in (i + 1)..=n {
                    upper[(i as usize, j as usize)] =
                        sign(j - i) * binom(j, i) * cp.poch(b + tj(n - j), j - i)
                            / cp.den(a + g + tj(2 * i), j - i, "(α+γ+2iτ;τ)_{j-i}")?;
                }
            }
            for j in 0..=n {
                diag[j as usize] = powi(x, j) * cp.poch(a, j) * cp.poch(a + g + tj(2 * j), n - j)
                    / (cp.den(a + g + tj(j - 1), j, "(α+γ+(j-1)τ;τ)_j")?
                        * cp.den(a + b + g + tj(n + j - 1), n - j, "(α+β+γ+(n+j-1)τ;τ)_{n-j}")?);
            }
        }
        Order::Udl => {
            for i in 0..=n {
                for j in (i + 1)..=n {
                    upper[(i as usize, j as usize)] =
                        powi(-x.inv(), j - i) * binom(j, i) * cp.poch(b + tj(n - j), j - i)
                            / cp.den(a + b + tj(2 * (n - j)), j - i, "(α+β+2(n-j)τ;τ)_{j-i}")?;
                }
                for j in 0..i {
                    lower[(i as usize, j as usize)] =
                        sign(i - j) * binom(n - j, n - i) * cp.poch(g + tj(j), i - j)
                            / cp.den(a + b + tj(2 * (n - i)), i - j, "(α+β+2(n-i)τ;τ)_{i-j}")?;
                }
            }
            for j in 0..=n {
                diag[j as usize] =
                    powi(x, j) * cp.poch(a + b + tj(2 * (n - j)), j) * cp.poch(a, n - j)
                        / (cp.den(a + b + g + tj(2 * n - j - 1), j, "(α+β+γ+(2n-j-1)τ;τ)_j")?
                            * cp.den(a + b + tj(n - j - 1), n - j, "(α+β+(n-j-1)τ;τ)_{n-j}")?);
            }
        }
    }
    Ok(GaussFactorization {
        order,
        lower,
        diag: CMatrix::diagonal(&diag),
        upper,
    })
}

/// For `n = 1`, `M` as a product of a 2×2 matrix and the inverse of another:
/// `Ldu` gives the lower-times-inverse-upper pair, `Udl` the upper-times-inverse-lower one.
pub fn classical_reference_n1(cp: &ClassicalParams, order: Order) -> Result<CMatrix> {
    if cp.n != 1 {
        return Err(Error::Invalid("the 2×2 reference form needs n = 1".into()));
    }
    let (a, b, g, x) = (cp.alpha, cp.beta, cp.gamma, cp.x);
    let (left, right) = match order {
        Order::Ldu => (
            [[a + g, zero()], [-x * g, x * a]],
            [[a + b + g, b], [zero(), a + g]],
        ),
        Order::Udl => (
            [[a, -b], [zero(), x * (a + b)]],
            [[a + b, zero()], [g, a + b + g]],
        ),
    };
    let left = CMatrix::from_fn(2, |i, j| left[i][j]);
    let right = CMatrix::from_fn(2, |i, j| right[i][j]);
    let inv = right
        .inverse()
        .map_err(|_| Error::Degenerate("singular 2×2 reference factor".into()))?;
    Ok(&left * &inv)
}

#[cfg(test)]
mod tests {
    use super::super::{compare, max_scale};
    use super::*;
    use crate::qcore::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_cp(seed: u64, n: usize) -> ClassicalParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = || c(rng.gen_range(0.3..2.5), 0.0);
        ClassicalParams {
            alpha: r(),
            beta: r(),
            gamma: r(),
            tau: r(),
            x: r() + 1.5,
            n,
        }
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(c(2.0, 0.0), c(1.0, 0.0), 0), one());
        assert_eq!(pochhammer(c(2.0, 0.0), c(1.0, 0.0), 3), c(24.0, 0.0));
        assert_eq!(pochhammer(c(1.0, 0.0), c(0.5, 0.0), 2), c(1.5, 0.0));
    }

    #[test]
    fn both_orders_agree() {
        for n in 1..=8 {
            for seed in 0..5 {
                let cp = random_cp(seed * 17 + n as u64, n);
                let f = build_classical_M(&cp, Order::Ldu).unwrap();
                let g = build_classical_M(&cp, Order::Udl).unwrap();
                assert!(f.is_well_formed() && g.is_well_formed());
                let r = compare(
                    &f.product(),
                    &g.product(),
                    &max_scale(&f.term_scale(), &g.term_scale()),
                );
                assert!(r.max_rel < 1e-10, "n={n} {r:?}");
            }
        }
    }

    #[test]
    fn n_one_reference_forms() {
        let cp = random_cp(3, 1);
        for order in [Order::Ldu, Order::Udl] {
            let m = build_classical_M(&cp, order).unwrap();
            let r = classical_reference_n1(&cp, order).unwrap();
            let res = compare(&m.product(), &r, &m.term_scale());
            assert!(res.max_rel < 1e-13, "{order} {res:?}");
        }
    }

    #[test]
    fn degenerate_rejected() {
        let mut cp = random_cp(4, 2);
        cp.gamma = -cp.alpha;
        assert!(matches!(
            build_classical_M(&cp, Order::Ldu),
            Err(Error::Degenerate(_))
        ));
    }
}
