//! Scalars and q-calculus primitives.
//!
//! Every formula in the crate is built from three primitives: the c-shifted
//! factorial `(x;c)_i`, the c-binomial coefficient and the truncated infinite
//! product `(x;c)_∞`.

mod accum;
mod generic;
mod params;

pub use accum::{Accumulator, NeumaierSum, Precision, TwoSumAcc};
pub use generic::{
    check_generic, denominator_factors, ensure_generic, DenominatorFactor, GenericityVerdict,
};
pub use params::{sample_params, ParamSampler, Params};

use num_complex::Complex64 as C64;

/// Relative threshold below which a denominator factor counts as vanishing.
pub const GENERIC_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("infinite product does not converge: |c| = {0} >= 1")]
    NonConvergent(f64),
    #[error("non-generic parameters: factor {factor} has |value| = {min_abs:.3e}")]
    NonGeneric { factor: String, min_abs: f64 },
    #[error("skew-symmetrization over S_{n} exceeds the factorial cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("near-coincident coordinates: minimum gap {gap:.3e} below tolerance {tol:.3e}")]
    NearCoincident { gap: f64, tol: f64 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("no closed form for this polynomial/point pair: {0}")]
    Unsupported(String),
    #[error("lattice sum not converged: outer shell {tail:.3e} exceeds {bound:.3e}")]
    NotConverged { tail: f64, bound: f64 },
    #[error("convergence condition violated: {0}")]
    ConditionViolated(String),
    #[error("lattice pole hit: {0}")]
    PoleHit(String),
    #[error("degenerate classical parameters: {0}")]
    Degenerate(String),
    #[error("hypergeometric series diverged: {0}")]
    SeriesDiverged(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn one() -> C64 {
    C64::new(1.0, 0.0)
}

#[inline]
pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn ensure_finite(z: C64, what: &str) -> Result<C64> {
    if is_finite(z) {
        Ok(z)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Integer power by repeated squaring; negative exponents invert.
pub fn powi(x: C64, k: i64) -> C64 {
    if k >= 0 {
        x.powu(k as u32)
    } else {
        x.powu((-k) as u32).inv()
    }
}

/// Binomial coefficient `m choose 2` extended to all integers, `m(m-1)/2`.
#[inline]
pub fn choose2(m: i64) -> i64 {
    m * (m - 1) / 2
}

/// Binomial coefficient `m choose 3` for `m >= 0`.
#[inline]
pub fn choose3(m: i64) -> i64 {
    m * (m - 1) * (m - 2) / 6
}

/// `(-1)^k` as a complex scalar.
#[inline]
pub fn sign(k: i64) -> C64 {
    if k.rem_euclid(2) == 0 {
        one()
    } else {
        -one()
    }
}

pub(crate) fn vanishes(factor: C64, scale: f64) -> bool {
    factor.norm() <= 8.0 * f64::EPSILON * scale.max(1.0)
}

/// The c-shifted factorial `(x;c)_i`.
///
/// For `i > 0` this is `∏_{k=0}^{i-1} (1 - c^k x)`, for `i = 0` it is 1 and
/// for `i < 0` it is `1 / ∏_{k=1}^{-i} (1 - c^{-k} x)`.
pub fn shifted_factorial(x: C64, c: C64, i: i64) -> Result<C64> {
    if c == zero() {
        return Err(Error::DivisionByZero("shifted factorial with c = 0".into()));
    }
    if i >= 0 {
        let mut p = one();
        let mut ck = one();
        for _ in 0..i {
            p *= one() - ck * x;
            ck *= c;
        }
        return Ok(p);
    }
    let cinv = c.inv();
    let mut p = one();
    let mut ck = cinv;
    for k in 1..=(-i) {
        let y = ck * x;
        let f = one() - y;
        if vanishes(f, y.norm()) {
            return Err(Error::DivisionByZero(format!(
                "factor (1 - c^-{k} x) of a negative-index shifted factorial"
            )));
        }
        p *= f;
        ck *= cinv;
    }
    Ok(p.inv())
}

/// Ratio `(x;c)_i / (y;c)_i` evaluated factor by factor, which keeps long
/// negative-index chains in range where the separate products would overflow.
pub fn shifted_factorial_ratio(x: C64, y: C64, c: C64, i: i64) -> Result<C64> {
    let mut r = one();
    if i >= 0 {
        let mut ck = one();
        for k in 0..i {
            let den = one() - ck * y;
            if vanishes(den, (ck * y).norm()) {
                return Err(Error::DivisionByZero(format!(
                    "factor (1 - c^{k} y) in a ratio"
                )));
            }
            r *= (one() - ck * x) / den;
            ck *= c;
        }
    } else {
        let cinv = c.inv();
        let mut ck = cinv;
        for k in 1..=(-i) {
            let den = one() - ck * x;
            if vanishes(den, (ck * x).norm()) {
                return Err(Error::DivisionByZero(format!(
                    "factor (1 - c^-{k} x) in a ratio"
                )));
            }
            r *= (one() - ck * y) / den;
            ck *= cinv;
        }
    }
    Ok(r)
}

/// The c-binomial coefficient `(c;c)_i / ((c;c)_{i-j} (c;c)_j)`, zero outside
/// `0 <= j <= i` so that triangular entry formulas truncate themselves.
pub fn qbinom(i: i64, j: i64, c: C64) -> Result<C64> {
    if j < 0 || j > i {
        return Ok(zero());
    }
    let j = j.min(i - j);
    let mut r = one();
    for k in 1..=j {
        let den = one() - powi(c, k);
        if vanishes(den, 1.0) {
            return Err(Error::DivisionByZero(format!(
                "c-binomial denominator (1 - c^{k}) vanishes"
            )));
        }
        r *= (one() - powi(c, i - j + k)) / den;
    }
    Ok(r)
}

/// Result of a truncated infinite product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteProduct {
    pub value: C64,
    /// Number of factors multiplied.
    pub factors: usize,
    /// Bound on `|(c^{M+1} x; c)_∞ - 1|`, the relative effect of the dropped tail.
    pub tail_bound: f64,
}

/// `(x;c)_∞` truncated after the first index `M` with `|c^M x| < tail_tol`.
pub fn infinite_product(x: C64, c: C64, tail_tol: f64) -> Result<InfiniteProduct> {
    let cn = c.norm();
    if cn >= 1.0 {
        return Err(Error::NonConvergent(cn));
    }
    let mut p = one();
    let mut term = x;
    let mut factors = 0usize;
    loop {
        p *= one() - term;
        factors += 1;
        if term.norm() < tail_tol {
            break;
        }
        term *= c;
        if factors > 100_000 {
            return Err(Error::NonConvergent(cn));
        }
    }
    // Σ_{i>M} |c^i x| <= |c^{M+1} x| / (1 - |c|), and |∏(1-u_i) - 1| <= exp(Σ|u_i|) - 1.
    let s = (term * c).norm() / (1.0 - cn);
    Ok(InfiniteProduct {
        value: p,
        factors,
        tail_bound: s.exp_m1(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn shifted_factorial_small_cases() {
        let x = c(0.7, 0.0);
        let q = c(0.3, 0.0);
        assert_eq!(shifted_factorial(x, q, 0).unwrap(), one());
        assert!(close(
            shifted_factorial(x, q, 1).unwrap(),
            c(0.3, 0.0),
            1e-15
        ));
        let brute = (1.0 - 0.7) * (1.0 - 0.3 * 0.7) * (1.0 - 0.09 * 0.7);
        assert!(close(
            shifted_factorial(x, q, 3).unwrap(),
            c(brute, 0.0),
            1e-14
        ));
        let back = shifted_factorial(x, q, -1).unwrap() * (one() - x / q);
        assert!(close(back, one(), 1e-15));
    }

    #[test]
    fn negative_index_pole_is_reported() {
        let q = c(0.5, 0.0);
        let err = shifted_factorial(q * q, q, -3).unwrap_err();
        assert!(matches!(err, Error::DivisionByZero(_)));
    }

    #[test]
    fn shifted_factorial_splits() {
        let x = c(0.4, -1.1);
        let q = c(-0.6, 0.5);
        for i in -4..5 {
            for j in -4..5 {
                let lhs = shifted_factorial(x, q, i + j).unwrap();
                let rhs = shifted_factorial(x, q, i).unwrap()
                    * shifted_factorial(powi(q, i) * x, q, j).unwrap();
                assert!(close(lhs, rhs, 1e-12), "i={i} j={j}");
            }
        }
    }

    #[test]
    fn ratio_matches_quotient() {
        let x = c(0.3, 0.2);
        let y = c(-0.8, 0.1);
        let q = c(0.45, 0.0);
        for i in -6..7 {
            let r = shifted_factorial_ratio(x, y, q, i).unwrap();
            let d = shifted_factorial(x, q, i).unwrap() / shifted_factorial(y, q, i).unwrap();
            assert!(close(r, d, 1e-13), "i={i}");
        }
    }

    #[test]
    fn qbinom_values() {
        let q = c(0.4, 0.0);
        assert!(close(qbinom(3, 1, q).unwrap(), c(1.56, 0.0), 1e-15));
        assert_eq!(qbinom(5, 0, q).unwrap(), one());
        assert_eq!(qbinom(3, 4, q).unwrap(), zero());
        assert_eq!(qbinom(3, -1, q).unwrap(), zero());
        let z = c(0.3, 0.9);
        for i in 0..7 {
            for j in 0..=i {
                assert!(close(
                    qbinom(i, j, z).unwrap(),
                    qbinom(i, i - j, z).unwrap(),
                    1e-13
                ));
            }
        }
    }

    #[test]
    fn qbinom_pascal() {
        let z = c(-0.7, 0.4);
        for i in 1..8 {
            for j in 0..=i {
                let lhs = qbinom(i, j, z).unwrap();
                let rhs =
                    qbinom(i - 1, j - 1, z).unwrap() + powi(z, j) * qbinom(i - 1, j, z).unwrap();
                assert!(close(lhs, rhs, 1e-12), "i={i} j={j}");
            }
        }
    }

    #[test]
    fn root_of_unity_is_degenerate() {
        let w = C64::new(0.0, 1.0);
        assert!(qbinom(8, 4, w).is_err());
    }

    #[test]
    fn infinite_product_checks() {
        let half = c(0.5, 0.0);
        assert_eq!(infinite_product(zero(), half, 1e-16).unwrap().value, one());
        let long = shifted_factorial(half, half, 60).unwrap();
        let p = infinite_product(half, half, 1e-16).unwrap();
        assert!(close(p.value, long, 1e-15));
        let x = c(0.8, -0.3);
        let q = c(0.2, 0.6);
        let lhs = infinite_product(x, q, 1e-16).unwrap().value;
        let rhs = (one() - x) * infinite_product(q * x, q, 1e-16).unwrap().value;
        assert!(close(lhs, rhs, 1e-14));
        assert!(matches!(
            infinite_product(x, c(1.0, 0.0), 1e-12),
            Err(Error::NonConvergent(_))
        ));
    }

    #[test]
    fn infinite_product_tail_tolerance_is_stable() {
        let x = c(1.7, 0.9);
        let q = c(0.0, 0.9);
        let a = infinite_product(x, q, 1e-12).unwrap();
        let b = infinite_product(x, q, 1e-16).unwrap();
        assert!(close(a.value, b.value, 1e-11));
        assert!(a.tail_bound < 1e-10);
    }
}
