//! Coefficients of the iterated three-term relations among the brackets of
//! `Ẽ_{k,i}(a1,b2)` and `Ẽ'_{k,i}(a1,b2)`.
//!
//! Each family moves `(k, i)` by one of two unit steps per application. The
//! closed forms give the coefficient after `l` applications with `j` steps of
//! the second kind; [`expand_by_steps`] recomputes them by applying the
//! single-step relation `l` times, which is the oracle used in tests.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::qcore::{choose2, one, powi, qbinom, shifted_factorial, sign, Error, Params, Result};

/// The expansion families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepFamily {
    /// `(k, i) -> (k-1, i)` or `(k-1, i+1)`, for `i + k <= n`.
    L,
    /// `(k, i) -> (k-1, i)` or `(k, i-1)`, for `i + k > n`.
    U,
    /// `(k, i) -> (k+1, i)` or `(k+1, i-1)`, for `i + k >= n`.
    V,
    /// Primed family: `(k, i) -> (k-1, i)` or `(k-1, i-1)`, for `k <= i`.
    #[serde(rename = "Uprime_app")]
    UprimeApp,
    /// Primed family: `(k, i) -> (k-1, i)` or `(k, i+1)`, for `k > i`.
    #[serde(rename = "Lprime_app")]
    LprimeApp,
}

impl StepFamily {
    pub const ALL: [StepFamily; 5] = [
        StepFamily::L,
        StepFamily::U,
        StepFamily::V,
        StepFamily::UprimeApp,
        StepFamily::LprimeApp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepFamily::L => "L",
            StepFamily::U => "U",
            StepFamily::V => "V",
            StepFamily::UprimeApp => "Uprime_app",
            StepFamily::LprimeApp => "Lprime_app",
        }
    }

    /// Whether the family expands `Ẽ'` rather than `Ẽ`.
    pub fn is_primed(self) -> bool {
        matches!(self, StepFamily::UprimeApp | StepFamily::LprimeApp)
    }

    /// Target index pair after `l` steps, `j` of them of the second kind.
    pub fn target(self, k: usize, i: usize, l: usize, j: usize) -> (usize, usize) {
        match self {
            StepFamily::L => (k - l, i + j),
            StepFamily::U => (k - l + j, i - j),
            StepFamily::V => (k + l, i - j),
            StepFamily::UprimeApp => (k - l, i - j),
            StepFamily::LprimeApp => (k - l + j, i + j),
        }
    }

    /// Whether `l` steps from `(k, i)` stay where the relation holds.
    pub fn in_domain(self, n: usize, k: usize, i: usize, l: usize) -> bool {
        if k > n || i > n {
            return false;
        }
        match self {
            StepFamily::L => i + k <= n && l <= k,
            StepFamily::U => k + i >= n && l <= k + i - n,
            StepFamily::V => k + i >= n && k + l <= n,
            StepFamily::UprimeApp => k <= i && l <= k,
            StepFamily::LprimeApp => k >= i && l <= k - i,
        }
    }
}

impl fmt::Display for StepFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StepFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StepFamily::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown expansion family {s:?}")))
    }
}

fn out_of_domain(fam: StepFamily, n: usize, k: usize, i: usize, l: usize) -> Error {
    Error::IndexOutOfRange(format!(
        "{fam} expansion of (k, i) = ({k}, {i}) by {l} steps with n = {n}"
    ))
}

/// Coefficient of the `j`-th target term after `l` steps; zero for `j > l`.
pub fn iterated_coeff(
    p: &Params,
    which: StepFamily,
    k: usize,
    i: usize,
    l: usize,
    j: usize,
) -> Result<C64> {
    let n0 = p.n;
    if !which.in_domain(n0, k, i, l) {
        return Err(out_of_domain(which, n0, k, i, l));
    }
    if j > l {
        return Ok(C64::new(0.0, 0.0));
    }
    let (n, k, i, l, j) = (n0 as i64, k as i64, i as i64, l as i64, j as i64);
    let (t, qa, a1, a2, b1, b2) = (p.t, p.qalpha, p.a1, p.a2, p.b1, p.b2);
    let tp = |m: i64| powi(t, m);
    let sf = |x: C64, m: i64| shifted_factorial(x, t, m);
    let ab = a1 * a2 * b1 * b2;
    let qb = qbinom(l, j, t)?;
    Ok(match which {
        StepFamily::L => {
            qb * sign(j)
                * powi(a1 * tp(n - i - k), l)
                * tp(choose2(l - j))
                * sf(a2 * b2 * tp(i), j)?
                * sf(qa * a2 * b2 * tp(n + i + j - k), l - j)?
                / sf(qa * ab * tp(2 * n - k - 1), l)?
        }
        StepFamily::U => {
            qb * powi(-qa / a1 * tp(i - l), j)
                * powi(a2 * tp(n - k), l)
                * tp(choose2(l))
                * sf(a1 * b1 * tp(n - i), j)?
                * sf(qa * tp(n - k), l - j)?
                / (sf(qa * a2 * b2 * tp(n + i - k - j - 1), l - j)?
                    * sf(qa * a2 * b2 * tp(n + i - k - 2 * j + l), j)?)
        }
        StepFamily::V => {
            qb * powi(qa / a1 * tp(i - 1), j)
                * tp(choose2(l - j) - choose2(j))
                * sf(a1 * b1 * tp(n - i), j)?
                * sf(qa * a2 * b2 * tp(n + i - k - l - 1), l - j)?
                / (powi(a2 * tp(n - k - 1), l - j) * sf(qa * tp(n - k - l), l)?)
        }
        StepFamily::UprimeApp => {
            powi(-qa * tp(n - k + l - 1), j)
                * powi(a2 * tp(k - l), l)
                * tp(choose2(l - j))
                * qb
                * sf(a1 * b1 * tp(n - i), j)?
                * sf(qa * a1 * b1 * tp(2 * n - k - i + j), l - j)?
                / sf(qa * ab * tp(2 * n - k - 1), l)?
        }
        StepFamily::LprimeApp => {
            qb * powi(-tp(-(k - 1)) / a2, j)
                * powi(a1 * tp(k - i - 1), l)
                * tp(-choose2(l))
                * sf(qa * tp(n - k), l - j)?
                * sf(a2 * b2 * tp(i), j)?
                / (sf(qa * a1 * b1 * tp(2 * n - k - i - j - 1), l - j)?
                    * sf(qa * a1 * b1 * tp(2 * n - k - i - 2 * j + l), j)?)
        }
    })
}

/// One application of the three-term relation: the two successor index pairs
/// (first kind, second kind) with their coefficients.
pub fn single_step(
    p: &Params,
    which: StepFamily,
    k: usize,
    i: usize,
) -> Result<[((usize, usize), C64); 2]> {
    let n0 = p.n;
    if !which.in_domain(n0, k, i, 1) {
        return Err(out_of_domain(which, n0, k, i, 1));
    }
    let (n, kk, ii) = (n0 as i64, k as i64, i as i64);
    let (t, qa, a1, a2, b1, b2) = (p.t, p.qalpha, p.a1, p.a2, p.b1, p.b2);
    let tp = |m: i64| powi(t, m);
    let ab = a1 * a2 * b1 * b2;
    let o = one();
    Ok(match which {
        StepFamily::L => {
            let pre = a1 * tp(n - ii - kk) / (o - qa * ab * tp(2 * n - kk - 1));
            [
                ((k - 1, i), pre * (o - qa * a2 * b2 * tp(n + ii - kk))),
                ((k - 1, i + 1), -pre * (o - a2 * b2 * tp(ii))),
            ]
        }
        StepFamily::U => {
            let pre = a2 / (o - qa * a2 * b2 * tp(n + ii - kk - 1));
            [
                ((k - 1, i), pre * tp(n - kk) * (o - qa * tp(n - kk))),
                (
                    (k, i - 1),
                    -pre * qa / a1 * tp(n + ii - kk - 1) * (o - a1 * b1 * tp(n - ii)),
                ),
            ]
        }
        StepFamily::V => {
            let pre = (tp(n - kk - 1) * (o - qa * tp(n - kk - 1))).inv();
            [
                (
                    (k + 1, i),
                    pre / a2 * (o - qa * a2 * b2 * tp(n + ii - kk - 2)),
                ),
                (
                    (k + 1, i - 1),
                    pre * qa / a1 * tp(n + ii - kk - 2) * (o - a1 * b1 * tp(n - ii)),
                ),
            ]
        }
        StepFamily::UprimeApp => {
            let pre = a2 / (o - qa * ab * tp(2 * n - kk - 1));
            [
                (
                    (k - 1, i),
                    pre * tp(kk - 1) * (o - qa * a1 * b1 * tp(2 * n - kk - ii)),
                ),
                (
                    (k - 1, i - 1),
                    -pre * qa * tp(n - 1) * (o - a1 * b1 * tp(n - ii)),
                ),
            ]
        }
        StepFamily::LprimeApp => {
            let pre = a1 / (o - qa * a1 * b1 * tp(2 * n - kk - ii - 1));
            [
                ((k - 1, i), pre * tp(kk - ii - 1) * (o - qa * tp(n - kk))),
                ((k, i + 1), -pre / a2 * tp(-ii) * (o - a2 * b2 * tp(ii))),
            ]
        }
    })
}

/// Apply [`single_step`] `l` times, merging equal index pairs. Returns the
/// coefficient of every reached pair.
pub fn expand_by_steps(
    p: &Params,
    which: StepFamily,
    k: usize,
    i: usize,
    l: usize,
) -> Result<BTreeMap<(usize, usize), C64>> {
    if !which.in_domain(p.n, k, i, l) {
        return Err(out_of_domain(which, p.n, k, i, l));
    }
    let mut cur = BTreeMap::from([((k, i), one())]);
    for _ in 0..l {
        let mut next = BTreeMap::new();
        for (&(kk, ii), &c) in &cur {
            for (pair, w) in single_step(p, which, kk, ii)? {
                *next.entry(pair).or_insert(C64::new(0.0, 0.0)) += c * w;
            }
        }
        cur = next;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{build_intermediate, Intermediate};
    use crate::qcore::sample_params;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() <= 1e-10 * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn zero_steps_give_one() {
        let p = sample_params(1, 4).unwrap();
        for fam in StepFamily::ALL {
            for k in 0..=4 {
                for i in 0..=4 {
                    if fam.in_domain(4, k, i, 0) {
                        assert_eq!(iterated_coeff(&p, fam, k, i, 0, 0).unwrap(), one());
                    }
                }
            }
        }
    }

    #[test]
    fn closed_forms_match_iterated_steps() {
        for n in 1..=5 {
            let p = sample_params(200 + n as u64, n).unwrap();
            for fam in StepFamily::ALL {
                for k in 0..=n {
                    for i in 0..=n {
                        for l in 0..=n {
                            if !fam.in_domain(n, k, i, l) {
                                continue;
                            }
                            let ex = expand_by_steps(&p, fam, k, i, l).unwrap();
                            assert_eq!(ex.len(), l + 1, "{fam} {k} {i} {l}");
                            for j in 0..=l {
                                let c = iterated_coeff(&p, fam, k, i, l, j).unwrap();
                                let e = ex[&fam.target(k, i, l, j)];
                                assert!(close(c, e), "{fam} n={n} k={k} i={i} l={l} j={j}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn full_expansions_are_intermediate_entries() {
        let n = 4;
        let p = sample_params(7, n).unwrap();
        let lt = build_intermediate(&p, Intermediate::Ltilde).unwrap();
        let ut = build_intermediate(&p, Intermediate::Utilde).unwrap();
        let vt = build_intermediate(&p, Intermediate::Vtilde).unwrap();
        let up = build_intermediate(&p, Intermediate::UtildePrimeApp).unwrap();
        let lp = build_intermediate(&p, Intermediate::LtildePrimeApp).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                if i >= j {
                    let c = iterated_coeff(&p, StepFamily::L, n - j, j, n - j, i - j).unwrap();
                    assert!(close(c, lt[(i, j)]), "L {i} {j}");
                    let c = iterated_coeff(&p, StepFamily::LprimeApp, n, j, n - j, i - j).unwrap();
                    assert!(close(c, lp[(i, j)]), "L' {i} {j}");
                }
                if i <= j {
                    let c = iterated_coeff(&p, StepFamily::U, n, j, j, j - i).unwrap();
                    assert!(close(c, ut[(i, j)]), "U {i} {j}");
                    let c = iterated_coeff(&p, StepFamily::V, n - j, j, j, j - i).unwrap();
                    assert!(close(c, vt[(i, j)]), "V {i} {j}");
                    let c = iterated_coeff(&p, StepFamily::UprimeApp, j, j, j, j - i).unwrap();
                    assert!(close(c, up[(i, j)]), "U' {i} {j}");
                }
            }
        }
    }

    #[test]
    fn out_of_range_indices() {
        let p = sample_params(1, 3).unwrap();
        assert!(matches!(
            iterated_coeff(&p, StepFamily::L, 3, 2, 1, 0),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(iterated_coeff(&p, StepFamily::U, 3, 3, 4, 0).is_err());
        assert!(iterated_coeff(&p, StepFamily::LprimeApp, 1, 2, 0, 0).is_err());
        assert_eq!(
            iterated_coeff(&p, StepFamily::V, 1, 3, 1, 2).unwrap(),
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn family_names_parse() {
        for f in StepFamily::ALL {
            assert_eq!(f.name().parse::<StepFamily>().unwrap(), f);
        }
    }
}
