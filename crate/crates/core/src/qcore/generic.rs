//! Scan of every denominator factor used by the closed-form entries.
//!
//! Each denominator of the form `(x;t)_m` contributes the factors
//! `1 - x t^k`, `k = 0..m`. The list below mirrors the entry formulas in
//! [`crate::gauss`] and the closed forms in [`crate::interp`]; the order puts
//! the transition-matrix factors first so the first failure reported names
//! the most basic offending display.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{one, powi, Error, Params, Result, GENERIC_TOL};

#[derive(Debug, Clone, Serialize)]
pub struct DenominatorFactor {
    pub label: String,
    pub value: C64,
    pub scale: f64,
}

impl DenominatorFactor {
    pub fn relative(&self) -> f64 {
        self.value.norm() / self.scale
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericityVerdict {
    pub pass: bool,
    pub min_relative: f64,
    pub min_factor: Option<String>,
    /// First failing factor in scan order.
    pub offending: Option<String>,
    pub failures: Vec<DenominatorFactor>,
    pub factors_checked: usize,
}

struct Scan {
    t: C64,
    out: Vec<DenominatorFactor>,
}

impl Scan {
    fn poch(&mut self, label: impl Fn() -> String, x: C64, len: i64) {
        if len <= 0 {
            return;
        }
        let mut y = x;
        let mut name: Option<String> = None;
        for k in 0..len {
            let value = one() - y;
            let scale = y.norm().max(1.0);
            if value.norm() < 1e-6 * scale || name.is_none() {
                let base = name.get_or_insert_with(&label);
                self.out.push(DenominatorFactor {
                    label: format!("{base} [factor k={k}]"),
                    value,
                    scale,
                });
            } else {
                self.out.push(DenominatorFactor {
                    label: String::new(),
                    value,
                    scale,
                });
            }
            y *= self.t;
        }
    }
}

/// All denominator factors for size `n`, labelled by the entry they guard.
pub fn denominator_factors(p: &Params, n: usize) -> Vec<DenominatorFactor> {
    let t = p.t;
    let qa = p.qalpha;
    let (a1, a2, b1, b2) = (p.a1, p.a2, p.b1, p.b2);
    let p4 = a1 * a2 * b1 * b2;
    let n = n as i64;
    let tp = |m: i64| powi(t, m);
    let mut s = Scan { t, out: Vec::new() };

    s.poch(|| "(t;t)_n in c-binomials".into(), t, n);

    for i in 0..=n {
        for j in 0..i {
            s.poch(
                || format!("l^R[{i},{j}]: (a1^-1 a2 t^-(n-2j-1);t)_(i-j)"),
                a2 / a1 * tp(-(n - 2 * j - 1)),
                i - j,
            );
        }
    }
    for j in 0..=n {
        s.poch(|| format!("d^R[{j}]: (a1 b2;t)_(n-j)"), a1 * b2, n - j);
        s.poch(
            || format!("d^R[{j}]: (a1^-1 a2 t^-(n-j);t)_j"),
            a2 / a1 * tp(-(n - j)),
            j,
        );
    }
    for i in 0..=n {
        for j in (i + 1)..=n {
            s.poch(
                || format!("u^R[{i},{j}]: (a1 a2^-1 t^(n-i-j);t)_(j-i)"),
                a1 / a2 * tp(n - i - j),
                j - i,
            );
            s.poch(
                || format!("u'^R[{i},{j}]: (b1^-1 b2 t^(i+j-n);t)_(j-i)"),
                b2 / b1 * tp(i + j - n),
                j - i,
            );
        }
    }
    for j in 0..=n {
        s.poch(
            || format!("d'^R[{j}]: (a1^-1 b2^-1 t^-(j-1);t)_j"),
            (a1 * b2).inv() * tp(-(j - 1)),
            j,
        );
        s.poch(
            || format!("d'^R[{j}]: (b1^-1 b2 t^-(n-2j-1);t)_(n-j)"),
            b2 / b1 * tp(-(n - 2 * j - 1)),
            n - j,
        );
    }
    for i in 0..=n {
        for j in 0..i {
            s.poch(
                || format!("l'^R[{i},{j}]: (b1 b2^-1 t^(n-2i+1);t)_(i-j)"),
                b1 / b2 * tp(n - 2 * i + 1),
                i - j,
            );
        }
    }

    // R^{-1}
    for i in 0..=n {
        for j in 0..i {
            s.poch(
                || format!("l*[{i},{j}]: (a2 a1^-1 t^(i+j-n);t)_(i-j)"),
                a2 / a1 * tp(i + j - n),
                i - j,
            );
            s.poch(
                || format!("l'*[{i},{j}]: (b2^-1 b1 t^(n-i-j);t)_(i-j)"),
                b1 / b2 * tp(n - i - j),
                i - j,
            );
        }
        for j in (i + 1)..=n {
            s.poch(
                || format!("u*[{i},{j}]: (a2^-1 a1 t^(n-2j+1);t)_(j-i)"),
                a1 / a2 * tp(n - 2 * j + 1),
                j - i,
            );
            s.poch(
                || format!("u'*[{i},{j}]: (b2 b1^-1 t^-(n-2i-1);t)_(j-i)"),
                b2 / b1 * tp(-(n - 2 * i - 1)),
                j - i,
            );
        }
    }
    for j in 0..=n {
        s.poch(|| format!("d*[{j}]: (a2 b1;t)_j"), a2 * b1, j);
        s.poch(
            || format!("d*[{j}]: (a2^-1 a1 t^-j;t)_(n-j)"),
            a1 / a2 * tp(-j),
            n - j,
        );
        s.poch(
            || format!("d'*[{j}]: (a2^-1 b1^-1 t^-(n-j-1);t)_(n-j)"),
            (a2 * b1).inv() * tp(-(n - j - 1)),
            n - j,
        );
        s.poch(
            || format!("d'*[{j}]: (b2^-1 b1 t^(n-2j+1);t)_j"),
            b1 / b2 * tp(n - 2 * j + 1),
            j,
        );
    }

    // A, both orders, and the matrices met on the way.
    for i in 0..=n {
        for j in 0..i {
            s.poch(
                || format!("l^A[{i},{j}]: (q^a a2 b2 t^2j;t)_(i-j)"),
                qa * a2 * b2 * tp(2 * j),
                i - j,
            );
            s.poch(
                || format!("l'^A[{i},{j}]: (q^a a1 b1 t^2(n-i);t)_(i-j)"),
                qa * a1 * b1 * tp(2 * (n - i)),
                i - j,
            );
            s.poch(
                || format!("L'_A^-1[{i},{j}]: (q^a a1 b1 t^(2n-i-j-1);t)_(i-j)"),
                qa * a1 * b1 * tp(2 * n - i - j - 1),
                i - j,
            );
        }
        for j in (i + 1)..=n {
            s.poch(
                || format!("u^A[{i},{j}]: (q^a a2 b2 t^2i;t)_(j-i)"),
                qa * a2 * b2 * tp(2 * i),
                j - i,
            );
            s.poch(
                || format!("u'^A[{i},{j}]: (q^a a1 b1 t^2(n-j);t)_(j-i)"),
                qa * a1 * b1 * tp(2 * (n - j)),
                j - i,
            );
            s.poch(
                || format!("U_A^-1[{i},{j}]: (q^a a2 b2 t^(j+i-1);t)_(j-i)"),
                qa * a2 * b2 * tp(j + i - 1),
                j - i,
            );
            s.poch(
                || format!("U'~_R[{i},{j}]: (b1^-1 b2 t^-(n-i-j);t)_(j-i)"),
                b2 / b1 * tp(-(n - i - j)),
                j - i,
            );
        }
    }
    for j in 0..=n {
        s.poch(
            || format!("d^A[{j}]: (q^a a2 b2 t^(j-1);t)_j"),
            qa * a2 * b2 * tp(j - 1),
            j,
        );
        s.poch(
            || format!("d^A[{j}]: (q^a a1 a2 b1 b2 t^(n+j-1);t)_(n-j)"),
            qa * p4 * tp(n + j - 1),
            n - j,
        );
        s.poch(
            || format!("d'^A[{j}]: (q^a a1 a2 b1 b2 t^(2n-j-1);t)_j"),
            qa * p4 * tp(2 * n - j - 1),
            j,
        );
        s.poch(
            || format!("d'^A[{j}]: (q^a a1 b1 t^(n-j-1);t)_(n-j)"),
            qa * a1 * b1 * tp(n - j - 1),
            n - j,
        );
        s.poch(|| format!("V~[{j}]: (q^a;t)_j"), qa, j);
    }

    // Coefficients of the multi-step expansions, over the index domains used.
    for k in 0..=n {
        for i in 0..=n {
            for l in 0..=n {
                if i + k <= n && l <= k {
                    s.poch(
                        || format!("L^({k},{i}) l={l}: (q^a a1 a2 b1 b2 t^(2n-k-1);t)_l"),
                        qa * p4 * tp(2 * n - k - 1),
                        l,
                    );
                }
                if k >= 1 && k <= i && l <= k {
                    s.poch(
                        || format!("U'^({k},{i}) l={l}: (q^a a1 a2 b1 b2 t^(2n-k-1);t)_l"),
                        qa * p4 * tp(2 * n - k - 1),
                        l,
                    );
                }
                if k + i >= n && k + l <= n {
                    s.poch(
                        || format!("V^({k},{i}) l={l}: (q^a t^(n-k-l);t)_l"),
                        qa * tp(n - k - l),
                        l,
                    );
                }
                for j in 0..=l {
                    if k + i >= n && l <= k + i - n && j <= i && l - j <= k {
                        s.poch(
                            || {
                                format!(
                                    "U^({k},{i}) l={l} j={j}: (q^a a2 b2 t^(n+i-k-j-1);t)_(l-j)"
                                )
                            },
                            qa * a2 * b2 * tp(n + i - k - j - 1),
                            l - j,
                        );
                        s.poch(
                            || format!("U^({k},{i}) l={l} j={j}: (q^a a2 b2 t^(n+i-k-2j+l);t)_j"),
                            qa * a2 * b2 * tp(n + i - k - 2 * j + l),
                            j,
                        );
                    }
                    if k >= i && l <= k - i && i + j <= n {
                        s.poch(
                            || {
                                format!(
                                    "L'^({k},{i}) l={l} j={j}: (q^a a1 b1 t^(2n-k-i-j-1);t)_(l-j)"
                                )
                            },
                            qa * a1 * b1 * tp(2 * n - k - i - j - 1),
                            l - j,
                        );
                        s.poch(
                            || format!("L'^({k},{i}) l={l} j={j}: (q^a a1 b1 t^(2n-k-i-2j+l);t)_j"),
                            qa * a1 * b1 * tp(2 * n - k - i - 2 * j + l),
                            j,
                        );
                    }
                }
            }
        }
    }

    // Closed forms of the Lagrange polynomials at special points.
    for i in 0..=n {
        s.poch(
            || format!("f_{i}(xi_{i}(a1)): (a2 a1^-1 t^-i;t)_(n-i)"),
            a2 / a1 * tp(-i),
            n - i,
        );
        s.poch(
            || format!("f_{i}(eta_{i}(a2)): (a1 a2^-1 t^-(n-i);t)_i"),
            a1 / a2 * tp(-(n - i)),
            i,
        );
        for j in i..=n {
            s.poch(
                || format!("f_{i}(xi_{j}(x,a2)): (a1^-1 a2 t^(n-j-i);t)_(j-i)"),
                a2 / a1 * tp(n - j - i),
                j - i,
            );
        }
    }
    s.out
}

/// Scan all denominators at size `n`; factors with `|1 - x t^k| < 1e-12 max(1, |x t^k|)` fail.
pub fn check_generic(p: &Params, n: usize) -> GenericityVerdict {
    let factors = denominator_factors(p, n);
    let mut min_relative = f64::INFINITY;
    let mut min_idx = None;
    let mut failures = Vec::new();
    for (idx, f) in factors.iter().enumerate() {
        let r = f.relative();
        if r < min_relative {
            min_relative = r;
            min_idx = Some(idx);
        }
        if r < GENERIC_TOL {
            failures.push(f.clone());
        }
    }
    let label_of = |f: &DenominatorFactor| {
        if f.label.is_empty() {
            "unlabelled factor".to_string()
        } else {
            f.label.clone()
        }
    };
    GenericityVerdict {
        pass: failures.is_empty(),
        min_relative,
        min_factor: min_idx.map(|i| label_of(&factors[i])),
        offending: failures.first().map(label_of),
        failures,
        factors_checked: factors.len(),
    }
}

/// [`check_generic`] as a precondition: the first failing factor becomes the error.
pub fn ensure_generic(p: &Params) -> Result<()> {
    let v = check_generic(p, p.n);
    if v.pass {
        return Ok(());
    }
    let min_abs = v
        .failures
        .iter()
        .map(|f| f.value.norm())
        .fold(f64::INFINITY, f64::min);
    Err(Error::NonGeneric {
        factor: v.offending.unwrap_or_default(),
        min_abs,
    })
}
