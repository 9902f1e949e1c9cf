//! Identities between truncated lattice sums, each evaluated at radius `N`
//! and `N + 10`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{IdentityReport, Measured, Recorder, JACKSON_TOL, RADIUS_STEP};
use crate::gauss::{build_A_factors, build_K, iterated_coeff, single_step, Order, StepFamily};
use crate::interp::{EvalOptions, EvalPoint, PolySpec, Slot};
use crate::jackson::{
    apply_T_ab, apply_T_alpha, bracket, default_xi, integrate, nabla_integrand, nabla_skew,
    BracketResult, BracketSpec, NablaFamily, TruncationSpec,
};
use crate::qcore::{one, Params, Precision, Result};

/// Rounding floor, in units of machine epsilon times the summed magnitudes.
const FLOOR_ULPS: f64 = 64.0;

/// Parameters, base point and truncation shared by the lattice checks.
#[derive(Debug, Clone)]
pub struct JacksonSetup {
    pub params: Params,
    pub xi: EvalPoint,
    pub trunc: TruncationSpec,
}

impl JacksonSetup {
    pub fn new(params: Params, seed: u64, trunc: TruncationSpec) -> Self {
        JacksonSetup {
            xi: default_xi(&params, seed),
            params,
            trunc,
        }
    }

    fn radii(&self) -> [TruncationSpec; 2] {
        [
            self.trunc,
            self.trunc.with_radius(self.trunc.radius + RADIUS_STEP),
        ]
    }

    fn spec(&self, poly: PolySpec) -> BracketSpec {
        BracketSpec::new(poly, self.xi.clone(), self.params)
    }

    /// Brackets at both radii, computed in parallel.
    fn brackets<K: Ord + Clone + Send + Sync>(
        &self,
        specs: Vec<(K, BracketSpec)>,
    ) -> Result<BTreeMap<K, [BracketResult; 2]>> {
        let radii = self.radii();
        specs
            .into_par_iter()
            .map(|(k, s)| {
                let a = bracket(&s, &radii[0])?;
                let b = bracket(&s, &radii[1])?;
                Ok((k, [a, b]))
            })
            .collect()
    }
}

/// `Σ c_m ⟨m⟩ = 0` at both radii, scaled by the largest term.
fn relation(terms: &[(C64, &[BracketResult; 2])]) -> Measured {
    let at = |r: usize| {
        let mut sum = C64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        let mut mag = 0.0;
        for (c, b) in terms {
            let v = c * b[r].value;
            sum += v;
            scale = scale.max(v.norm());
            mag += c.norm() * b[r].abs_sum;
        }
        (sum.norm(), scale, FLOOR_ULPS * f64::EPSILON * mag / scale)
    };
    let (abs, scale, _) = at(0);
    let (abs2, scale2, floor2) = at(1);
    let mut m = Measured::new(abs, scale);
    m.larger = Some((abs2 / scale2, floor2));
    m
}

type Key = (bool, usize, usize);

fn etilde_specs(s: &JacksonSetup) -> Vec<(Key, BracketSpec)> {
    let n = s.params.n;
    let mut out = Vec::new();
    for primed in [false, true] {
        for k in 0..=n {
            for i in 0..=n {
                let poly = if primed {
                    PolySpec::etilde_prime(k, i, Slot::A1, Slot::B2)
                } else {
                    PolySpec::etilde(k, i, Slot::A1, Slot::B2)
                };
                out.push(((primed, k, i), s.spec(poly)));
            }
        }
    }
    out
}

/// Single-step three-term relations for every family and start point, and
/// the two-step expansions.
pub fn verify_three_term(setup: &JacksonSetup, deterministic: bool) -> Vec<IdentityReport> {
    let p = &setup.params;
    let n = p.n;
    let mut rec = Recorder::for_params(p, deterministic);
    let br = match setup.brackets(etilde_specs(setup)) {
        Ok(b) => b,
        Err(e) => {
            rec.check(format!("jackson.three-term[n={n}]"), JACKSON_TOL, || Err(e));
            return rec.reports;
        }
    };
    for fam in StepFamily::ALL {
        let pr = fam.is_primed();
        for k in 0..=n {
            for i in 0..=n {
                for l in [1usize, 2] {
                    if !fam.in_domain(n, k, i, l) {
                        continue;
                    }
                    let kind = if l == 1 { "three-term" } else { "two-step" };
                    rec.check(
                        format!("jackson.{kind}.{}[n={n},k={k},i={i}]", fam.name()),
                        JACKSON_TOL,
                        || {
                            let mut coeffs: Vec<((usize, usize), C64)> = Vec::new();
                            if l == 1 {
                                coeffs.extend(single_step(p, fam, k, i)?);
                            } else {
                                for j in 0..=l {
                                    let c = iterated_coeff(p, fam, k, i, l, j)?;
                                    coeffs.push((fam.target(k, i, l, j), c));
                                }
                            }
                            let mut terms = vec![(one(), &br[&(pr, k, i)])];
                            for (key, c) in coeffs {
                                terms.push((-c, &br[&(pr, key.0, key.1)]));
                            }
                            Ok(relation(&terms))
                        },
                    );
                }
            }
        }
    }
    rec.reports
}

/// Shift operator applied to one bracket of a row.
type Shift<'a> = Box<dyn Fn(&BracketSpec) -> Result<BracketSpec> + 'a>;

/// `row_shifted = row · M` per component for `T_α` (with `M = A`), `T_α^2`
/// (with `A(α) A(α+1)`) and the two pair shifts (with `K1`, `K2`).
pub fn verify_difference_systems(setup: &JacksonSetup, deterministic: bool) -> Vec<IdentityReport> {
    let p = &setup.params;
    let n = p.n;
    let mut rec = Recorder::for_params(p, deterministic);
    let matsuo = |i: usize, a: Slot, b: Slot| setup.spec(PolySpec::matsuo(i, a, b));

    let a_row: Vec<BracketSpec> = (0..=n).map(|i| matsuo(i, Slot::A1, Slot::B2)).collect();
    let k_row: Vec<BracketSpec> = (0..=n).map(|j| matsuo(n - j, Slot::A2, Slot::B1)).collect();
    let systems: Vec<(&str, &Vec<BracketSpec>, Shift)> = vec![
        (
            "A",
            &a_row,
            Box::new(|s: &BracketSpec| Ok(apply_T_alpha(s))),
        ),
        (
            "A-twice",
            &a_row,
            Box::new(|s: &BracketSpec| Ok(apply_T_alpha(&apply_T_alpha(s)))),
        ),
        ("K1", &k_row, Box::new(|s: &BracketSpec| apply_T_ab(s, 1))),
        ("K2", &k_row, Box::new(|s: &BracketSpec| apply_T_ab(s, 2))),
    ];
    for (name, row, shift) in systems {
        let outcome = (|| -> Result<_> {
            let m = match name {
                "A" => build_A_factors(p, Order::Ldu)?.product(),
                "A-twice" => {
                    &build_A_factors(p, Order::Ldu)?.product()
                        * &build_A_factors(&p.shift_alpha(1), Order::Ldu)?.product()
                }
                "K1" => build_K(p, 1)?,
                _ => build_K(p, 2)?,
            };
            let mut specs: Vec<((bool, usize), BracketSpec)> = Vec::new();
            for (i, s) in row.iter().enumerate() {
                specs.push(((false, i), s.clone()));
                specs.push(((true, i), shift(s)?));
            }
            Ok((m, setup.brackets(specs)?))
        })();
        match outcome {
            Err(e) => rec.check(format!("jackson.system.{name}[n={n}]"), JACKSON_TOL, || {
                Err(e)
            }),
            Ok((m, br)) => {
                for j in 0..=n {
                    rec.check(
                        format!("jackson.system.{name}[n={n},j={j}]"),
                        JACKSON_TOL,
                        || {
                            let mut terms = vec![(one(), &br[&(true, j)])];
                            for i in 0..=n {
                                terms.push((-m[(i, j)], &br[&(false, i)]));
                            }
                            Ok(relation(&terms))
                        },
                    );
                }
            }
        }
    }
    rec.reports
}

/// The lattice sum of `A∇φ` for every `φ_{k,i}` (and `φ = 1` at `n = 1`)
/// against the summed magnitude of its terms.
pub fn verify_nabla_vanishing(setup: &JacksonSetup, deterministic: bool) -> Vec<IdentityReport> {
    let p = &setup.params;
    let n = p.n;
    let mut rec = Recorder::for_params(p, deterministic);
    let opts = EvalOptions {
        precision: Precision::from_bits(setup.trunc.precision_bits).unwrap_or(Precision::Double),
        ..Default::default()
    };
    let radii = setup.radii();
    let measure = |value: &(dyn Fn(&[C64]) -> Result<C64> + Sync),
                   bound: &(dyn Fn(&[C64]) -> Result<C64> + Sync)|
     -> Result<Measured> {
        let mut out = [(0.0, 0.0, 0.0); 2];
        for (r, tr) in radii.iter().enumerate() {
            let v = integrate(p, &setup.xi, tr, value)?;
            let b = integrate(p, &setup.xi, tr, bound)?;
            out[r] = (
                v.value.norm(),
                v.abs_sum,
                FLOOR_ULPS * f64::EPSILON * b.abs_sum / v.abs_sum,
            );
        }
        let mut m = Measured::new(out[0].0, out[0].1);
        m.larger = Some((out[1].0 / out[1].1, out[1].2));
        Ok(m)
    };
    for (fam, fname) in [(NablaFamily::E, "E"), (NablaFamily::EPrime, "Eprime")] {
        let is: Vec<usize> = match fam {
            NablaFamily::E => (0..n).collect(),
            NablaFamily::EPrime => (1..=n).collect(),
        };
        for k in 1..=n {
            for &i in &is {
                rec.check(
                    format!("jackson.nabla-vanishing.{fname}[n={n},k={k},i={i}]"),
                    JACKSON_TOL,
                    || {
                        let v = |z: &[C64]| nabla_skew(p, fam, k, i, z, &opts).map(|s| s.value);
                        let b = |z: &[C64]| {
                            nabla_skew(p, fam, k, i, z, &opts).map(|s| C64::new(s.abs_sum, 0.0))
                        };
                        measure(&v, &b)
                    },
                );
            }
        }
    }
    if n == 1 {
        rec.check(
            format!("jackson.nabla-vanishing.constant[n={n}]"),
            JACKSON_TOL,
            || {
                let v = |z: &[C64]| nabla_integrand(p, &|_| Ok(one()), z);
                let b = |z: &[C64]| v(z).map(|x| C64::new(x.norm(), 0.0));
                measure(&v, &b)
            },
        );
    }
    rec.reports
}
