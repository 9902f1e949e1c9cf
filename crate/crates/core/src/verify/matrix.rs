//! Matrix identities: both Gauss decompositions, inverses, determinants and
//! the transition matrix against its defining interpolation.
#![allow(non_snake_case)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IdentityReport, Measured, Recorder, ELIMINATION_TOL, RATIONAL_TOL};
use crate::gauss::{
    build_A_factors, build_K_factors, build_R_direct_with, build_R_factors, build_R_inverse,
    build_intermediate, compare, det_formula, max_scale, term_scale, CMatrix, DdMatrix, DetKind,
    GaussFactorization, Intermediate, Order,
};
use crate::interp::{eval_poly_with, EvalOptions, EvalPoint, PolySpec, Slot};
use crate::qcore::{Params, Result};

/// Largest `n` at which the checks that skew-symmetrize over `S_n` run.
pub const DIRECT_MAX_N: usize = 5;

/// Residual of `a = b` at the worst entry under the per-entry `scale`.
fn matrix_measure(a: &CMatrix, b: &CMatrix, scale: &[f64]) -> Measured {
    let r = compare(a, b, scale);
    let (i, j) = r.worst;
    let d = (a[(i, j)] - b[(i, j)]).norm();
    if r.max_rel == 0.0 {
        return Measured::new(0.0, a.max_abs().max(b.max_abs()));
    }
    Measured::new(d, d / r.max_rel)
}

fn factor_pair(f: &GaussFactorization, g: &GaussFactorization) -> Measured {
    matrix_measure(
        &f.product(),
        &g.product(),
        &max_scale(&f.term_scale(), &g.term_scale()),
    )
}

fn scalar_measure(a: C64, b: C64) -> Measured {
    Measured::new((a - b).norm(), a.norm().max(b.norm()))
}

/// `L D U = U' D' L'` for `R` and `A`.
pub fn verify_ldu_udl(p: &Params, deterministic: bool) -> Vec<IdentityReport> {
    let mut rec = Recorder::for_params(p, deterministic);
    let n = p.n;
    for (name, build) in [
        (
            "R",
            build_R_factors as fn(&Params, Order) -> Result<GaussFactorization>,
        ),
        ("A", build_A_factors),
    ] {
        rec.check(
            format!("matrix.ldu-udl.{name}[n={n}]"),
            RATIONAL_TOL,
            || Ok(factor_pair(&build(p, Order::Ldu)?, &build(p, Order::Udl)?)),
        );
    }
    rec.reports
}

/// [`verify_ldu_udl`] plus the two product routes through the intermediate
/// matrices.
pub fn verify_decompositions(p: &Params, deterministic: bool) -> Vec<IdentityReport> {
    let mut rec = Recorder::for_params(p, deterministic);
    rec.reports = verify_ldu_udl(p, deterministic);
    let n = p.n;
    for (name, x, y) in [
        ("A.lower-upper", Intermediate::Ltilde, Intermediate::Utilde),
        (
            "A.upper-lower",
            Intermediate::UtildePrimeApp,
            Intermediate::LtildePrimeApp,
        ),
        (
            "R.lower-upper",
            Intermediate::LtildeR,
            Intermediate::UtildeR,
        ),
        (
            "R.upper-lower",
            Intermediate::UtildePrimeR,
            Intermediate::LtildePrimeR,
        ),
    ] {
        rec.check(format!("matrix.route.{name}[n={n}]"), RATIONAL_TOL, || {
            let f = if name.starts_with('A') {
                build_A_factors(p, Order::Ldu)?
            } else {
                build_R_factors(p, Order::Ldu)?
            };
            let a = build_intermediate(p, x)?;
            let b = build_intermediate(p, y)?;
            let sc = max_scale(&f.term_scale(), &term_scale(&[&a, &b]));
            Ok(matrix_measure(&f.product(), &(&a * &b), &sc))
        });
    }
    rec.reports
}

/// `R R^{-1} = I` in both inverse orders, and the triangular inverses of the
/// `A` factors.
pub fn verify_inverses(p: &Params, deterministic: bool) -> Vec<IdentityReport> {
    let mut rec = Recorder::for_params(p, deterministic);
    let n = p.n;
    let id = CMatrix::identity(n + 1);
    for order in [Order::Ldu, Order::Udl] {
        rec.check(
            format!("matrix.inverse.R.{order}[n={n}]"),
            RATIONAL_TOL,
            || {
                let f = build_R_factors(p, Order::Ldu)?;
                let g = build_R_inverse(p, order)?;
                let chain: Vec<&CMatrix> = f.factors().into_iter().chain(g.factors()).collect();
                Ok(matrix_measure(
                    &(&f.product() * &g.product()),
                    &id,
                    &term_scale(&chain),
                ))
            },
        );
    }
    for (name, inv) in [
        ("U_A", Intermediate::UAinv),
        ("Lprime_A", Intermediate::LprimeAinv),
        ("Utilde", Intermediate::Vtilde),
    ] {
        rec.check(
            format!("matrix.inverse.{name}[n={n}]"),
            RATIONAL_TOL,
            || {
                let m = match name {
                    "U_A" => build_A_factors(p, Order::Ldu)?.upper,
                    "Lprime_A" => build_A_factors(p, Order::Udl)?.lower,
                    _ => build_intermediate(p, Intermediate::Utilde)?,
                };
                let mi = build_intermediate(p, inv)?;
                Ok(matrix_measure(&(&m * &mi), &id, &term_scale(&[&m, &mi])))
            },
        );
    }
    rec.reports
}

/// Closed-form determinants against elimination on the assembled matrix.
/// The product and the elimination run in double-double: at `n = 8` the
/// assembled `K` can have condition numbers past `1e30`, so an f64 product
/// alone loses every digit the comparison needs.
pub fn verify_determinants(p: &Params, deterministic: bool) -> Vec<IdentityReport> {
    let mut rec = Recorder::for_params(p, deterministic);
    let n = p.n;
    for (name, kind) in [
        ("R", DetKind::R),
        ("K1", DetKind::K1),
        ("K2", DetKind::K2),
        ("A", DetKind::A),
    ] {
        rec.check(format!("matrix.det.{name}[n={n}]"), ELIMINATION_TOL, || {
            let factors: Vec<CMatrix> = match kind {
                DetKind::R => build_R_factors(p, Order::Ldu)?
                    .factors()
                    .into_iter()
                    .cloned()
                    .collect(),
                DetKind::K1 => build_K_factors(p, 1)?,
                DetKind::K2 => build_K_factors(p, 2)?,
                DetKind::A => build_A_factors(p, Order::Ldu)?
                    .factors()
                    .into_iter()
                    .cloned()
                    .collect(),
            };
            let m = DdMatrix::product(&factors.iter().collect::<Vec<_>>());
            Ok(scalar_measure(m.det_elimination(), det_formula(p, kind)?))
        });
    }
    rec.reports
}

/// The factored `R` against the matrix of interpolation values.
pub fn verify_direct_R(p: &Params, deterministic: bool) -> Vec<IdentityReport> {
    let mut rec = Recorder::for_params(p, deterministic);
    let n = p.n;
    rec.check(format!("matrix.direct.R[n={n}]"), ELIMINATION_TOL, || {
        let f = build_R_factors(p, Order::Ldu)?;
        let (d, sc) = build_R_direct_with(p, &EvalOptions::default())?;
        Ok(matrix_measure(
            &d,
            &f.product(),
            &max_scale(&sc, &f.term_scale()),
        ))
    });
    rec.reports
}

/// Random point with coordinates of modulus in `[0.5, 1.5]`.
pub(crate) fn random_point(rng: &mut ChaCha8Rng, n: usize) -> EvalPoint {
    EvalPoint::new(
        (0..n)
            .map(|_| {
                C64::from_polar(
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect(),
    )
}

/// `e_{n-j}(a2,b1; z) = Σ_i e_i(a1,b2; z) R_ij` at `points` random `z`.
pub fn verify_transition_pointwise(
    p: &Params,
    seed: u64,
    points: usize,
    deterministic: bool,
) -> Vec<IdentityReport> {
    let mut rec = Recorder::for_params(p, deterministic);
    let n = p.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7ae5);
    let opts = EvalOptions::default();
    for m in 0..points {
        let z = random_point(&mut rng, n);
        rec.check(
            format!("matrix.transition-pointwise[n={n},point={m:02}]"),
            ELIMINATION_TOL,
            || {
                let r = build_R_factors(p, Order::Ldu)?.product();
                let base: Vec<_> = (0..=n)
                    .map(|i| eval_poly_with(&PolySpec::matsuo(i, Slot::A1, Slot::B2), p, &z, &opts))
                    .collect::<Result<_>>()?;
                let mut worst = Measured::new(0.0, 1.0);
                for j in 0..=n {
                    let lhs =
                        eval_poly_with(&PolySpec::matsuo(n - j, Slot::A2, Slot::B1), p, &z, &opts)?;
                    let mut rhs = C64::new(0.0, 0.0);
                    let mut scale = lhs.scale.max(lhs.value.norm());
                    for (i, e) in base.iter().enumerate() {
                        rhs += e.value * r[(i, j)];
                        scale = scale.max(e.scale * r[(i, j)].norm());
                    }
                    let here = Measured::new((lhs.value - rhs).norm(), scale);
                    if here.rel() >= worst.rel() {
                        worst = here;
                    }
                }
                Ok(worst)
            },
        );
    }
    rec.reports
}

/// Every matrix identity at `p`; the checks that skew-symmetrize run only
/// for `n <= DIRECT_MAX_N`.
pub fn verify_matrix_identities(p: &Params, seed: u64, deterministic: bool) -> Vec<IdentityReport> {
    let mut out = verify_decompositions(p, deterministic);
    out.extend(verify_inverses(p, deterministic));
    out.extend(verify_determinants(p, deterministic));
    if p.n <= DIRECT_MAX_N {
        out.extend(verify_direct_R(p, deterministic));
        out.extend(verify_transition_pointwise(p, seed, 20, deterministic));
    }
    out
}
