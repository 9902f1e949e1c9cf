use super::*;
use crate::interp::{etilde, etilde_prime, Family, Slot};
use crate::qcore::{c, sample_params, ParamSampler};

fn conv_params(seed: u64, n: usize) -> Params {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ParamSampler::convergent(0.5).sample(&mut rng, n).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn random_nu(rng: &mut ChaCha8Rng, n: usize, r: i64) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-r..=r)).collect()
}

#[test]
fn weight_at_origin_is_one() {
    let p = conv_params(1, 3);
    let xi = default_xi(&p, 1);
    assert_eq!(weight_ratio(&p, &xi.coords, &[0, 0, 0]).unwrap(), one());
    let tab = WeightTable::new(&p, &xi.coords, 5).unwrap();
    assert!(rel(tab.weight(&[0, 0, 0]), one()) < 1e-15);
}

#[test]
fn table_matches_direct_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=3 {
        let p = conv_params(n as u64, n);
        let xi = default_xi(&p, 2);
        let tab = WeightTable::new(&p, &xi.coords, 12).unwrap();
        for _ in 0..20 {
            let nu = random_nu(&mut rng, n, 12);
            let d = weight_ratio(&p, &xi.coords, &nu).unwrap();
            assert!(rel(tab.weight(&nu), d) < 1e-11, "n={n} ν={nu:?}");
        }
    }
}

#[test]
fn unit_step_is_g_over_shifted_f() {
    for n in 1..=4 {
        let p = sample_params(20 + n as u64, n).unwrap();
        let xi = default_xi(&p, 3);
        let mut e1 = vec![0i64; n];
        e1[0] = 1;
        let w = weight_ratio(&p, &xi.coords, &e1).unwrap();
        let mut zs = xi.coords.clone();
        zs[0] *= p.q;
        let expect = fg_eval(&p, FgKind::G, 1, &xi.coords).unwrap()
            / fg_eval(&p, FgKind::F, 1, &zs).unwrap();
        assert!(rel(w, expect) < 1e-12, "n={n}");
    }
}

#[test]
fn weight_cocycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        let p = sample_params(40 + n as u64, n).unwrap();
        let xi = default_xi(&p, 4);
        for _ in 0..10 {
            let nu = random_nu(&mut rng, n, 6);
            let mu = random_nu(&mut rng, n, 6);
            let sum: Vec<i64> = nu.iter().zip(&mu).map(|(a, b)| a + b).collect();
            let moved: Vec<C64> = xi
                .coords
                .iter()
                .zip(&nu)
                .map(|(x, v)| x * powi(p.q, *v))
                .collect();
            let lhs = weight_ratio(&p, &xi.coords, &sum).unwrap();
            let rhs =
                weight_ratio(&p, &xi.coords, &nu).unwrap() * weight_ratio(&p, &moved, &mu).unwrap();
            assert!(rel(lhs, rhs) < 1e-10, "n={n}");
        }
    }
}

#[test]
fn zero_integrand_gives_zero() {
    let p = conv_params(2, 2);
    let xi = default_xi(&p, 0);
    let r = integrate(&p, &xi, &TruncationSpec::for_n(2).with_radius(5), &|_| {
        Ok(C64::new(0.0, 0.0))
    })
    .unwrap();
    assert_eq!(r.value, C64::new(0.0, 0.0));
    assert_eq!(r.shells_used, 6);
}

fn matsuo_spec(p: &Params, xi: EvalPoint, i: usize) -> BracketSpec {
    BracketSpec::new(
        PolySpec::matsuo(i, crate::interp::Slot::A1, crate::interp::Slot::B2),
        xi,
        *p,
    )
}

#[test]
fn q_shift_of_base_point() {
    for n in 1..=2 {
        let p = conv_params(7 + n as u64, n);
        let xi = default_xi(&p, 7);
        let shifted = EvalPoint::new(xi.coords.iter().map(|x| x * p.q).collect());
        let trunc = TruncationSpec::for_n(n);
        let b0 = bracket(&matsuo_spec(&p, xi.clone(), 1), &trunc).unwrap();
        let b1 = bracket(&matsuo_spec(&p, shifted, 1), &trunc).unwrap();
        // Φ(qξ) = Φ(ξ) · ratio at ν = (1, …, 1).
        let g = weight_ratio(&p, &xi.coords, &vec![1; n]).unwrap();
        assert!(rel(b0.value, g * b1.value) < 1e-9, "n={n}");
    }
}

#[test]
fn doubling_the_radius_changes_little() {
    let p = conv_params(11, 1);
    let xi = default_xi(&p, 11);
    let spec = matsuo_spec(&p, xi, 0);
    let a = bracket(&spec, &TruncationSpec::for_n(1).with_radius(30)).unwrap();
    let b = bracket(&spec, &TruncationSpec::for_n(1).with_radius(60)).unwrap();
    assert!(rel(a.value, b.value) < 1e-8);
    assert_eq!(a.gauge, Gauge::PhiAtXiNormalized);
}

#[test]
fn t_alpha_is_the_product_multiplier() {
    let n = 2;
    let p = conv_params(13, n);
    let xi = default_xi(&p, 13);
    let trunc = TruncationSpec::for_n(n);
    for i in 0..=n {
        let s = apply_T_alpha(&matsuo_spec(&p, xi.clone(), i));
        let mut direct = matsuo_spec(&p, xi.clone(), i);
        direct.poly.family = Family::MatsuoTimesProd { i };
        let a = bracket(&s, &trunc).unwrap();
        let b = bracket(&direct, &trunc).unwrap();
        assert!(rel(a.value, b.value) < 1e-13);
    }
    let twice = apply_T_alpha(&apply_T_alpha(&matsuo_spec(&p, xi.clone(), 0)));
    assert_eq!(twice.alpha_shift, 2);
    assert!(
        check_convergence(&twice.effective_params())
            || twice.effective_params().qalpha.norm() < 1.0
    );
}

#[test]
fn ab_shifts_commute_and_keep_the_product() {
    let p = conv_params(17, 2);
    let xi = default_xi(&p, 17);
    let s = matsuo_spec(&p, xi, 1);
    let s12 = apply_T_ab(&apply_T_ab(&s, 1).unwrap(), 2).unwrap();
    let s21 = apply_T_ab(&apply_T_ab(&s, 2).unwrap(), 1).unwrap();
    let z = [c(0.3, 0.1), c(-0.7, 0.4)];
    assert!(rel(s12.multiplier(&z).unwrap(), s21.multiplier(&z).unwrap()) < 1e-15);
    let e = s12.effective_params();
    assert!(rel(e.a1 * e.b1, p.a1 * p.b1) < 1e-14);
    assert_eq!(check_convergence(&e), check_convergence(&p));
    assert!(apply_T_ab(&s, 3).is_err());
}

#[test]
fn shift_multiplier_pole() {
    let p = conv_params(19, 1);
    let xi = default_xi(&p, 19);
    let s = apply_T_ab(&matsuo_spec(&p, xi, 0), 1).unwrap();
    let z = [p.q / p.b1];
    assert!(matches!(s.multiplier(&z), Err(Error::PoleHit(_))));
}

#[test]
fn lattice_pole_detected() {
    let p = conv_params(23, 1);
    // (b1 ξ; q)_ν with ν < 0 has the factor 1 - q^{-2} b1 ξ.
    let xi = EvalPoint::new(vec![p.q * p.q / p.b1]);
    let r = integrate(&p, &xi, &TruncationSpec::for_n(1).with_radius(4), &|_| {
        Ok(one())
    });
    assert!(matches!(r, Err(Error::PoleHit(_))), "{r:?}");
}

#[test]
fn short_truncation_not_converged() {
    let p = conv_params(29, 1);
    let xi = default_xi(&p, 29);
    let mut trunc = TruncationSpec::for_n(1).with_radius(2);
    trunc.tail_tol = 1e-14;
    let r = bracket(&matsuo_spec(&p, xi, 1), &trunc);
    assert!(matches!(r, Err(Error::NotConverged { .. })), "{r:?}");
}

#[test]
fn convergence_region() {
    let one_ish = c(1.0, 0.0);
    let p = Params {
        q: c(0.3, 0.0),
        t: c(0.7, 0.0),
        qalpha: c(0.5, 0.0),
        a1: one_ish,
        a2: one_ish,
        b1: one_ish,
        b2: one_ish,
        n: 1,
    };
    assert!(check_convergence(&p));
    assert!(!check_convergence(&Params {
        qalpha: c(0.0, 1.0),
        ..p
    }));
    let big_t = Params {
        t: c(3.0, 0.0),
        n: 2,
        ..p
    };
    assert!(!check_convergence(&big_t));
    let xi = EvalPoint::new(vec![c(0.5, 0.5); 2]);
    let r = bracket(&matsuo_spec(&big_t, xi, 0), &TruncationSpec::for_n(2));
    assert!(matches!(r, Err(Error::ConditionViolated(_))));
}

#[test]
fn bracket_json_shape() {
    let p = conv_params(31, 1);
    let xi = default_xi(&p, 31);
    let r = bracket(&matsuo_spec(&p, xi, 0), &TruncationSpec::for_n(1)).unwrap();
    let v = serde_json::to_value(r).unwrap();
    assert_eq!(v["gauge"], "phi_at_xi_normalized");
    assert_eq!(v["N"], 60);
    assert!(v["value"].is_array());
}

#[test]
fn parallel_and_repeated_runs_agree() {
    let p = conv_params(37, 2);
    let xi = default_xi(&p, 37);
    let spec = matsuo_spec(&p, xi, 2);
    let trunc = TruncationSpec::for_n(2);
    let a = bracket(&spec, &trunc).unwrap();
    let b = bracket(&spec, &trunc).unwrap();
    assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
    assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
}

#[test]
fn nabla_of_phi_is_f_minus_g_times_aux() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in 1..=3 {
        let p = sample_params(41 + n as u64, n).unwrap();
        let z: Vec<C64> = (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        for k in 1..=n {
            for i in 0..n {
                let phi = |w: &[C64]| phi_ki(&p, NablaFamily::E, k, i, w);
                let lhs = nabla_integrand(&p, &phi, &z).unwrap();
                let f = fg_eval(&p, FgKind::F, 1, &z).unwrap();
                let g = fg_eval(&p, FgKind::G, 1, &z).unwrap();
                let rhs = phi(&z).unwrap() / f * (f - g);
                assert!(rel(lhs, rhs) < 1e-11, "n={n} k={k} i={i}");
            }
        }
    }
}

#[test]
fn nabla_expansions_hold() {
    let opts = EvalOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for n in 1..=4 {
        let p = sample_params(43 + n as u64, n).unwrap();
        let z: Vec<C64> = (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let d = crate::interp::delta(&z);
        for fam in [NablaFamily::E, NablaFamily::EPrime] {
            let (ks, is): (Vec<usize>, Vec<usize>) = match fam {
                NablaFamily::E => ((1..=n).collect(), (0..n).collect()),
                NablaFamily::EPrime => ((1..=n).collect(), (1..=n).collect()),
            };
            for &k in &ks {
                for &i in &is {
                    let lhs = nabla_skew(&p, fam, k, i, &z, &opts).unwrap();
                    let exps = nabla_expansion(&p, fam, k, i).unwrap();
                    assert!(!exps.is_empty());
                    for e in exps {
                        let mut rhs = C64::new(0.0, 0.0);
                        let mut scale = lhs.abs_sum / d.norm();
                        for ((kk, ii), coef) in &e.terms {
                            let v = match fam {
                                NablaFamily::E => etilde(*kk, *ii, p.a1, p.b2, p.t, &z, &opts),
                                NablaFamily::EPrime => {
                                    etilde_prime(*kk, *ii, p.a1, p.b2, p.t, &z, &opts)
                                }
                            }
                            .unwrap();
                            rhs += coef * v.value;
                            scale = scale.max(coef.norm() * v.scale);
                        }
                        let r = (lhs.value / d - rhs).norm() / scale;
                        assert!(r < 1e-11, "n={n} {fam:?} k={k} i={i} {:?} {r}", e.case);
                    }
                }
            }
        }
    }
}

#[test]
fn special_point_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for n in 1..=4 {
        let p = sample_params(47 + n as u64, n).unwrap();
        for side in [SpecialSide::XOverB2, SpecialSide::A1Y] {
            for j in 0..=n {
                let free = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let (z, claims) = special_point_claims(&p, side, j, free).unwrap();
                assert!(!claims.is_empty() || n == 0);
                for cl in claims {
                    let got = fg_eval(&p, cl.which, cl.i, &z.coords).unwrap();
                    let ok = if cl.vanishing {
                        got.norm() < 1e-12
                    } else {
                        rel(got, cl.expected) < 1e-11
                    };
                    assert!(
                        ok,
                        "n={n} {side:?} j={j} {:?}_{} got {got} want {}",
                        cl.which, cl.i, cl.expected
                    );
                }
            }
        }
    }
}

#[test]
fn summation_by_parts_vanishes() {
    for n in 1..=2 {
        let p = conv_params(53 + n as u64, n);
        let xi = default_xi(&p, 53);
        let trunc = TruncationSpec::for_n(n);
        let opts = EvalOptions::default();
        for k in 1..=n {
            for i in 0..n {
                let g = |z: &[C64]| nabla_skew(&p, NablaFamily::E, k, i, z, &opts).map(|s| s.value);
                let r = integrate(&p, &xi, &trunc, &g).unwrap();
                assert!(
                    r.value.norm() <= 1e-6 * r.abs_sum,
                    "n={n} k={k} i={i} {r:?}"
                );
            }
        }
    }
    let p = conv_params(59, 1);
    let xi = default_xi(&p, 59);
    let g = |z: &[C64]| nabla_integrand(&p, &|_| Ok(one()), z);
    let r = integrate(&p, &xi, &TruncationSpec::for_n(1), &g).unwrap();
    assert!(r.value.norm() <= 1e-8 * r.abs_sum, "{r:?}");
}

#[test]
fn bad_indices_rejected() {
    let p = sample_params(61, 2).unwrap();
    let z = [c(0.2, 0.1), c(0.4, -0.3)];
    assert!(fg_eval(&p, FgKind::F, 0, &z).is_err());
    assert!(fg_eval(&p, FgKind::G, 3, &z).is_err());
    assert!(phi_ki(&p, NablaFamily::E, 0, 0, &z).is_err());
    assert!(phi_ki(&p, NablaFamily::EPrime, 1, 0, &z).is_err());
    assert!(nabla_expansion(&p, NablaFamily::E, 1, 2).is_err());
    let _ = Slot::A1;
}
