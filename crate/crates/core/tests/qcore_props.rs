use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qselberg::qcore::{powi, qbinom, sample_params, shifted_factorial, ParamSampler};

fn complex(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| C64::from_polar(r, th))
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn shifted_factorial_splits(x in complex(0.2, 2.0), c in complex(0.3, 0.9), i in -6i64..6, j in -6i64..6) {
        let whole = shifted_factorial(x, c, i + j);
        let left = shifted_factorial(x, c, i);
        let right = shifted_factorial(powi(c, i) * x, c, j);
        if let (Ok(w), Ok(l), Ok(r)) = (whole, left, right) {
            prop_assert!(rel(w, l * r) < 1e-12);
        }
    }

    #[test]
    fn qbinom_pascal(i in 1i64..12, j in 0i64..12, c in complex(0.3, 0.9)) {
        let lhs = qbinom(i, j, c).unwrap();
        let rhs = qbinom(i - 1, j - 1, c).unwrap() + powi(c, j) * qbinom(i - 1, j, c).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn qbinom_symmetric(i in 0i64..14, j in 0i64..14, c in complex(0.3, 0.9)) {
        prop_assume!(j <= i);
        prop_assert!(rel(qbinom(i, j, c).unwrap(), qbinom(i, i - j, c).unwrap()) < 1e-12);
    }
}

#[test]
fn sampling_is_reproducible() {
    for n in 1..=6 {
        assert_eq!(sample_params(99, n).unwrap(), sample_params(99, n).unwrap());
    }
}

#[test]
fn convergent_draws_decay() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        let p = ParamSampler::convergent(0.5).sample(&mut rng, n).unwrap();
        assert!(ParamSampler::decay_rate(&p) < 0.5);
    }
}
