use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{check_generic, powi, Error, Result};

/// The parameter tuple. `t` and `qalpha` are stored as the values `q^τ` and
/// `q^α`; the exponents themselves never enter a formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub q: C64,
    pub t: C64,
    pub qalpha: C64,
    pub a1: C64,
    pub a2: C64,
    pub b1: C64,
    pub b2: C64,
    pub n: usize,
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let qn = self.q.norm();
        if !(qn > 0.0 && qn < 1.0) {
            return Err(Error::Invalid(format!("need 0 < |q| < 1, got |q| = {qn}")));
        }
        for (name, v) in self.named() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(format!("parameter {name}")));
            }
            if v.norm() == 0.0 {
                return Err(Error::Invalid(format!("parameter {name} must be nonzero")));
            }
        }
        if self.n == 0 {
            return Err(Error::Invalid("n must be positive".into()));
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, C64); 7] {
        [
            ("q", self.q),
            ("t", self.t),
            ("qalpha", self.qalpha),
            ("a1", self.a1),
            ("a2", self.a2),
            ("b1", self.b1),
            ("b2", self.b2),
        ]
    }

    /// Build from real exponents: `t = q^tau`, `qalpha = q^alpha` (principal branch).
    #[allow(clippy::too_many_arguments)]
    pub fn from_exponents(
        q: C64,
        tau: f64,
        alpha: f64,
        a1: C64,
        a2: C64,
        b1: C64,
        b2: C64,
        n: usize,
    ) -> Self {
        let lq = q.ln();
        Params {
            q,
            t: (lq * tau).exp(),
            qalpha: (lq * alpha).exp(),
            a1,
            a2,
            b1,
            b2,
            n,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// The interchange `(a1, b1) <-> (a2, b2)`.
    pub fn swapped(&self) -> Self {
        Params {
            a1: self.a2,
            a2: self.a1,
            b1: self.b2,
            b2: self.b1,
            ..*self
        }
    }

    /// `s` applications of the simultaneous shift `a_r -> q a_r`, `b_r -> b_r / q`.
    pub fn shift_ab(&self, r: usize, s: i64) -> Self {
        let f = powi(self.q, s);
        let mut p = *self;
        match r {
            1 => {
                p.a1 *= f;
                p.b1 /= f;
            }
            _ => {
                p.a2 *= f;
                p.b2 /= f;
            }
        }
        p
    }

    /// `s` applications of `α -> α + 1`, i.e. `qalpha -> q qalpha`.
    pub fn shift_alpha(&self, s: i64) -> Self {
        Params {
            qalpha: self.qalpha * powi(self.q, s),
            ..*self
        }
    }

    /// Short stable fingerprint of the parameter values.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("params serialize");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn random_complex<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> C64 {
    let m = rng.gen_range(lo.ln()..hi.ln()).exp();
    let ph = rng.gen_range(0.0..std::f64::consts::TAU);
    C64::from_polar(m, ph)
}

/// Random generic parameters: moduli log-uniform in `[0.2, 2]`, uniform
/// phases, real `q` in `(0.05, 0.8)`; resampled until the genericity scan
/// passes.
#[derive(Debug, Clone, Copy)]
pub struct ParamSampler {
    pub modulus: (f64, f64),
    pub q_range: (f64, f64),
    pub max_attempts: usize,
    /// When set, also require every lattice decay rate to be below this
    /// bound (see [`ParamSampler::decay_rate`]).
    pub max_decay: Option<f64>,
    /// Also require the decay bound after this many shifts `qalpha -> q qalpha`.
    pub alpha_headroom: i64,
}

impl Default for ParamSampler {
    fn default() -> Self {
        ParamSampler {
            modulus: (0.2, 2.0),
            q_range: (0.05, 0.8),
            max_attempts: 100,
            max_decay: None,
            alpha_headroom: 0,
        }
    }
}

impl ParamSampler {
    /// Sampler for lattice sums: decay per shell at most `rate` in every
    /// direction for integrands of degree up to two per variable. `t` is
    /// drawn with modulus in `[0.8, 1.25]` and `a1, a2, b1, b2` are scaled up
    /// as needed, so draws are rarely rejected.
    pub fn convergent(rate: f64) -> Self {
        ParamSampler {
            max_attempts: 10_000,
            max_decay: Some(rate),
            ..Default::default()
        }
    }

    /// Worst geometric ratio between consecutive lattice shells, for
    /// integrands of degree at most two in each variable, over both the
    /// `z -> 0` and `z -> ∞` ends of the lattice.
    pub fn with_alpha_headroom(mut self, shifts: i64) -> Self {
        self.alpha_headroom = shifts;
        self
    }

    pub fn decay_rate(p: &Params) -> f64 {
        let qa = p.qalpha.norm();
        let tt = p.t.norm().powi(2 * (p.n as i32 - 1));
        let prod = (p.a1 * p.a2 * p.b1 * p.b2).norm();
        [qa, qa * tt, 1.0 / (prod * qa), 1.0 / (prod * qa * tt)]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Result<Params> {
        let (lo, hi) = self.modulus;
        for _ in 0..self.max_attempts {
            let q = C64::new(rng.gen_range(self.q_range.0..self.q_range.1), 0.0);
            let mut p = Params {
                q,
                t: random_complex(rng, lo, hi),
                qalpha: random_complex(rng, lo, hi),
                a1: random_complex(rng, lo, hi),
                a2: random_complex(rng, lo, hi),
                b1: random_complex(rng, lo, hi),
                b2: random_complex(rng, lo, hi),
                n,
            };
            if let Some(rate) = self.max_decay {
                steer_into_decay(rng, &mut p, rate, self.alpha_headroom);
                if Self::decay_rate(&p) >= rate
                    || Self::decay_rate(&p.shift_alpha(self.alpha_headroom)) >= rate
                {
                    continue;
                }
            }
            if check_generic(&p, n).pass {
                return Ok(p);
            }
        }
        Err(Error::NonGeneric {
            factor: format!("no generic draw in {} attempts", self.max_attempts),
            min_abs: 0.0,
        })
    }
}

/// Redraw `t` near the unit circle and `qalpha` below the rate, then scale
/// `a1, a2, b1, b2` up until the `z -> ∞` end decays as fast as the `z -> 0` end.
fn steer_into_decay<R: Rng>(rng: &mut R, p: &mut Params, rate: f64, headroom: i64) {
    p.t = random_complex(rng, 0.8, 1.25);
    let tt = p.t.norm().powi(2 * (p.n as i32 - 1));
    let qa_max = 0.95 * rate * tt.recip().min(1.0);
    p.qalpha = random_complex(rng, 0.05 * qa_max, qa_max);
    let need = 1.05 / (rate * p.qalpha.norm() * p.q.norm().powi(headroom as i32) * tt.min(1.0));
    let prod = (p.a1 * p.a2 * p.b1 * p.b2).norm();
    if prod < need {
        let f = (need / prod).powf(0.25);
        p.a1 *= f;
        p.a2 *= f;
        p.b1 *= f;
        p.b2 *= f;
    }
}

/// Deterministic draw of generic parameters from a seed.
pub fn sample_params(seed: u64, n: usize) -> Result<Params> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ParamSampler::default().sample(&mut rng, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_generic() {
        let a = sample_params(7, 4).unwrap();
        let b = sample_params(7, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        assert!(check_generic(&a, 4).pass);
        a.validate().unwrap();
    }

    #[test]
    fn shifts_compose() {
        let p = sample_params(3, 2).unwrap();
        let s = p.shift_ab(2, 1).shift_ab(2, 1);
        let d = p.shift_ab(2, 2);
        assert!((s.a2 - d.a2).norm() < 1e-15 && (s.b2 - d.b2).norm() < 1e-15);
        assert!((s.a2 * s.b2 - p.a2 * p.b2).norm() < 1e-14);
        let swapped = p.swapped().swapped();
        assert_eq!(swapped, p);
    }

    #[test]
    fn exponent_form_matches_powers() {
        let q = C64::new(0.3, 0.0);
        let p = Params::from_exponents(q, 2.0, 3.0, q, q, q, q, 1);
        assert!((p.t - q * q).norm() < 1e-15);
        assert!((p.qalpha - q * q * q).norm() < 1e-15);
    }

    #[test]
    fn convergent_sampler_respects_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = ParamSampler::convergent(0.5).sample(&mut rng, 2).unwrap();
        assert!(ParamSampler::decay_rate(&p) < 0.5);
    }
}
