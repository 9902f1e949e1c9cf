//! Residual checks for every identity, each producing an [`IdentityReport`],
//! and seeded suites that collect them into a [`SuiteReport`].

mod classical;
mod integral;
mod matrix;
mod polynomial;

pub use classical::{
    classical_brackets_n1, hyp2f1, verify_classical, verify_classical_ldu_udl, verify_contiguous,
    ClassicalBrackets, SeriesValue,
};
pub use integral::{
    verify_difference_systems, verify_nabla_vanishing, verify_three_term, JacksonSetup,
};
pub use matrix::{
    verify_decompositions, verify_determinants, verify_direct_R, verify_inverses, verify_ldu_udl,
    verify_matrix_identities, verify_transition_pointwise, DIRECT_MAX_N,
};
pub use polynomial::verify_polynomial_identities;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::gauss::ClassicalParams;
use crate::jackson::TruncationSpec;
use crate::qcore::{c, sample_params, ParamSampler, Params, Result};

/// Tolerance for identities between rational functions and matrices of them.
pub const RATIONAL_TOL: f64 = 1e-10;
/// Tolerance for comparisons that go through elimination or `Δ`-division.
pub const ELIMINATION_TOL: f64 = 1e-9;
/// Tolerance for identities between truncated lattice sums.
pub const JACKSON_TOL: f64 = 1e-6;
/// Tolerance for identities between hypergeometric series.
pub const SERIES_TOL: f64 = 1e-12;
/// Radius increment for the truncation-decrease check.
pub const RADIUS_STEP: usize = 10;

const SCALE_FLOOR: f64 = f64::MIN_POSITIVE;

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity_id: String,
    pub params_digest: String,
    pub n: usize,
    pub absolute_residual: f64,
    pub relative_residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: f64,
    /// Relative residual at radius `N + 10`, for lattice-sum identities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_residual_larger_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The raw numbers of a check before the verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Measured {
    pub abs: f64,
    pub scale: f64,
    /// Relative residual at the larger radius and the rounding floor below
    /// which a failure to decrease is not held against the identity.
    pub larger: Option<(f64, f64)>,
}

impl Measured {
    pub fn new(abs: f64, scale: f64) -> Self {
        Measured {
            abs,
            scale,
            larger: None,
        }
    }

    pub fn rel(&self) -> f64 {
        self.abs / self.scale.max(SCALE_FLOOR)
    }
}

/// Collects reports for one parameter point.
pub(crate) struct Recorder {
    digest: String,
    n: usize,
    deterministic: bool,
    pub reports: Vec<IdentityReport>,
}

impl Recorder {
    pub fn new(digest: String, n: usize, deterministic: bool) -> Self {
        Recorder {
            digest,
            n,
            deterministic,
            reports: Vec::new(),
        }
    }

    pub fn for_params(p: &Params, deterministic: bool) -> Self {
        Recorder::new(p.digest(), p.n, deterministic)
    }

    pub fn check(&mut self, id: String, tol: f64, f: impl FnOnce() -> Result<Measured>) {
        let start = Instant::now();
        let out = f();
        let runtime_ms = if self.deterministic {
            0.0
        } else {
            start.elapsed().as_secs_f64() * 1e3
        };
        let report = match out {
            Ok(m) => {
                let rel = m.rel();
                let mut pass = rel <= tol;
                if let Some((rel2, floor)) = m.larger {
                    pass &= rel2 <= tol && (rel2 <= rel || rel2 <= floor);
                }
                IdentityReport {
                    identity_id: id,
                    params_digest: self.digest.clone(),
                    n: self.n,
                    absolute_residual: m.abs,
                    relative_residual: rel,
                    scale: m.scale,
                    tolerance: tol,
                    pass,
                    runtime_ms,
                    relative_residual_larger_radius: m.larger.map(|l| l.0),
                    error: None,
                }
            }
            Err(e) => IdentityReport {
                identity_id: id,
                params_digest: self.digest.clone(),
                n: self.n,
                absolute_residual: f64::INFINITY,
                relative_residual: f64::INFINITY,
                scale: 0.0,
                tolerance: tol,
                pass: false,
                runtime_ms,
                relative_residual_larger_radius: None,
                error: Some(e.to_string()),
            },
        };
        self.reports.push(report);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(reports: &[IdentityReport]) -> Self {
        let passed = reports.iter().filter(|r| r.pass).count();
        Summary {
            total: reports.len(),
            passed,
            failed: reports.len() - passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub params: Vec<Params>,
    pub reports: Vec<IdentityReport>,
    pub summary: Summary,
}

/// The named suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Matrices,
    Polynomials,
    IntegralsN1,
    IntegralsN2,
    Classical,
    All,
    None,
}

impl SuiteName {
    pub const ALL: [SuiteName; 7] = [
        SuiteName::Matrices,
        SuiteName::Polynomials,
        SuiteName::IntegralsN1,
        SuiteName::IntegralsN2,
        SuiteName::Classical,
        SuiteName::All,
        SuiteName::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Matrices => "matrices",
            SuiteName::Polynomials => "polynomials",
            SuiteName::IntegralsN1 => "integrals-n1",
            SuiteName::IntegralsN2 => "integrals-n2",
            SuiteName::Classical => "classical",
            SuiteName::All => "all",
            SuiteName::None => "none",
        }
    }
}

impl std::str::FromStr for SuiteName {
    type Err = crate::qcore::Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(SuiteName::None);
        }
        SuiteName::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| crate::qcore::Error::Invalid(format!("unknown suite {s:?}")))
    }
}

/// What to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: SuiteName,
    pub seed: u64,
    /// Number of parameter draws per dimension.
    pub draws: usize,
    /// Largest `n` for the matrix suite.
    pub max_n_matrices: usize,
    /// Largest `n` for the polynomial suite.
    pub max_n_polynomials: usize,
    /// Overrides the default lattice radius of the integral suites.
    pub radius: Option<usize>,
    pub deterministic: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suite: SuiteName::All,
            seed: 0,
            draws: 3,
            max_n_matrices: 8,
            max_n_polynomials: 4,
            radius: None,
            deterministic: true,
        }
    }
}

/// Short stable fingerprint of any serializable value.
pub fn digest_of<T: Serialize + ?Sized>(v: &T) -> String {
    let json = serde_json::to_string(v).expect("value serializes");
    Sha256::digest(json.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Seed of draw `k` in dimension `n`, so that suites never share draws.
pub fn draw_seed(seed: u64, n: usize, k: usize) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add((n as u64) << 20)
        .wrapping_add(k as u64)
}

/// Real classical parameters in `[0.3, 2.5]` with `x` in `[1.8, 4]`, so the
/// series in `1/x` converge.
pub fn sample_classical(seed: u64, n: usize) -> ClassicalParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = |lo: f64, hi: f64| c(rng.gen_range(lo..hi), 0.0);
    ClassicalParams {
        alpha: r(0.3, 2.5),
        beta: r(0.3, 2.5),
        gamma: r(0.3, 2.5),
        tau: r(0.3, 2.5),
        x: r(1.8, 4.0),
        n,
    }
}

/// Convergent draw for lattice sums, with room for one extra `T_α` so the
/// doubly shifted system still converges.
pub fn sample_convergent(seed: u64, n: usize) -> Result<Params> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ParamSampler::convergent(0.5)
        .with_alpha_headroom(1)
        .sample(&mut rng, n)
}

enum Task {
    Matrices(usize, u64),
    Polynomials(usize, u64),
    Integrals(usize, u64),
    Classical(usize, u64),
}

fn tasks(cfg: &SuiteConfig, which: SuiteName) -> Vec<Task> {
    let mut out = Vec::new();
    let seeds = |n: usize| (0..cfg.draws).map(move |k| draw_seed(cfg.seed, n, k));
    match which {
        SuiteName::Matrices => {
            for n in 1..=cfg.max_n_matrices {
                out.extend(seeds(n).map(|s| Task::Matrices(n, s)));
            }
        }
        SuiteName::Polynomials => {
            for n in 1..=cfg.max_n_polynomials {
                out.extend(seeds(n).map(|s| Task::Polynomials(n, s)));
            }
        }
        SuiteName::IntegralsN1 => out.extend(seeds(1).map(|s| Task::Integrals(1, s))),
        SuiteName::IntegralsN2 => out.extend(seeds(2).map(|s| Task::Integrals(2, s))),
        SuiteName::Classical => {
            for n in 1..=cfg.max_n_matrices {
                out.extend(seeds(n).map(|s| Task::Classical(n, s)));
            }
        }
        SuiteName::All => {
            for s in [
                SuiteName::Matrices,
                SuiteName::Polynomials,
                SuiteName::IntegralsN1,
                SuiteName::IntegralsN2,
                SuiteName::Classical,
            ] {
                out.extend(tasks(cfg, s));
            }
        }
        SuiteName::None => {}
    }
    out
}

fn failed_draw(id: &str, n: usize, e: crate::qcore::Error, det: bool) -> Vec<IdentityReport> {
    let mut rec = Recorder::new(String::new(), n, det);
    rec.check(format!("{id}[n={n}]"), 0.0, || Err(e));
    rec.reports
}

fn run_task(cfg: &SuiteConfig, task: &Task) -> (Option<Params>, Vec<IdentityReport>) {
    let det = cfg.deterministic;
    match *task {
        Task::Matrices(n, s) => match sample_params(s, n) {
            Ok(p) => (Some(p), verify_matrix_identities(&p, s, det)),
            Err(e) => (None, failed_draw("matrices.draw", n, e, det)),
        },
        Task::Polynomials(n, s) => match sample_params(s, n) {
            Ok(p) => (Some(p), verify_polynomial_identities(&p, s, det)),
            Err(e) => (None, failed_draw("polynomials.draw", n, e, det)),
        },
        Task::Integrals(n, s) => match sample_convergent(s, n) {
            Ok(p) => {
                let mut trunc = TruncationSpec::for_n(n);
                if let Some(r) = cfg.radius {
                    trunc.radius = r;
                }
                trunc.deterministic = det;
                let setup = JacksonSetup::new(p, s, trunc);
                let mut reps = verify_three_term(&setup, det);
                reps.extend(verify_difference_systems(&setup, det));
                reps.extend(verify_nabla_vanishing(&setup, det));
                (Some(p), reps)
            }
            Err(e) => (None, failed_draw("integrals.draw", n, e, det)),
        },
        Task::Classical(n, s) => (None, verify_classical(&sample_classical(s, n), det)),
    }
}

/// Run a named suite. Tasks run in parallel; reports are sorted by identity
/// id and then by parameter digest, so the output does not depend on scheduling.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let tasks = tasks(cfg, cfg.suite);
    let results: Vec<(Option<Params>, Vec<IdentityReport>)> =
        tasks.par_iter().map(|t| run_task(cfg, t)).collect();
    let mut params = Vec::new();
    let mut reports = Vec::new();
    for (p, r) in results {
        params.extend(p);
        reports.extend(r);
    }
    reports.sort_by(|a, b| {
        a.identity_id
            .cmp(&b.identity_id)
            .then_with(|| a.params_digest.cmp(&b.params_digest))
    });
    let summary = Summary::of(&reports);
    SuiteReport {
        suite: cfg.suite.name().to_string(),
        seed: cfg.seed,
        params,
        reports,
        summary,
    }
}
