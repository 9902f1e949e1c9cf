//! Subcommand execution and the error-to-exit-code map.

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::json;

use qselberg::gauss::{
    build_A_factors, build_K, build_R_factors, build_classical_M, compare, det_formula, max_scale,
    ClassicalParams, DetKind, GaussFactorization, Order,
};
use qselberg::interp::{eval_poly, EvalPoint, PolySpec};
use qselberg::jackson::{bracket, default_xi, BracketSpec, TruncationSpec};
use qselberg::qcore::sample_params;
use qselberg::verify::{run_suite, sample_classical, sample_convergent, SuiteConfig, SuiteName};
use qselberg::{Error, Params};

use crate::config::{parse_complex, parse_point, ParamsInput, RunConfig};
use crate::{Cli, Command, MatrixKind, ParamArgs};

pub const EXIT_FAILED_CHECKS: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_GEOMETRY: u8 = 3;
pub const EXIT_GENERICITY: u8 = 4;
pub const EXIT_CONVERGENCE: u8 = 5;
pub const EXIT_POLE: u8 = 6;
const EXIT_OTHER: u8 = 7;

pub struct Outcome {
    pub json: String,
    pub code: u8,
}

pub struct Failure {
    pub code: u8,
    pub message: String,
    pub json: String,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invalid(_) | Error::IndexOutOfRange(_) | Error::Unsupported(_) => EXIT_PARSE,
        Error::NearCoincident { .. } => EXIT_GEOMETRY,
        Error::NonGeneric { .. } | Error::Degenerate(_) | Error::DivisionByZero(_) => {
            EXIT_GENERICITY
        }
        Error::NotConverged { .. }
        | Error::ConditionViolated(_)
        | Error::NonConvergent(_)
        | Error::SeriesDiverged(_) => EXIT_CONVERGENCE,
        Error::PoleHit(_) => EXIT_POLE,
        Error::CapExceeded { .. } | Error::NonFinite(_) => EXIT_OTHER,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::DivisionByZero(_) => "DivisionByZero",
        Error::NonConvergent(_) => "NonConvergent",
        Error::NonGeneric { .. } => "NonGeneric",
        Error::CapExceeded { .. } => "CapExceeded",
        Error::NearCoincident { .. } => "NearCoincident",
        Error::IndexOutOfRange(_) => "IndexOutOfRange",
        Error::Unsupported(_) => "Unsupported",
        Error::NotConverged { .. } => "NotConverged",
        Error::ConditionViolated(_) => "ConditionViolated",
        Error::PoleHit(_) => "PoleHit",
        Error::Degenerate(_) => "Degenerate",
        Error::SeriesDiverged(_) => "SeriesDiverged",
        Error::NonFinite(_) => "NonFinite",
        Error::Invalid(_) => "ParseError",
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = exit_code(&e);
        let message = e.to_string();
        let json = to_json(&json!({ "error": kind(&e), "message": message, "exit_code": code }));
        Failure {
            code,
            message,
            json,
        }
    }
}

pub fn parse_failure_json(message: &str) -> String {
    to_json(&json!({ "error": "ParseError", "message": message, "exit_code": EXIT_PARSE }))
}

/// Comma-separated list of exactly `len` values.
fn parse_list<T: std::str::FromStr>(s: &str, len: usize, what: &str) -> Result<Vec<T>, Error> {
    let bad = |tok: &str| Error::Invalid(format!("cannot parse '{tok}' in {what} '{s}'"));
    let v = s
        .split(',')
        .map(|tok| tok.trim().parse::<T>().map_err(|_| bad(tok.trim())))
        .collect::<Result<Vec<T>, Error>>()?;
    if v.len() != len {
        return Err(Error::Invalid(format!(
            "{what} needs {len} comma-separated values, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eval { .. } => "eval",
        Command::Matrix { .. } => "matrix",
        Command::Integral { .. } => "integral",
        Command::Verify { .. } => "verify",
    }
}

fn opt_complex(s: &Option<String>) -> Result<Option<C64>, Error> {
    s.as_deref().map(parse_complex).transpose()
}

/// Parameters from the config file, or drawn from the seed, with flag
/// overrides applied on top.
fn resolve_params(
    cfg: &RunConfig,
    args: &ParamArgs,
    seed: u64,
    default_n: usize,
    convergent: bool,
) -> Result<Params, Error> {
    let mut p = match &cfg.params {
        Some(input) => {
            let p = input.resolve();
            args.n.map_or(p, |n| p.with_n(n))
        }
        None => {
            let n = args.n.unwrap_or(default_n);
            if convergent {
                sample_convergent(seed, n)?
            } else {
                sample_params(seed, n)?
            }
        }
    };
    if let Some(q) = opt_complex(&args.q)? {
        p.q = q;
    }
    if let Some(t) = opt_complex(&args.t)? {
        p.t = t;
    }
    if let Some(qa) = opt_complex(&args.qalpha)? {
        p.qalpha = qa;
    }
    let lq = p.q.ln();
    if let Some(tau) = args.tau {
        p.t = (lq * tau).exp();
    }
    if let Some(alpha) = args.alpha {
        p.qalpha = (lq * alpha).exp();
    }
    for (slot, arg) in [
        (&mut p.a1, &args.a1),
        (&mut p.a2, &args.a2),
        (&mut p.b1, &args.b1),
        (&mut p.b2, &args.b2),
    ] {
        if let Some(v) = opt_complex(arg)? {
            *slot = v;
        }
    }
    p.validate()?;
    Ok(p)
}

fn resolve_classical(
    cfg: &RunConfig,
    flags: &Option<String>,
    n: Option<usize>,
    seed: u64,
) -> Result<ClassicalParams, Error> {
    let mut cp = cfg
        .classical
        .unwrap_or_else(|| sample_classical(seed, n.unwrap_or(2)));
    if let Some(s) = flags {
        let v: Vec<f64> = parse_list(s, 5, "--classical")?;
        let r = |x: f64| C64::new(x, 0.0);
        cp.alpha = r(v[0]);
        cp.beta = r(v[1]);
        cp.gamma = r(v[2]);
        cp.tau = r(v[3]);
        cp.x = r(v[4]);
    }
    if let Some(n) = n {
        cp.n = n;
    }
    Ok(cp)
}

fn resolve_trunc(cfg: &RunConfig, cmd: &Command, n: usize, deterministic: bool) -> TruncationSpec {
    let mut trunc = cfg.trunc.unwrap_or_else(|| TruncationSpec::for_n(n));
    if let Command::Integral {
        radius,
        tail_tol,
        precision_bits,
        ..
    } = cmd
    {
        if let Some(r) = radius {
            trunc.radius = *r;
        }
        if let Some(t) = tail_tol {
            trunc.tail_tol = *t;
        }
        if let Some(b) = precision_bits {
            trunc.precision_bits = *b;
        }
    }
    trunc.deterministic |= deterministic;
    trunc
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let name = command_name(&cli.command);
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(
                Error::Invalid(format!("config is for command '{c}', not '{name}'")).into(),
            );
        }
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let mut resolved = RunConfig {
        command: Some(name.to_string()),
        seed: Some(seed),
        output_path: cfg.output_path.clone(),
        ..RunConfig::default()
    };
    let out = match &cli.command {
        Command::Eval { poly, z, params } => {
            let spec: PolySpec = poly.parse()?;
            let point = EvalPoint::new(parse_point(z)?);
            let mut args = params.clone();
            args.n = args.n.or(Some(point.n()));
            let p = resolve_params(&cfg, &args, seed, point.n(), false)?;
            if p.n != point.n() {
                return Err(Error::Invalid(format!(
                    "point has {} coordinates but n = {}",
                    point.n(),
                    p.n
                ))
                .into());
            }
            resolved.params = Some(ParamsInput::Direct(p));
            if cli.dump_config {
                return Ok(dump(&resolved));
            }
            let value = eval_poly(&spec, &p, &point)?;
            json!({ "spec": spec.to_string(), "point": point.coords, "params": p, "value": value })
        }
        Command::Matrix {
            which,
            order,
            check,
            classical,
            params,
        } => {
            let order: Order = order.parse()?;
            if let MatrixKind::M = which {
                let cp = resolve_classical(&cfg, classical, params.n, seed)?;
                resolved.classical = Some(cp);
                if cli.dump_config {
                    return Ok(dump(&resolved));
                }
                let f = build_classical_M(&cp, order)?;
                let opposite = if *check {
                    Some(build_classical_M(&cp, flip(order))?)
                } else {
                    None
                };
                factor_json("M", &json!(cp), &f, opposite.as_ref())
            } else {
                let p = resolve_params(&cfg, params, seed, 2, false)?;
                resolved.params = Some(ParamsInput::Direct(p));
                if cli.dump_config {
                    return Ok(dump(&resolved));
                }
                match which {
                    MatrixKind::R | MatrixKind::A => {
                        let build = if matches!(which, MatrixKind::R) {
                            build_R_factors
                        } else {
                            build_A_factors
                        };
                        let f = build(&p, order)?;
                        let opposite = if *check {
                            Some(build(&p, flip(order))?)
                        } else {
                            None
                        };
                        let label = if matches!(which, MatrixKind::R) {
                            "R"
                        } else {
                            "A"
                        };
                        factor_json(label, &json!(p), &f, opposite.as_ref())
                    }
                    _ => {
                        let (k, det_kind, label) = if matches!(which, MatrixKind::K1) {
                            (1, DetKind::K1, "K1")
                        } else {
                            (2, DetKind::K2, "K2")
                        };
                        let m = build_K(&p, k)?;
                        let mut v = json!({ "which": label, "params": p, "matrix": m });
                        if *check {
                            v["det_formula"] = json!(det_formula(&p, det_kind)?);
                            v["det_elimination"] = json!(m.det_elimination());
                        }
                        v
                    }
                }
            }
        }
        Command::Integral {
            poly,
            xi,
            alpha_shift,
            ab_shift,
            params,
            ..
        } => {
            let spec: PolySpec = poly.parse()?;
            let p = resolve_params(&cfg, params, seed, 1, true)?;
            let trunc = resolve_trunc(&cfg, &cli.command, p.n, cli.deterministic);
            trunc.validate()?;
            resolved.params = Some(ParamsInput::Direct(p));
            resolved.trunc = Some(trunc);
            if cli.dump_config {
                return Ok(dump(&resolved));
            }
            let xi = match xi {
                Some(s) => EvalPoint::new(parse_point(s)?),
                None => default_xi(&p, seed),
            };
            let mut b = BracketSpec::new(spec, xi, p);
            b.alpha_shift = *alpha_shift;
            if let Some(s) = ab_shift {
                let v: Vec<u32> = parse_list(s, 2, "--ab-shift")?;
                b.ab_shift = [v[0], v[1]];
            }
            let result = bracket(&b, &trunc)?;
            json!({
                "spec": spec.to_string(),
                "params": p,
                "xi": b.xi.coords,
                "alpha_shift": b.alpha_shift,
                "ab_shift": b.ab_shift,
                "trunc": trunc,
                "result": result,
            })
        }
        Command::Verify {
            suite,
            seeds,
            n_max,
            radius,
            out,
        } => {
            let suite: SuiteName = suite.parse()?;
            let defaults = SuiteConfig::default();
            let sc = SuiteConfig {
                suite,
                seed,
                draws: seeds.unwrap_or(defaults.draws),
                max_n_matrices: n_max.unwrap_or(defaults.max_n_matrices),
                max_n_polynomials: n_max.map_or(defaults.max_n_polynomials, |m| {
                    m.min(defaults.max_n_polynomials)
                }),
                radius: *radius,
                deterministic: cli.deterministic,
            };
            resolved.output_path = out.clone().or(resolved.output_path);
            if cli.dump_config {
                return Ok(dump(&resolved));
            }
            let report = run_suite(&sc);
            let text = to_json(&report);
            if let Some(path) = &resolved.output_path {
                std::fs::write(path, &text)
                    .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
            }
            let code = if report.summary.failed == 0 {
                0
            } else {
                EXIT_FAILED_CHECKS
            };
            return Ok(Outcome { json: text, code });
        }
    };
    Ok(Outcome {
        json: to_json(&out),
        code: 0,
    })
}

fn dump(cfg: &RunConfig) -> Outcome {
    Outcome {
        json: to_json(cfg),
        code: 0,
    }
}

fn flip(o: Order) -> Order {
    match o {
        Order::Ldu => Order::Udl,
        Order::Udl => Order::Ldu,
    }
}

fn factor_json(
    which: &str,
    params: &serde_json::Value,
    f: &GaussFactorization,
    opposite: Option<&GaussFactorization>,
) -> serde_json::Value {
    let product = f.product();
    let mut v = json!({
        "which": which,
        "order": f.order,
        "params": params,
        "factors": f,
        "product": product,
    });
    if let Some(g) = opposite {
        let r = compare(
            &product,
            &g.product(),
            &max_scale(&f.term_scale(), &g.term_scale()),
        );
        v["check"] = json!({ "opposite": g, "residual": r.max_rel, "worst_entry": r.worst });
    }
    v
}
