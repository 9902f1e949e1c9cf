//! `qselberg`: evaluate polynomials, build matrices, compute Jackson brackets
//! and run verification suites. Output is JSON on stdout; diagnostics go to
//! stderr.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{Failure, Outcome};

#[derive(Parser, Debug)]
#[command(name = "qselberg", version, about)]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sampled parameters, evaluation points and suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reproducible output: fixed reduction order and no timings in reports.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Print the resolved configuration instead of running.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

/// Parameter overrides. Complex values are `re`, `re,im` or `re+imi`.
#[derive(Args, Debug, Default, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub qalpha: Option<String>,
    /// Sets `t = q^tau`.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Sets `qalpha = q^alpha`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub a1: Option<String>,
    #[arg(long)]
    pub a2: Option<String>,
    #[arg(long)]
    pub b1: Option<String>,
    #[arg(long)]
    pub b2: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MatrixKind {
    R,
    A,
    K1,
    K2,
    M,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one polynomial, e.g. `etilde[2,1](a1,b2)` or `matsuo[1](a1,b2)`.
    Eval {
        #[arg(long)]
        poly: String,
        /// Coordinates: `z1,z2,...` for real points or `re,im;re,im;...`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Gauss factors of R, A or the classical M, or the matrices K1, K2.
    Matrix {
        #[arg(value_enum, ignore_case = true)]
        which: MatrixKind,
        /// `ldu` or `udl`.
        #[arg(long, default_value = "ldu")]
        order: String,
        /// Add the opposite decomposition and the residual between the two.
        #[arg(long)]
        check: bool,
        /// Classical parameters for M: alpha, beta, gamma, tau, x.
        #[arg(
            long,
            value_name = "ALPHA,BETA,GAMMA,TAU,X",
            allow_hyphen_values = true
        )]
        classical: Option<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Truncated Jackson bracket of one polynomial in the `Φ(ξ) = 1` gauge.
    Integral {
        #[arg(long)]
        poly: String,
        /// Base point; drawn from the seed when omitted.
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<String>,
        /// Number of `qalpha -> q qalpha` shifts applied to the bracket.
        #[arg(long, default_value_t = 0)]
        alpha_shift: u32,
        /// Shifts `(a_r, b_r) -> (q a_r, b_r / q)` for r = 1, 2.
        #[arg(long, value_name = "S1,S2")]
        ab_shift: Option<String>,
        /// Lattice radius `N`.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        tail_tol: Option<f64>,
        /// 53 or 106.
        #[arg(long)]
        precision_bits: Option<u32>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run a verification suite; exits 1 if any identity fails.
    Verify {
        /// matrices, polynomials, integrals-n1, integrals-n2, classical, all or none.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Parameter draws per dimension.
        #[arg(long)]
        seeds: Option<usize>,
        /// Largest n for the matrix, polynomial and classical suites.
        #[arg(long)]
        n_max: Option<usize>,
        /// Lattice radius for the integral suites.
        #[arg(long)]
        radius: Option<usize>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            let first_line = e.to_string().lines().next().unwrap_or_default().to_string();
            emit(&commands::parse_failure_json(&first_line));
            return ExitCode::from(commands::EXIT_PARSE);
        }
    };
    match commands::run(&cli) {
        Ok(Outcome { json, code }) => {
            emit(&json);
            ExitCode::from(code)
        }
        Err(Failure {
            code,
            message,
            json,
        }) => {
            eprintln!("error: {message}");
            emit(&json);
            ExitCode::from(code)
        }
    }
}

/// Print to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}
