//! Run configuration: a JSON file merged with command-line flags, flags winning.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use qselberg::gauss::ClassicalParams;
use qselberg::jackson::TruncationSpec;
use qselberg::{Error, Params, Result};
use serde::{Deserialize, Serialize};

/// Parameters as stored, or with `t` and `qalpha` given through real
/// exponents of `q`. Exponents are converted on load and not kept.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsInput {
    Direct(Params),
    Exponents {
        q: C64,
        tau: f64,
        alpha: f64,
        a1: C64,
        a2: C64,
        b1: C64,
        b2: C64,
        n: usize,
    },
}

impl ParamsInput {
    pub fn resolve(&self) -> Params {
        match *self {
            ParamsInput::Direct(p) => p,
            ParamsInput::Exponents {
                q,
                tau,
                alpha,
                a1,
                a2,
                b1,
                b2,
                n,
            } => Params::from_exponents(q, tau, alpha, a1, a2, b1, b2, n),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trunc: Option<TruncationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Invalid(format!("config {}: {e}", path.display())))
    }
}

/// A complex number as `re`, `re,im` or `re+imi`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let bad = || Error::Invalid(format!("cannot parse complex number '{s}'"));
    let s = s.trim();
    let z = match s.split_once(',') {
        Some((re, im)) => C64::new(
            re.trim().parse().map_err(|_| bad())?,
            im.trim().parse().map_err(|_| bad())?,
        ),
        None => s.parse::<C64>().map_err(|_| bad())?,
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

/// A point as `;`-separated complex coordinates, or `,`-separated reals.
pub fn parse_point(s: &str) -> Result<Vec<C64>> {
    let parts: Vec<&str> = if s.contains(';') {
        s.split(';').collect()
    } else {
        s.split(',').collect()
    };
    parts
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(parse_complex)
        .collect()
}
