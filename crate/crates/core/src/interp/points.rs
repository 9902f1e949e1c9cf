use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Base, EvalPoint, Slot};
use crate::qcore::{powi, Error, Params, Result};

/// An argument of a special point: either a parameter slot or a free value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PointArg {
    Slot(Slot),
    Value(C64),
}

impl PointArg {
    pub fn resolve(self, p: &Params) -> C64 {
        match self {
            PointArg::Slot(s) => s.resolve(p),
            PointArg::Value(v) => v,
        }
    }
}

impl From<Slot> for PointArg {
    fn from(s: Slot) -> Self {
        PointArg::Slot(s)
    }
}

impl From<C64> for PointArg {
    fn from(v: C64) -> Self {
        PointArg::Value(v)
    }
}

/// Structured evaluation points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PointKind {
    /// `(y t^{-(j-1)}, …, y t^{-1}, y, x, x t, …, x t^{n-j-1})`.
    Zeta { x: PointArg, y: PointArg },
    /// `(x, x s, …, x s^{j-1}, y, y s, …, y s^{n-j-1})`.
    Xi {
        x: PointArg,
        y: PointArg,
        base: Base,
    },
    /// `(start s^{-(j-1)}, …, start)` followed by `n - j` free coordinates.
    PrefixDescending { start: PointArg, base: Base },
    /// `(start, start s, …, start s^{j-1})` followed by `n - j` free coordinates.
    PrefixAscending { start: PointArg, base: Base },
    /// `j` free coordinates followed by `(start, start s, …, start s^{n-j-1})`.
    SuffixAscending { start: PointArg, base: Base },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialPoint {
    pub kind: PointKind,
    pub j: usize,
    /// Free coordinates; only the prefix/suffix kinds use them.
    #[serde(default)]
    pub free: Vec<C64>,
}

impl SpecialPoint {
    pub fn zeta(j: usize, x: impl Into<PointArg>, y: impl Into<PointArg>) -> Self {
        SpecialPoint {
            kind: PointKind::Zeta {
                x: x.into(),
                y: y.into(),
            },
            j,
            free: vec![],
        }
    }

    pub fn xi(j: usize, x: impl Into<PointArg>, y: impl Into<PointArg>, base: Base) -> Self {
        SpecialPoint {
            kind: PointKind::Xi {
                x: x.into(),
                y: y.into(),
                base,
            },
            j,
            free: vec![],
        }
    }

    pub fn with_free(kind: PointKind, j: usize, free: Vec<C64>) -> Self {
        SpecialPoint { kind, j, free }
    }

    /// Number of free coordinates this point needs for dimension `n`.
    pub fn free_needed(&self, n: usize) -> usize {
        match self.kind {
            PointKind::Zeta { .. } | PointKind::Xi { .. } => 0,
            PointKind::PrefixDescending { .. } | PointKind::PrefixAscending { .. } => {
                n.saturating_sub(self.j)
            }
            PointKind::SuffixAscending { .. } => self.j,
        }
    }
}

fn progression(start: C64, ratio: C64, from: i64, len: usize) -> impl Iterator<Item = C64> {
    (0..len as i64).map(move |m| start * powi(ratio, from + m))
}

/// The literal coordinates of a special point in dimension `p.n`.
pub fn materialize(sp: &SpecialPoint, p: &Params) -> Result<EvalPoint> {
    let n = p.n;
    let j = sp.j;
    if j > n {
        return Err(Error::IndexOutOfRange(format!(
            "special point index j = {j} with n = {n}"
        )));
    }
    let need = sp.free_needed(n);
    if sp.free.len() != need {
        return Err(Error::Invalid(format!(
            "special point needs {need} free coordinates, got {}",
            sp.free.len()
        )));
    }
    let jj = j as i64;
    let coords: Vec<C64> = match sp.kind {
        PointKind::Zeta { x, y } => progression(y.resolve(p), p.t, -(jj - 1), j)
            .chain(progression(x.resolve(p), p.t, 0, n - j))
            .collect(),
        PointKind::Xi { x, y, base } => {
            let s = base.resolve(p);
            progression(x.resolve(p), s, 0, j)
                .chain(progression(y.resolve(p), s, 0, n - j))
                .collect()
        }
        PointKind::PrefixDescending { start, base } => {
            progression(start.resolve(p), base.resolve(p), -(jj - 1), j)
                .chain(sp.free.iter().copied())
                .collect()
        }
        PointKind::PrefixAscending { start, base } => {
            progression(start.resolve(p), base.resolve(p), 0, j)
                .chain(sp.free.iter().copied())
                .collect()
        }
        PointKind::SuffixAscending { start, base } => sp
            .free
            .iter()
            .copied()
            .chain(progression(start.resolve(p), base.resolve(p), 0, n - j))
            .collect(),
    };
    let z = EvalPoint::new(coords);
    z.check_nonzero()?;
    z.check_distinct()?;
    Ok(z)
}
