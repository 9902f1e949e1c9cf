//! Explicitly factorized matrices: the transition matrix `R`, its inverse,
//! the coefficient matrices `K1`, `K2` and `A`, the intermediate triangular
//! matrices met while deriving them, and the classical matrix `M`.
//!
//! Entries are produced by one closure per displayed formula; nothing here
//! inverts or factors a matrix numerically, except the elimination
//! determinant and [`CMatrix::inverse`], which serve as independent oracles.

mod classical;
mod entries;
mod extended;
mod three_term;

pub use classical::{build_classical_M, classical_reference_n1, ClassicalParams};
pub use entries::{
    build_A_factors, build_K, build_K_factors, build_R_direct, build_R_direct_with,
    build_R_factors, build_R_inverse, build_intermediate, det_formula, DetKind, Intermediate,
};
pub use extended::{DdComplex, DdMatrix};
pub use three_term::{expand_by_steps, iterated_coeff, single_step, StepFamily};

use std::fmt;
use std::ops::{Index, IndexMut, Mul};
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::qcore::{one, zero, Error, Result};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn try_from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Result<C64>) -> Result<Self> {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j)?;
            }
        }
        Ok(m)
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Invalid("matrix rows must form a square".into()));
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data
            .chunks(self.dim.max(1))
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn diag_entries(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: C64) -> Self {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn is_lower(&self) -> bool {
        (0..self.dim).all(|i| ((i + 1)..self.dim).all(|j| self[(i, j)] == zero()))
    }

    pub fn is_upper(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self[(i, j)] == zero()))
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_lower() && self.is_upper()
    }

    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.dim).all(|i| self[(i, i)] == one())
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det_elimination(&self) -> C64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
                .unwrap();
            let pv = a[piv * n + col];
            if pv == zero() {
                return zero();
            }
            if piv != col {
                for k in 0..n {
                    a.swap(piv * n + k, col * n + k);
                }
                det = -det;
            }
            det *= pv;
            for r in (col + 1)..n {
                let f = a[r * n + col] / pv;
                if f != zero() {
                    for k in col..n {
                        let v = a[col * n + k];
                        a[r * n + k] -= f * v;
                    }
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        let scale = self.max_abs();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&r, &s| a[(r, col)].norm().total_cmp(&a[(s, col)].norm()))
                .unwrap();
            let pv = a[(piv, col)];
            if pv.norm() <= f64::EPSILON * scale {
                return Err(Error::DivisionByZero("singular matrix".into()));
            }
            for k in 0..n {
                a.data.swap(piv * n + k, col * n + k);
                inv.data.swap(piv * n + k, col * n + k);
            }
            for k in 0..n {
                a[(col, k)] /= pv;
                inv[(col, k)] /= pv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f != zero() {
                    for k in 0..n {
                        let (u, v) = (a[(col, k)], inv[(col, k)]);
                        a[(r, k)] -= f * u;
                        inv[(r, k)] -= f * v;
                    }
                }
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Row-major array of rows, each entry a `[re, im]` pair.
impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.dim))?;
        for row in self.data.chunks(self.dim.max(1)) {
            let pairs: Vec<[f64; 2]> = row.iter().map(|z| [z.re, z.im]).collect();
            seq.serialize_element(&pairs)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        CMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `max_k S_ik |B_kj|`: the largest single term feeding each entry of a product.
fn max_term_product(s: &[f64], b: &CMatrix) -> Vec<f64> {
    let n = b.dim;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = s[i * n + k];
            if x == 0.0 {
                continue;
            }
            for j in 0..n {
                let v = x * b[(k, j)].norm();
                if v > out[i * n + j] {
                    out[i * n + j] = v;
                }
            }
        }
    }
    out
}

/// Per-entry scale of the product `F_1 F_2 ⋯`: the largest modulus of a single
/// product of factor entries contributing to that entry.
pub fn term_scale(factors: &[&CMatrix]) -> Vec<f64> {
    let mut s = factors[0].abs();
    for f in &factors[1..] {
        s = max_term_product(&s, f);
    }
    s
}

/// Worst entrywise discrepancy between two matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixResidual {
    pub max_abs: f64,
    /// `max |a_ij - b_ij| / max(scale_ij, |a_ij|, |b_ij|)`.
    pub max_rel: f64,
    pub worst: (usize, usize),
}

/// Compare `a` and `b` entry by entry against the per-entry `scale`.
pub fn compare(a: &CMatrix, b: &CMatrix, scale: &[f64]) -> MatrixResidual {
    assert_eq!(a.dim, b.dim, "dimension mismatch");
    let mut r = MatrixResidual {
        max_abs: 0.0,
        max_rel: 0.0,
        worst: (0, 0),
    };
    for i in 0..a.dim {
        for j in 0..a.dim {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            let d = (x - y).norm();
            if d == 0.0 {
                continue;
            }
            let sc = scale[i * a.dim + j].max(x.norm()).max(y.norm());
            let rel = if sc > 0.0 { d / sc } else { f64::INFINITY };
            r.max_abs = r.max_abs.max(d);
            // NaN residuals must win.
            if rel.is_nan() || rel > r.max_rel {
                r.max_rel = rel;
                r.worst = (i, j);
            }
        }
    }
    r
}

/// Entrywise maximum of two scales.
pub fn max_scale(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x.max(*y)).collect()
}

/// Which side the lower factor sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    /// `L D U`.
    #[serde(rename = "LDU")]
    Ldu,
    /// `U' D' L'`.
    #[serde(rename = "UDL")]
    Udl,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Ldu => "LDU",
            Order::Udl => "UDL",
        })
    }
}

impl FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Order> {
        match s.to_ascii_uppercase().as_str() {
            "LDU" => Ok(Order::Ldu),
            "UDL" => Ok(Order::Udl),
            _ => Err(Error::Invalid(format!("unknown factorization order {s:?}"))),
        }
    }
}

/// A matrix given as unit-triangular and diagonal factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussFactorization {
    pub order: Order,
    pub lower: CMatrix,
    pub diag: CMatrix,
    pub upper: CMatrix,
}

impl GaussFactorization {
    /// Factors in multiplication order.
    pub fn factors(&self) -> [&CMatrix; 3] {
        match self.order {
            Order::Ldu => [&self.lower, &self.diag, &self.upper],
            Order::Udl => [&self.upper, &self.diag, &self.lower],
        }
    }

    pub fn product(&self) -> CMatrix {
        let [x, y, z] = self.factors();
        &(x * y) * z
    }

    pub fn term_scale(&self) -> Vec<f64> {
        term_scale(&self.factors())
    }

    /// Determinant as the product of the diagonal factor.
    pub fn diag_product(&self) -> C64 {
        self.diag.diag_entries().iter().product()
    }

    /// Unit lower, diagonal and unit upper, with exact zeros off the triangles.
    pub fn is_well_formed(&self) -> bool {
        self.lower.is_lower()
            && self.lower.has_unit_diagonal()
            && self.upper.is_upper()
            && self.upper.has_unit_diagonal()
            && self.diag.is_diagonal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::c;

    fn sample() -> CMatrix {
        CMatrix::from_fn(3, |i, j| c(1.0 + i as f64 * 0.3, j as f64 - 0.7 * i as f64))
    }

    #[test]
    fn elimination_det_small() {
        let m = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.0)],
            vec![c(4.0, 0.0), c(3.0, 0.0)],
        ])
        .unwrap();
        assert!((m.det_elimination() - c(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(CMatrix::identity(4).det_elimination(), one());
        assert_eq!(CMatrix::zeros(2).det_elimination(), zero());
        assert_eq!(CMatrix::zeros(0).det_elimination(), one());
    }

    #[test]
    fn inverse_round_trip() {
        let m = sample();
        let mut m2 = m.clone();
        m2[(0, 0)] += c(3.0, 1.0);
        let inv = m2.inverse().unwrap();
        let r = compare(
            &(&m2 * &inv),
            &CMatrix::identity(3),
            &term_scale(&[&m2, &inv]),
        );
        assert!(r.max_rel < 1e-14, "{r:?}");
        let det = m2.det_elimination() * inv.det_elimination();
        assert!((det - one()).norm() < 1e-13);
    }

    #[test]
    fn serializes_as_pairs() {
        let m = CMatrix::diagonal(&[c(1.0, 2.0), c(0.0, -1.0)]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[1.0,2.0],[0.0,0.0]],[[0.0,0.0],[0.0,-1.0]]]");
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn term_scale_is_max_single_term() {
        let a =
            CMatrix::from_rows(&[vec![c(1.0, 0.0), c(-1.0, 0.0)], vec![zero(), one()]]).unwrap();
        let b = CMatrix::from_rows(&[vec![c(5.0, 0.0), zero()], vec![c(5.0, 0.0), one()]]).unwrap();
        let s = term_scale(&[&a, &b]);
        assert_eq!(s, vec![5.0, 1.0, 5.0, 1.0]);
        assert_eq!((&a * &b)[(0, 0)], zero());
    }

    #[test]
    fn compare_reports_worst_entry() {
        let a = sample();
        let mut b = a.clone();
        b[(2, 1)] += c(1e-6, 0.0);
        let r = compare(&a, &b, &a.abs());
        assert_eq!(r.worst, (2, 1));
        assert!(r.max_abs > 0.9e-6 && r.max_abs < 1.1e-6);
    }

    #[test]
    fn order_parses() {
        assert_eq!("ldu".parse::<Order>().unwrap(), Order::Ldu);
        assert_eq!("UDL".parse::<Order>().unwrap(), Order::Udl);
        assert!("LU".parse::<Order>().is_err());
    }
}
