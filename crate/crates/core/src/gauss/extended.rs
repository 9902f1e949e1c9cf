//! Double-double matrices for products and determinants of ill-conditioned
//! assemblies. Inputs are f64 matrices taken as exact; only the arithmetic
//! on them is carried at 106 bits.

use num_complex::{Complex, Complex64 as C64};
use num_traits::{One, Zero};
use twofloat::TwoFloat;

use super::CMatrix;

pub type DdComplex = Complex<TwoFloat>;

fn widen(z: C64) -> DdComplex {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

fn narrow(z: DdComplex) -> C64 {
    C64::new(f64::from(z.re), f64::from(z.im))
}

fn magnitude(z: &DdComplex) -> f64 {
    z.re.hi().abs() + z.im.hi().abs()
}

/// Square matrix with double-double complex entries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DdMatrix {
    dim: usize,
    data: Vec<DdComplex>,
}

impl DdMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        narrow(self.data[i * self.dim + j])
    }

    /// Product of f64 factors, left to right.
    pub fn product(factors: &[&CMatrix]) -> DdMatrix {
        let dim = factors.first().map_or(0, |m| m.dim());
        let mut acc = DdMatrix::from(&CMatrix::identity(dim));
        for f in factors {
            acc = acc.mul_plain(f);
        }
        acc
    }

    fn mul_plain(&self, rhs: &CMatrix) -> DdMatrix {
        let n = self.dim;
        assert_eq!(n, rhs.dim(), "dimension mismatch");
        let mut data = vec![DdComplex::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs[(k, j)];
                    if b != C64::new(0.0, 0.0) {
                        data[i * n + j] += a * widen(b);
                    }
                }
            }
        }
        DdMatrix { dim: n, data }
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det_elimination(&self) -> C64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = DdComplex::one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&r, &s| magnitude(&a[r * n + col]).total_cmp(&magnitude(&a[s * n + col])))
                .expect("non-empty pivot range");
            let pv = a[piv * n + col];
            if pv.is_zero() {
                return C64::new(0.0, 0.0);
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
                if !f.is_zero() {
                    for k in col..n {
                        let v = a[col * n + k];
                        a[r * n + k] -= f * v;
                    }
                }
            }
        }
        narrow(det)
    }
}

impl From<&CMatrix> for DdMatrix {
    fn from(m: &CMatrix) -> Self {
        let n = m.dim();
        DdMatrix {
            dim: n,
            data: (0..n * n).map(|k| widen(m[(k / n, k % n)])).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::c;

    #[test]
    fn small_determinants() {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(4.0, 1.0)],
        ])
        .unwrap();
        let d = DdMatrix::from(&m).det_elimination();
        assert!((d - c(-2.0, 1.0)).norm() < 1e-15);
        assert_eq!(
            DdMatrix::from(&CMatrix::zeros(0)).det_elimination(),
            c(1.0, 0.0)
        );
        assert_eq!(
            DdMatrix::from(&CMatrix::zeros(3)).det_elimination(),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn product_keeps_cancelled_digits() {
        // (1 + e)(1 - e) - 1 = -e², which f64 rounds to zero.
        let e = 2f64.powi(-30);
        let a = CMatrix::diagonal(&[c(1.0 + e, 0.0)]);
        let b = CMatrix::diagonal(&[c(1.0 - e, 0.0)]);
        let p = DdMatrix::product(&[&a, &b]);
        let low = p.data[0].re - TwoFloat::from(1.0);
        assert_eq!(f64::from(low), -e * e);
        assert_eq!(p.get(0, 0), (&a * &b)[(0, 0)]);
    }
}
