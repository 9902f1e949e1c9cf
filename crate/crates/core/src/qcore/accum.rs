//! Summation with selectable compensation.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Error, Result};

/// Working precision for accumulations.
///
/// `Double` (53 bits) sums plainly inside skew-symmetrization and with
/// Neumaier compensation in lattice sums. `DoubleDouble` (106 bits) keeps a
/// double-double accumulator everywhere; individual terms stay in f64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Precision {
    #[default]
    Double,
    DoubleDouble,
}

impl Precision {
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            53 => Ok(Precision::Double),
            106 => Ok(Precision::DoubleDouble),
            b => Err(Error::Invalid(format!(
                "precision_bits must be 53 or 106, got {b}"
            ))),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Precision::Double => 53,
            Precision::DoubleDouble => 106,
        }
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Neumaier's variant of Kahan summation, per component.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: C64,
    comp: C64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: C64) {
        let (s_re, e_re) = two_sum(self.sum.re, x.re);
        let (s_im, e_im) = two_sum(self.sum.im, x.im);
        self.sum = C64::new(s_re, s_im);
        self.comp += C64::new(e_re, e_im);
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

/// Double-double accumulator: the running sum is kept as an unevaluated
/// pair `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoSumAcc {
    hi: [f64; 2],
    lo: [f64; 2],
}

impl TwoSumAcc {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn add_part(hi: &mut f64, lo: &mut f64, x: f64) {
        let (s, e) = two_sum(*hi, x);
        let e = e + *lo;
        let h = s + e;
        *lo = e - (h - s);
        *hi = h;
    }

    #[inline]
    pub fn add(&mut self, x: C64) {
        Self::add_part(&mut self.hi[0], &mut self.lo[0], x.re);
        Self::add_part(&mut self.hi[1], &mut self.lo[1], x.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.hi[0] + self.lo[0], self.hi[1] + self.lo[1])
    }
}

/// Accumulator whose compensation scheme is chosen at run time.
#[derive(Debug, Clone, Copy)]
pub enum Accumulator {
    Plain(C64),
    Neumaier(NeumaierSum),
    DoubleDouble(TwoSumAcc),
}

impl Accumulator {
    /// Plain summation at 53 bits, double-double at 106.
    pub fn for_products(p: Precision) -> Self {
        match p {
            Precision::Double => Accumulator::Plain(C64::new(0.0, 0.0)),
            Precision::DoubleDouble => Accumulator::DoubleDouble(TwoSumAcc::new()),
        }
    }

    /// Neumaier at 53 bits, double-double at 106.
    pub fn for_series(p: Precision) -> Self {
        match p {
            Precision::Double => Accumulator::Neumaier(NeumaierSum::new()),
            Precision::DoubleDouble => Accumulator::DoubleDouble(TwoSumAcc::new()),
        }
    }

    #[inline]
    pub fn add(&mut self, x: C64) {
        match self {
            Accumulator::Plain(s) => *s += x,
            Accumulator::Neumaier(s) => s.add(x),
            Accumulator::DoubleDouble(s) => s.add(x),
        }
    }

    pub fn value(&self) -> C64 {
        match self {
            Accumulator::Plain(s) => *s,
            Accumulator::Neumaier(s) => s.value(),
            Accumulator::DoubleDouble(s) => s.value(),
        }
    }
}
