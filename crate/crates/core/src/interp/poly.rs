use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{delta, skew_symmetrize_bounded, EvalOptions, EvalPoint};
use crate::qcore::{one, powi, vanishes, zero, Error, Params, Result};

/// A parameter (or its inverse) filling one argument of a polynomial family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    A1,
    A2,
    B1,
    B2,
    A1Inv,
    A2Inv,
    B1Inv,
    B2Inv,
}

impl Slot {
    pub fn resolve(self, p: &Params) -> C64 {
        match self {
            Slot::A1 => p.a1,
            Slot::A2 => p.a2,
            Slot::B1 => p.b1,
            Slot::B2 => p.b2,
            Slot::A1Inv => p.a1.inv(),
            Slot::A2Inv => p.a2.inv(),
            Slot::B1Inv => p.b1.inv(),
            Slot::B2Inv => p.b2.inv(),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Slot::A1 => "a1",
            Slot::A2 => "a2",
            Slot::B1 => "b1",
            Slot::B2 => "b2",
            Slot::A1Inv => "a1^-1",
            Slot::A2Inv => "a2^-1",
            Slot::B1Inv => "b1^-1",
            Slot::B2Inv => "b2^-1",
        }
    }

    pub fn inverse(self) -> Slot {
        match self {
            Slot::A1 => Slot::A1Inv,
            Slot::A2 => Slot::A2Inv,
            Slot::B1 => Slot::B1Inv,
            Slot::B2 => Slot::B2Inv,
            Slot::A1Inv => Slot::A1,
            Slot::A2Inv => Slot::A2,
            Slot::B1Inv => Slot::B1,
            Slot::B2Inv => Slot::B2,
        }
    }
}

impl FromStr for Slot {
    type Err = Error;
    fn from_str(s: &str) -> Result<Slot> {
        const ALL: [Slot; 8] = [
            Slot::A1,
            Slot::A2,
            Slot::B1,
            Slot::B2,
            Slot::A1Inv,
            Slot::A2Inv,
            Slot::B1Inv,
            Slot::B2Inv,
        ];
        let s = s.trim();
        ALL.into_iter()
            .find(|sl| sl.token() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown slot '{s}'")))
    }
}

/// Ratio of the geometric progressions used by the Lagrange family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Base {
    #[default]
    T,
    TInv,
}

impl Base {
    pub fn resolve(self, p: &Params) -> C64 {
        match self {
            Base::T => p.t,
            Base::TInv => p.t.inv(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `e_i(a,b;z)`.
    Matsuo { i: usize },
    /// `z_1⋯z_n e_i(a,b;z)`.
    MatsuoTimesProd { i: usize },
    /// Skew-symmetrized `E_{k,i}` divided by `Δ`.
    Etilde { k: usize, i: usize },
    /// Skew-symmetrized `E'_{k,i}` divided by `Δ`.
    EtildePrime { k: usize, i: usize },
    /// Lagrange interpolation polynomial `f_r`.
    LagrangeF { r: usize },
}

/// One member of a polynomial family with its argument slots.
///
/// For the interpolation families `(a, b)` are the two parameters; for
/// `LagrangeF` they are the two progression starts `(x, y)` and `base`
/// picks `t` or `t^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolySpec {
    pub family: Family,
    pub a: Slot,
    pub b: Slot,
    #[serde(default)]
    pub base: Base,
}

impl PolySpec {
    pub fn matsuo(i: usize, a: Slot, b: Slot) -> Self {
        PolySpec {
            family: Family::Matsuo { i },
            a,
            b,
            base: Base::T,
        }
    }

    pub fn etilde(k: usize, i: usize, a: Slot, b: Slot) -> Self {
        PolySpec {
            family: Family::Etilde { k, i },
            a,
            b,
            base: Base::T,
        }
    }

    pub fn etilde_prime(k: usize, i: usize, a: Slot, b: Slot) -> Self {
        PolySpec {
            family: Family::EtildePrime { k, i },
            a,
            b,
            base: Base::T,
        }
    }

    pub fn lagrange(r: usize, x: Slot, y: Slot, base: Base) -> Self {
        PolySpec {
            family: Family::LagrangeF { r },
            a: x,
            b: y,
            base,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let (k, i) = match self.family {
            Family::Matsuo { i } | Family::MatsuoTimesProd { i } => (0, i),
            Family::Etilde { k, i } | Family::EtildePrime { k, i } => (k, i),
            Family::LagrangeF { r } => (0, r),
        };
        if k > n || i > n {
            return Err(Error::IndexOutOfRange(format!("{self} with n = {n}")));
        }
        Ok(())
    }
}

impl fmt::Display for PolySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = (self.a.token(), self.b.token());
        match self.family {
            Family::Matsuo { i } => write!(f, "matsuo[{i}]({a},{b})"),
            Family::MatsuoTimesProd { i } => write!(f, "matsuoprod[{i}]({a},{b})"),
            Family::Etilde { k, i } => write!(f, "etilde[{k},{i}]({a},{b})"),
            Family::EtildePrime { k, i } => write!(f, "etildeprime[{k},{i}]({a},{b})"),
            Family::LagrangeF { r } => match self.base {
                Base::T => write!(f, "lagrange[{r}]({a},{b})"),
                Base::TInv => write!(f, "lagrange[{r}]({a},{b};tinv)"),
            },
        }
    }
}

impl FromStr for PolySpec {
    type Err = Error;

    /// Parses the form produced by `Display`, e.g. `etilde[2,1](a1,b2)` or
    /// `lagrange[0](b1^-1,b2^-1;tinv)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("cannot parse polynomial spec '{s}'"));
        let s = s.trim();
        let (name, rest) = s.split_once('[').ok_or_else(bad)?;
        let (idx, rest) = rest.split_once(']').ok_or_else(bad)?;
        let args = rest
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let idx: Vec<usize> = idx
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (args, base) = match args.split_once(';') {
            Some((a, "tinv")) => (a, Base::TInv),
            Some((a, "t")) => (a, Base::T),
            Some(_) => return Err(bad()),
            None => (args, Base::T),
        };
        let (a, b) = args.split_once(',').ok_or_else(bad)?;
        let (a, b) = (a.parse::<Slot>()?, b.parse::<Slot>()?);
        let family = match (name.trim(), idx.as_slice()) {
            ("matsuo", [i]) => Family::Matsuo { i: *i },
            ("matsuoprod", [i]) => Family::MatsuoTimesProd { i: *i },
            ("etilde", [k, i]) => Family::Etilde { k: *k, i: *i },
            ("etildeprime", [k, i]) => Family::EtildePrime { k: *k, i: *i },
            ("lagrange", [r]) => Family::LagrangeF { r: *r },
            ("matsuo" | "matsuoprod" | "lagrange", _) | ("etilde" | "etildeprime", _) => {
                return Err(Error::Invalid(format!(
                    "wrong number of indices '[{}]' for '{}' in '{s}'",
                    idx.iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    name.trim()
                )))
            }
            (other, _) => {
                return Err(Error::Invalid(format!(
                    "unknown polynomial family '{other}' in '{s}'"
                )))
            }
        };
        if base == Base::TInv && !matches!(family, Family::LagrangeF { .. }) {
            return Err(bad());
        }
        Ok(PolySpec { family, a, b, base })
    }
}

/// A value with the magnitude of the terms that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub value: C64,
    pub scale: f64,
}

/// `E_{k,i}(a,b;z) = z_1⋯z_k ∏_{j≤n-i}(1-b z_j) ∏_{j>n-i}(1-a^{-1}z_j) Δ(t;z)`.
pub fn big_e(k: usize, i: usize, a: C64, b: C64, t: C64, z: &[C64]) -> C64 {
    e_product(k, i, a, b, t, z, false).0
}

/// Like [`big_e`] with the monomial on the last `k` coordinates.
pub fn big_e_prime(k: usize, i: usize, a: C64, b: C64, t: C64, z: &[C64]) -> C64 {
    e_product(k, i, a, b, t, z, true).0
}

/// The product together with the product of its factor magnitudes, which
/// bounds the rounding error when factors nearly cancel.
pub(crate) fn e_product(
    k: usize,
    i: usize,
    a: C64,
    b: C64,
    t: C64,
    z: &[C64],
    prime: bool,
) -> (C64, f64) {
    let n = z.len();
    let tinv = t.inv();
    let ainv = a.inv();
    let mut p = one();
    let mut m = 1.0;
    for x in 0..n {
        for y in (x + 1)..n {
            p *= z[x] - tinv * z[y];
            m *= z[x].norm() + (tinv * z[y]).norm();
        }
    }
    let mono = if prime { &z[n - k..] } else { &z[..k] };
    for zj in mono {
        p *= zj;
        m *= zj.norm();
    }
    for zj in &z[..n - i] {
        p *= one() - b * zj;
        m *= 1.0 + (b * zj).norm();
    }
    for zj in &z[n - i..] {
        p *= one() - ainv * zj;
        m *= 1.0 + (ainv * zj).norm();
    }
    (p, m)
}

fn divided_skew<F>(f: F, z: &[C64], opts: &EvalOptions) -> Result<Evaluated>
where
    F: Fn(&[C64]) -> (C64, f64),
{
    EvalPoint::new(z.to_vec()).check_distinct()?;
    let s = skew_symmetrize_bounded(f, z, opts)?;
    let d = delta(z);
    Ok(Evaluated {
        value: s.value / d,
        scale: s.abs_sum / d.norm(),
    })
}

/// `Ẽ_{k,i}(a,b;z)`.
pub fn etilde(
    k: usize,
    i: usize,
    a: C64,
    b: C64,
    t: C64,
    z: &[C64],
    opts: &EvalOptions,
) -> Result<Evaluated> {
    check_ki(k, i, z.len())?;
    divided_skew(|w| e_product(k, i, a, b, t, w, false), z, opts)
}

/// `Ẽ'_{k,i}(a,b;z)`.
pub fn etilde_prime(
    k: usize,
    i: usize,
    a: C64,
    b: C64,
    t: C64,
    z: &[C64],
    opts: &EvalOptions,
) -> Result<Evaluated> {
    check_ki(k, i, z.len())?;
    divided_skew(|w| e_product(k, i, a, b, t, w, true), z, opts)
}

fn check_ki(k: usize, i: usize, n: usize) -> Result<()> {
    if k > n || i > n {
        return Err(Error::IndexOutOfRange(format!(
            "(k, i) = ({k}, {i}) with n = {n}"
        )));
    }
    Ok(())
}

fn checked_div(num: C64, den: C64, scale: f64, what: &str) -> Result<C64> {
    if vanishes(den, scale) {
        return Err(Error::DivisionByZero(what.to_string()));
    }
    Ok(num / den)
}

/// Lagrange interpolation polynomial `f_r(x,y;s;z)` by the recurrence in the
/// number of variables:
///
/// `f^{(m)}_i = (z_m - y s^{m-i})/(x s^{i-1} - y s^{m-i}) f^{(m-1)}_{i-1}
///            + (z_m - x s^i)/(y s^{m-i-1} - x s^i) f^{(m-1)}_i`.
pub fn lagrange_f(r: usize, x: C64, y: C64, s: C64, z: &[C64]) -> Result<Evaluated> {
    let n = z.len();
    if r > n {
        return Err(Error::IndexOutOfRange(format!("r = {r} with n = {n}")));
    }
    let scale = x.norm().max(y.norm());
    // (value, magnitude) per index.
    let mut prev = vec![(one(), 1.0)];
    for m in 1..=n {
        let zm = z[m - 1];
        let mut cur = vec![(zero(), 0.0); m + 1];
        for (i, slot) in cur.iter_mut().enumerate() {
            let mi = (m - i) as i64;
            let ii = i as i64;
            if i >= 1 {
                let den = x * powi(s, ii - 1) - y * powi(s, mi);
                let w = checked_div(
                    zm - y * powi(s, mi),
                    den,
                    scale,
                    "lagrange recurrence denominator",
                )?;
                slot.0 += w * prev[i - 1].0;
                slot.1 += w.norm() * prev[i - 1].1;
            }
            if i < m {
                let den = y * powi(s, mi - 1) - x * powi(s, ii);
                let w = checked_div(
                    zm - x * powi(s, ii),
                    den,
                    scale,
                    "lagrange recurrence denominator",
                )?;
                slot.0 += w * prev[i].0;
                slot.1 += w.norm() * prev[i].1;
            }
        }
        prev = cur;
    }
    Ok(Evaluated {
        value: prev[r].0,
        scale: prev[r].1,
    })
}

/// `f_r` as the explicit sum over `r`-subsets `I ⊂ {1..n}` (complement `J`):
/// `∏_k (z_{i_k} - y s^{i_k-k})/(x s^{k-1} - y s^{i_k-k}) ∏_l (z_{j_l} - x s^{j_l-l})/(y s^{l-1} - x s^{j_l-l})`.
pub fn lagrange_subset(r: usize, x: C64, y: C64, s: C64, z: &[C64]) -> Result<C64> {
    let n = z.len();
    if r > n {
        return Err(Error::IndexOutOfRange(format!("r = {r} with n = {n}")));
    }
    let scale = x.norm().max(y.norm());
    let mut total = zero();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != r {
            continue;
        }
        let mut term = one();
        let (mut k, mut l) = (0i64, 0i64);
        for (pos, zp) in z.iter().enumerate() {
            let idx = pos as i64 + 1;
            if mask & (1 << pos) != 0 {
                k += 1;
                let den = x * powi(s, k - 1) - y * powi(s, idx - k);
                term *= checked_div(
                    zp - y * powi(s, idx - k),
                    den,
                    scale,
                    "lagrange subset denominator",
                )?;
            } else {
                l += 1;
                let den = y * powi(s, l - 1) - x * powi(s, idx - l);
                term *= checked_div(
                    zp - x * powi(s, idx - l),
                    den,
                    scale,
                    "lagrange subset denominator",
                )?;
            }
        }
        total += term;
    }
    Ok(total)
}

/// Evaluate with default options.
pub fn eval_poly(spec: &PolySpec, p: &Params, z: &EvalPoint) -> Result<C64> {
    eval_poly_with(spec, p, z, &EvalOptions::default()).map(|e| e.value)
}

/// Evaluate and report the term scale alongside the value.
pub fn eval_poly_with(
    spec: &PolySpec,
    p: &Params,
    z: &EvalPoint,
    opts: &EvalOptions,
) -> Result<Evaluated> {
    let n = z.n();
    spec.validate(n)?;
    z.check_nonzero()?;
    let (a, b) = (spec.a.resolve(p), spec.b.resolve(p));
    let zc = &z.coords;
    match spec.family {
        Family::Matsuo { i } => etilde(0, i, a, b, p.t, zc, opts),
        Family::MatsuoTimesProd { i } => {
            let prod: C64 = zc.iter().product();
            let e = etilde(0, i, a, b, p.t, zc, opts)?;
            Ok(Evaluated {
                value: prod * e.value,
                scale: prod.norm() * e.scale,
            })
        }
        Family::Etilde { k, i } => etilde(k, i, a, b, p.t, zc, opts),
        Family::EtildePrime { k, i } => etilde_prime(k, i, a, b, p.t, zc, opts),
        Family::LagrangeF { r } => {
            let s = spec.base.resolve(p);
            match opts.lagrange {
                super::LagrangeMethod::Recurrence => lagrange_f(r, a, b, s, zc),
                super::LagrangeMethod::SubsetSum => {
                    let v = lagrange_subset(r, a, b, s, zc)?;
                    Ok(Evaluated {
                        value: v,
                        scale: v.norm(),
                    })
                }
            }
        }
    }
}

/// `φ(z) Δ(z)` without the division by `Δ`, so nearly coincident
/// coordinates (as met on a lattice) are harmless.
pub fn eval_times_delta(spec: &PolySpec, p: &Params, z: &[C64], opts: &EvalOptions) -> Result<C64> {
    let n = z.len();
    spec.validate(n)?;
    let (a, b) = (spec.a.resolve(p), spec.b.resolve(p));
    let skew = |k: usize, i: usize, prime: bool| {
        skew_symmetrize_bounded(|w| e_product(k, i, a, b, p.t, w, prime), z, opts).map(|s| s.value)
    };
    match spec.family {
        Family::Matsuo { i } => skew(0, i, false),
        Family::MatsuoTimesProd { i } => Ok(z.iter().product::<C64>() * skew(0, i, false)?),
        Family::Etilde { k, i } => skew(k, i, false),
        Family::EtildePrime { k, i } => skew(k, i, true),
        Family::LagrangeF { r } => {
            let s = spec.base.resolve(p);
            Ok(lagrange_f(r, a, b, s, z)?.value * delta(z))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{c, sample_params};

    fn rel(u: C64, v: C64) -> f64 {
        (u - v).norm() / u.norm().max(v.norm()).max(1e-300)
    }

    fn point(seed: u64, n: usize) -> EvalPoint {
        let p = sample_params(seed, 1).unwrap();
        let src = [p.a1, p.a2, p.b1, p.b2, p.t, p.qalpha];
        let mut v: Vec<C64> = src.iter().take(n).copied().collect();
        while v.len() < n {
            let k = v.len();
            v.push(src[k % 6] * c(0.9, 0.3 * k as f64));
        }
        EvalPoint::new(v)
    }

    #[test]
    fn spec_round_trip() {
        for s in [
            "matsuo[2](a1,b2)",
            "etilde[3,1](a2,b1)",
            "etildeprime[0,4](a1,b2)",
            "matsuoprod[1](a1,b2)",
            "lagrange[2](a1,a2)",
            "lagrange[0](b1^-1,b2^-1;tinv)",
        ] {
            let spec: PolySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("etilde[1](a1,b2)".parse::<PolySpec>().is_err());
        assert!("matsuo[1](a1,b2;tinv)".parse::<PolySpec>().is_err());
        assert!("matsuo[1](a1,c3)".parse::<PolySpec>().is_err());
    }

    #[test]
    fn etilde_top_index_is_product_times_matsuo() {
        let p = sample_params(5, 4).unwrap();
        let z = point(6, 4);
        for i in 0..=4 {
            let lhs = eval_poly(&PolySpec::etilde(4, i, Slot::A1, Slot::B2), &p, &z).unwrap();
            let rhs = eval_poly(
                &PolySpec {
                    family: Family::MatsuoTimesProd { i },
                    a: Slot::A1,
                    b: Slot::B2,
                    base: Base::T,
                },
                &p,
                &z,
            )
            .unwrap();
            assert!(rel(lhs, rhs) < 1e-12);
        }
    }

    #[test]
    fn families_are_symmetric() {
        let p = sample_params(8, 5).unwrap();
        let z = point(9, 5);
        let mut w = z.clone();
        w.coords.swap(0, 3);
        w.coords.swap(1, 4);
        for spec in [
            PolySpec::matsuo(2, Slot::A2, Slot::B1),
            PolySpec::etilde(3, 1, Slot::A1, Slot::B2),
            PolySpec::etilde_prime(2, 4, Slot::A1, Slot::B2),
            PolySpec::lagrange(2, Slot::A1, Slot::A2, Base::T),
            PolySpec::lagrange(3, Slot::B1Inv, Slot::B2Inv, Base::TInv),
        ] {
            let u = eval_poly(&spec, &p, &z).unwrap();
            let v = eval_poly(&spec, &p, &w).unwrap();
            assert!(rel(u, v) < 1e-10, "{spec}: {u} vs {v}");
        }
    }

    #[test]
    fn recurrence_matches_subset_sum() {
        let p = sample_params(12, 6).unwrap();
        for n in 1..=6 {
            let z = point(13 + n as u64, n);
            for r in 0..=n {
                let a = lagrange_f(r, p.a1, p.a2, p.t, &z.coords).unwrap().value;
                let b = lagrange_subset(r, p.a1, p.a2, p.t, &z.coords).unwrap();
                assert!(rel(a, b) < 1e-10, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn lagrange_swap_symmetry() {
        let p = sample_params(21, 4).unwrap();
        let z = point(22, 4);
        for r in 0..=4 {
            let a = lagrange_f(r, p.a1, p.a2, p.t, &z.coords).unwrap().value;
            let b = lagrange_f(4 - r, p.a2, p.a1, p.t, &z.coords).unwrap().value;
            assert!(rel(a, b) < 1e-10);
        }
    }

    #[test]
    fn lagrange_sums_to_one() {
        // The f_r interpolate the constant function 1.
        let p = sample_params(23, 3).unwrap();
        let z = point(24, 3);
        let s: C64 = (0..=3)
            .map(|r| lagrange_f(r, p.a1, p.a2, p.t, &z.coords).unwrap().value)
            .sum();
        assert!((s - one()).norm() < 1e-10);
    }

    #[test]
    fn coincident_points_rejected() {
        let p = sample_params(1, 2).unwrap();
        let z = EvalPoint::new(vec![c(0.5, 0.1), c(0.5, 0.1)]);
        let err = eval_poly(&PolySpec::matsuo(0, Slot::A1, Slot::B2), &p, &z).unwrap_err();
        assert!(matches!(err, Error::NearCoincident { .. }));
        // Lagrange polynomials do not divide by Δ.
        assert!(eval_poly(&PolySpec::lagrange(1, Slot::A1, Slot::A2, Base::T), &p, &z).is_ok());
    }

    #[test]
    fn index_out_of_range() {
        let p = sample_params(1, 2).unwrap();
        let z = point(2, 2);
        let err = eval_poly(&PolySpec::matsuo(3, Slot::A1, Slot::B2), &p, &z).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange(_)));
    }

    #[test]
    fn n_one_matsuo_is_linear() {
        // e_0 = 1 - b z, e_1 = 1 - z/a for a single variable.
        let p = sample_params(3, 1).unwrap();
        let z = EvalPoint::new(vec![c(0.4, -0.7)]);
        let e0 = eval_poly(&PolySpec::matsuo(0, Slot::A1, Slot::B2), &p, &z).unwrap();
        let e1 = eval_poly(&PolySpec::matsuo(1, Slot::A1, Slot::B2), &p, &z).unwrap();
        assert!(rel(e0, one() - p.b2 * z.coords[0]) < 1e-15);
        assert!(rel(e1, one() - z.coords[0] / p.a1) < 1e-15);
    }
}
