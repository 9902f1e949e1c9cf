//! Numerical kernel for Selberg-type bilateral Jackson sums in `n` variables
//! and the q-difference systems they satisfy, with parameter pairs `(a1, b1)`, `(a2, b2)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: complex scalars, q-shifted factorials, q-binomials, infinite
//!   products, parameter tuples and the genericity scan.
//! * [`interp`]: Matsuo polynomials, the interpolation families `Ẽ_{k,i}` and
//!   `Ẽ'_{k,i}`, Lagrange polynomials of type A, special points and their
//!   closed-form evaluations.
//! * [`gauss`]: the transition matrix `R`, the coefficient matrices `K1`, `K2`
//!   and `A`, their Gauss decompositions, inverses and determinants, plus the
//!   classical matrix `M`.
//! * [`jackson`]: truncated bilateral lattice sums in the `Φ(ξ) = 1` gauge and
//!   the parameter shift operators realised as integrand multipliers.
//! * [`verify`]: residual checks for every identity, grouped into seeded suites
//!   with JSON reports.

pub mod gauss;
pub mod interp;
pub mod jackson;
pub mod qcore;
pub mod verify;

pub use num_complex::Complex64 as C64;
pub use qcore::{Error, Params, Result};
