//! Lax operators and dynamical r-matrices for Hitchin systems on curves
//! uniformised by Schottky groups.
//!
//! The crate evaluates the twisted Lax form `ξ(z)`, the `r`/`s` kernels and
//! their phase-space derivatives as Poincaré series over the free group, and
//! ships numerical certificates for the structural identities they satisfy:
//! twist equivariance, residue pairing, the r-matrix bracket, involutivity of
//! spectral invariants and the dynamical Yang–Baxter equation.
//!
//! Start with [`config::RunConfig`] or the reference generators in
//! [`config`], build a [`poincare::PoincareSeries`], and run checks from
//! [`verify`]. The `examples/` directory has one program per capability.

// `!(x < bound)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub(crate) mod dense;
pub mod error;
pub mod liealg;
pub mod moebius;
pub mod phasespace;
pub mod poincare;
pub mod quadrature;
pub(crate) mod serde_util;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
