//! Pseudo-spectral toolkit for the periodic fractional operator `(−Δ+m²)^s` on
//! the torus `(0,T)^N`.
//!
//! The crate covers the operator and its spectrum, the s-harmonic extension to
//! the half-cylinder `(0,T)^N × (0,∞)`, the energy functional of the
//! asymptotically linear problem `(−Δ+m²)^s u = λ∞ u + f(x,u)`, and a
//! critical-point solver (direct minimization and deflated Newton–Krylov).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod checks;
pub mod commands;
pub mod config;
pub mod energy;
pub mod error;
pub mod extension;
mod fft;
pub mod hypotheses;
pub mod io;
pub mod nonlinearity;
pub mod operator;
pub mod quadrature;
pub mod solver;
pub mod spectrum;
pub mod torus;

pub use error::{Error, Result};
pub use torus::{FourierField, GridField, ModeLattice, TorusConfig};
