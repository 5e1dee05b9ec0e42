//! Minimal Clifford measurement shadow estimation over mutually unbiased bases.
//!
//! The crate builds the `2^n + 1` element MUB ensemble from GF(2^n)
//! arithmetic, synthesizes each element as an `S`/`CZ`/`H` circuit, simulates
//! measurements on dense state vectors, and evaluates uniform and biased
//! shadow estimators together with full-Clifford and Pauli baselines.

pub mod basis;
pub mod biased;
pub mod circuit;
pub mod error;
pub mod f2linalg;
pub mod gf2n;
pub mod mub;
pub mod pauli;
pub mod rng;
pub mod shadow;
pub mod statesim;
pub mod stats;

pub use error::{Error, Result};
