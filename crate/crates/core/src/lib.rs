//! Eigenvalue asymptotics for `(−Δ)^{M/2} + V` on flat tori via a
//! pseudodifferential normal form, checked against direct diagonalization of
//! truncated Fourier matrices.

pub mod error;
pub mod lattice;
pub mod symexpr;
pub mod cutoffs;
pub mod calculus;
pub mod config;
pub mod normalform;
pub mod quantize;
pub mod resonance;
pub mod spectra;
pub mod stats;
pub mod verify;
pub mod report;

pub use error::{Error, Result};
