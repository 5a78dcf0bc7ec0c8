//! Numerical core for disordered long-range transverse-field Ising chains.
//!
//! Everything here is `no_std` with `alloc`: coupling construction (power law,
//! Kac normalization, trapped-ion normal modes), exact diagonalization and
//! time evolution, level statistics with thermal predictions, the
//! quantum Fisher information of the staggered magnetization, and a
//! non-interacting fermion control. IO, ensembles and the CLI live in the
//! `mbl-lab` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod ed;
pub mod fermion;
pub mod lattice;
pub mod observables;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
