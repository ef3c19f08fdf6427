//! Nonreciprocal tight-binding lattices.
//!
//! Builds 1D chains and 2D square lattices with asymmetric hoppings, maps them
//! through imaginary gauge transformations, checks pseudo-Hermiticity, computes
//! generalized Brillouin zones and skin-mode localization, and evaluates the
//! sublattice Zak phase that counts boundary states.
#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod gauge;
pub mod gbz;
pub mod lattice;
pub mod linalg;
pub mod spectral;
pub mod topology;

pub use error::{Error, Result};
pub use linalg::{Matrix, C64};
