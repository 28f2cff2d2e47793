//! Riesz fractional calculus on Lizorkin test-function spaces.
//!
//! The crate evaluates Riesz kernels and their regularized pairings, applies
//! the Riesz operator `D^alpha` as the Fourier multiplier `|xi|^alpha`,
//! estimates quasi-asymptotic degrees from scaled pairings, and checks the
//! Tauberian transfer laws between a distribution, its Fourier transform and
//! its Riesz images.

pub mod cli;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod lizorkin;
pub mod quad;
pub mod quasiasym;
pub mod riesz;
pub mod special;
pub mod tauberian;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
