//! Exact integer and finite-field algorithms for deciding when a random
//! integer matrix `M: Z^m -> Z^n` is surjective, together with the random
//! ensembles, closed-form limit probabilities and anti-concentration checks
//! used to test those predictions.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! file system, threads or the clock lives in the `latsurj` companion crate.

#![no_std]

extern crate alloc;

pub mod arith;
pub mod certifier;
pub mod ensembles;
mod error;
pub mod exposure;
pub mod factor;
pub mod fq;
pub mod linalg;
mod matrix;
pub mod modp;
pub mod predictions;

pub use error::{Error, Result};
pub use matrix::IntMatrix;
