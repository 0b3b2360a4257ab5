//! Computable objects behind small-singular-value bounds for sparse
//! μ-lazy random matrices.
//!
//! Everything here is pure computation and works without `std` (only
//! `alloc` is required). The `std` feature switches on a fast transform for
//! large moduli in the F_p Fourier law; IO, reports and the CLI live in the
//! companion `lazysv` crate.
//!
//! Module map:
//! - [`types`], [`prime`]: domain types and primality helpers.
//! - [`sample`]: counter-based reproducible sampling.
//! - [`atom`]: exact and Monte Carlo laws of lazy random walks.
//! - [`lcd`]: certified least common denominators.
//! - [`fpstruct`]: F_p solution counting, level sets, B-sets and W_t classes.
//! - [`bounds`]: bound evaluators, constant calibration, log-space replay.
//! - [`linalg`], [`spectral`]: singular values, exact rank, tail experiments.
//! - [`runner`]: serial trial execution; parallel runners plug in here.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod atom;
pub mod bounds;
mod error;
pub mod fpstruct;
pub mod lcd;
pub mod linalg;
pub mod math;
pub mod prime;
pub mod runner;
pub mod sample;
pub mod spectral;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    support_size, Budgets, CalibrationConstants, FpVector, IntVector, LazyDist, UnitVector,
};
