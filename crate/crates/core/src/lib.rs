//! Large deviations for one-dimensional projections of random points in ℓ^p balls.
//!
//! The crate computes the annealed, quenched and Cramér rate functions of the scaled projection
//! `W = n^{1/p − 1/2} ⟨X, θ⟩` of a uniform point `X` of `B_{n,p}` onto a direction `θ`, solves the
//! variational formula linking them over discretized measures, and runs Monte-Carlo experiments
//! against the computed rates.

pub mod acceptance;
pub mod error;
pub mod extreal;
pub mod legendre;
pub mod mc;
pub mod measures;
pub mod mgf;
pub mod numeric;
pub mod rates;

pub use error::{Error, Result};
