//! Eigenvector self-overlaps (squared eigenvalue condition numbers) of real
//! and complex Ginibre matrices.
//!
//! The crate pairs exact finite-N and limiting densities of the self-overlap
//! `t = O_aa - 1` with a reproducible Monte Carlo sampler, and evaluates the
//! averaged determinant ratios whose Laplace transforms generate them.

mod dd;
mod rng;
pub mod ensemble;
pub mod error;
pub mod mc_harness;
pub mod analytic_complex;
pub mod analytic_real;
pub mod detratio;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
pub use quadrature::{Endpoint, Integral, QuadSpec};
