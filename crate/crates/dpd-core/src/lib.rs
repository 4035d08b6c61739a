//! Robust parametric estimation and composite hypothesis testing based on the
//! density power divergence (DPD).
//!
//! The crate fits unconstrained and constrained minimum-DPD estimators,
//! computes the DPD test statistic with its chi-square-mixture null
//! calibration, approximates power and required sample sizes, selects the
//! tuning parameter from data, and runs seeded Monte Carlo level/power
//! experiments.
//!
//! The crate is `no_std` (with `alloc`): all floating-point math is routed
//! through [`libm`], so the engine can be embedded anywhere a heap exists.
//! File formats, CSV ingestion and the command line live in the companion
//! `dpd-cli` crate.
//!
//! # Layout
//!
//! - [`numerics`] — quadrature, minimization, symmetric eigendecomposition,
//!   special functions, splittable RNG streams.
//! - [`models`] — the [`models::ParametricModel`] abstraction plus the normal
//!   and Weibull families with their closed-form integral hooks.
//! - [`divergence`] — the DPD `d_γ(f, g)` between family members and the
//!   empirical objective/estimating function.
//! - [`estimation`] — minimum-DPD estimators, unconstrained (`θ̂_β`) and
//!   restricted to `g(θ) = 0` (`θ̃_β`).
//! - [`asymptotics`] — the J/K/ξ/A matrices, the constrained projections
//!   P/Q/B, the RMDPDE covariance Σ, and the null eigenvalue spectrum.
//! - [`testing`] — the DPD test statistic, chi-square-mixture quantiles and
//!   p-values, the signed one-sided variant, and a Student t baseline.
//! - [`power`] — power approximation at fixed alternatives, sample-size
//!   inversion, and the contiguous-alternative distribution.
//! - [`tuning`] — data-driven selection of β against a robust pilot fit.
//! - [`simulation`] — seeded, reproducible level/power Monte Carlo harness.
//!
//! # Example
//!
//! Fit a robust location/scale estimate and test `H₀: μ = 0`:
//!
//! ```
//! use dpd_core::divergence::Dataset;
//! use dpd_core::estimation::fit_mdpde;
//! use dpd_core::models::{ConstraintSpec, NormalModel};
//! use dpd_core::testing::dpd_test;
//!
//! let data = Dataset::new(vec![-0.4, 0.1, 0.3, 0.9, 1.4, 8.0], "toy").unwrap();
//! let model = NormalModel;
//! let fit = fit_mdpde(&model, &data, 0.25, None).unwrap();
//! assert!(fit.converged);
//!
//! let constraint = ConstraintSpec::pin(0, 0.0, "mu = 0");
//! let test = dpd_test(&model, &data, 0.25, 0.25, &constraint, 0.05, 1_000_000, 7).unwrap();
//! assert!(test.p_value > 0.0 && test.p_value <= 1.0);
//! ```

#![no_std]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;

pub mod asymptotics;
pub mod divergence;
pub mod estimation;
pub mod models;
pub mod numerics;
pub mod power;
pub mod simulation;
pub mod testing;
pub mod tuning;

pub use error::{Error, Result};
