//! Minimum-norm interpolation for noisy sparse linear regression.
//!
//! The crate provides basis pursuit (minimum-ℓ1-norm interpolation) and
//! minimum-ℓ2-norm interpolation, the parametric path `γ(α)` used to analyse
//! the Gaussian auxiliary programs, the reparametrized auxiliary programs
//! themselves, and a Monte-Carlo harness that measures the prediction error of
//! both interpolators against the `σ²/log(d/n)` rate.

pub mod auxiliary;
pub mod datagen;
pub mod error;
pub mod experiments;
pub mod interpolators;
pub mod optim;
pub mod path;
pub mod quantiles;

pub use error::{Error, Result};
