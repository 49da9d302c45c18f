//! Sound field estimation on a regular 2D grid from sparse microphone
//! observations.
//!
//! The crate provides:
//! - grid, field and observation types plus a binary dataset format,
//! - bicubic spline interpolation of gridded values with boundary derivatives,
//! - an analytic Helmholtz-equation loss on the spline interpolant and its
//!   gradient with respect to the gridded values,
//! - the Bessel-kernel ridge regression baseline,
//! - analytic (Helmholtz-exact) field generators,
//! - a small convolutional estimator with hand-written reverse mode and Adam,
//! - NMSE / HE metrics and experiment aggregation.

pub mod bessel;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod field;
pub mod grid;
pub mod helmholtz;
pub mod kernel;
pub mod metrics;
pub mod model;
pub mod plot;
pub mod quadrature;
pub mod seed;
pub mod simulator;
pub mod spline;
pub mod tridiag;

pub use error::{Error, Result};
pub use field::{Channel, ComplexField, ObservationSet, OutputTensor};
pub use grid::{Grid, WaveContext};

/// 4×4 real matrix, row-major.
pub type Mat4 = [[f64; 4]; 4];
