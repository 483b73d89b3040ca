//! Log-correlated Gaussian fields with star-scale covariance, their
//! multiplicative chaos measures, dyadic cascades, and Monte Carlo checks of
//! the identities and scaling laws these objects satisfy.
//!
//! The field and measure layers are generic over the scalar type; the crate
//! root exports `f64` aliases used by the analysis code and the CLI.

pub mod analysis;
pub mod cascade;
pub mod error;
pub mod field;
pub mod kernels;
pub mod logspace;
pub mod measures;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type FieldRun64 = field::FieldRun<f64>;
pub type FieldSampler64 = field::FieldSampler<f64>;
pub type CellMeasure64 = measures::CellMeasure<f64>;
