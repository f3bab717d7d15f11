//! Numerical toolkit for one-dimensional Lévy processes: characteristic
//! exponents, convolution-form generators, quasi-potentials on unions of
//! intervals, and survival probabilities through Laplace inversion.
//!
//! The numerical core is generic over [`scalar::Real`]; the model layers work
//! in `f64`, and the aliases below fix the scalar for everyday use.

pub mod density;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod laplace;
pub mod linalg;
pub mod mc;
pub mod models;
pub mod potential;
pub mod quasipotential;
pub mod quad;
pub mod scalar;
pub mod survival;

pub use error::{LevyError, Result};
pub use models::{CompoundPoisson, LevyMeasure, LevyTriplet, ModelConfig};

pub type GridFunction = grid::GridFunction<f64>;
pub type Matrix = linalg::Matrix<f64>;
pub type GaverStehfest = laplace::GaverStehfest<f64>;
