//! Truncated generators on unions of intervals and their inverses, the
//! quasi-potentials `Bf(x) = ∫_Δ Φ(x,y) f(y) dy`.

mod domain;
mod generator;
mod kernel;
mod sectorial;

pub use domain::{DomainDelta, IntervalGrid, QuadratureGrid};
pub use generator::{assemble_on_grid, assemble_truncated_generator, TruncatedGeneratorMatrix};
pub use kernel::{
    build_quasipotential, check_regularity, inverse_residual, translation_covariance_check, QuasiPotentialKernel, Regularity,
};
pub use sectorial::{sectorial_diagnostics, SectorialReport};
