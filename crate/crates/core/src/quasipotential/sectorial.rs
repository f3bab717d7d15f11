use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernel::QuasiPotentialKernel;
use crate::linalg::{condition_2, spectral_norm};
use crate::Matrix;

#[derive(Clone, Debug, Serialize)]
pub struct SectorialReport {
    /// Samples `(Bf, f)` as `(re, im)`.
    pub samples: Vec<(f64, f64)>,
    pub max_abs_arg: f64,
    /// `max|arg| / (π/2)`.
    pub beta: f64,
    /// `(s, cond₂(I + sB))`.
    pub conditions: Vec<(f64, f64)>,
    /// `‖B‖₂`
    pub norm: f64,
    pub min_real_part: f64,
}

/// Samples the numerical range of `B` with the weighted inner product
/// `(f, g) = Σ wᵢ fᵢ ḡᵢ` over random complex vectors, and the 2-norm
/// condition numbers of `I + sB`.
pub fn sectorial_diagnostics(kernel: &QuasiPotentialKernel, s_grid: &[f64], trials: usize, seed: u64) -> SectorialReport {
    let g = &kernel.grid;
    let w: Vec<f64> = g.interior.iter().map(|&i| g.weights[i]).collect();
    let b = kernel.operator();
    let n = w.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let re: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let im: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (bre, bim) = (b.matvec(&re), b.matvec(&im));
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += w[i] * Complex64::new(bre[i], bim[i]) * Complex64::new(re[i], -im[i]);
        }
        samples.push((acc.re, acc.im));
    }
    let max_abs_arg = samples.iter().map(|&(x, y)| y.atan2(x).abs()).fold(0.0, f64::max);
    let min_real_part = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let conditions = s_grid
        .iter()
        .map(|&s| {
            let m = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + s * b[(i, j)]);
            let c = condition_2(&m, 500).unwrap_or(f64::INFINITY);
            (s, c)
        })
        .collect();
    let norm = spectral_norm(b, 500);
    SectorialReport { samples, max_abs_arg, beta: max_abs_arg / std::f64::consts::FRAC_PI_2, conditions, norm, min_real_part }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LevyTriplet;
    use crate::quasipotential::{assemble_truncated_generator, build_quasipotential, DomainDelta};

    #[test]
    fn brownian_kernel_is_positive() {
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        let k = build_quasipotential(&assemble_truncated_generator(&LevyTriplet::brownian(1.0), &d, 101).unwrap()).unwrap();
        let r = sectorial_diagnostics(&k, &[0.0, 1.0, 100.0], 50, 7);
        assert!(r.max_abs_arg < 1e-10);
        assert!((r.conditions[0].1 - 1.0).abs() < 1e-9);
        assert!(r.conditions.iter().all(|&(s, c)| c <= 1.0 + s * r.norm + 1e-6));
    }

    #[test]
    fn drifting_stable_stays_bounded() {
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        let t = LevyTriplet::stable(1.5, 1.0, 1.0).with_drift(1.0);
        let k = build_quasipotential(&assemble_truncated_generator(&t, &d, 101).unwrap()).unwrap();
        let s: Vec<f64> = (0..=10).map(|i| 10.0 * i as f64).collect();
        let r = sectorial_diagnostics(&k, &s, 50, 7);
        assert!(r.max_abs_arg < std::f64::consts::FRAC_PI_2);
        assert!(r.conditions.iter().all(|c| c.1.is_finite() && c.1 < 1e8));
    }
}
