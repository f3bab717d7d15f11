use serde::Serialize;

use super::domain::{DomainDelta, QuadratureGrid};
use super::generator::{assemble_on_grid, TruncatedGeneratorMatrix};
use crate::error::Result;
use crate::linalg::checked_inverse;
use crate::models::LevyTriplet;
use crate::Matrix;

const MAX_CONDITION: f64 = 1e12;

/// `Φ(xᵢ, yⱼ)` on the full grid, zero on boundary rows and columns.
#[derive(Clone, Debug)]
pub struct QuasiPotentialKernel {
    pub phi: Matrix,
    pub grid: QuadratureGrid,
    /// `(−L_Δ)^{-1}` on interior nodes.
    pub inverse: Matrix,
    pub condition: f64,
    pub regularity: Regularity,
}

/// Fit of `|Φ(x,y)| ≤ M |x − y|^{−β}` near the diagonal.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Regularity {
    pub beta: f64,
    pub constant: f64,
    pub pass: bool,
}

impl QuasiPotentialKernel {
    /// Kernel sampled from a function, for testing the diagnostics.
    pub fn from_fn(grid: QuadratureGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.len();
        let mut phi = Matrix::zeros(n, n);
        for &i in &grid.interior {
            for &j in &grid.interior {
                phi[(i, j)] = f(grid.nodes[i], grid.nodes[j]);
            }
        }
        let dim = grid.interior.len();
        let inverse = Matrix::from_fn(dim, dim, |a, b| phi[(grid.interior[a], grid.interior[b])] * grid.weights[grid.interior[b]]);
        let mut k = Self { phi, grid, inverse, condition: f64::NAN, regularity: Regularity { beta: 0.0, constant: 0.0, pass: true } };
        k.regularity = check_regularity(&k);
        k
    }

    /// `Φ(x0, ·)` on the full grid, interpolated linearly between rows.
    pub fn row_at(&self, x0: f64) -> Option<Vec<f64>> {
        let [(i, wi), (j, wj)] = self.grid.locate(x0)?;
        Some((0..self.grid.len()).map(|k| wi * self.phi[(i, k)] + wj * self.phi[(j, k)]).collect())
    }

    /// `Bf(xᵢ) = Σⱼ Φ(xᵢ,yⱼ) f(yⱼ) wⱼ` on the full grid.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let w = &self.grid.weights;
        let fw: Vec<f64> = f.iter().zip(w).map(|(a, b)| a * b).collect();
        self.phi.matvec(&fw)
    }

    /// Matrix of `B` on interior nodes, `Φ W`.
    pub fn operator(&self) -> &Matrix {
        &self.inverse
    }

    /// Matrix of the weighted adjoint `B* = W⁻¹ Bᵀ W = Φᵀ W` on interior
    /// nodes.
    pub fn adjoint(&self) -> Matrix {
        let g = &self.grid;
        let dim = g.interior.len();
        Matrix::from_fn(dim, dim, |a, b| self.phi[(g.interior[b], g.interior[a])] * g.weights[g.interior[b]])
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.max_abs()
    }

    /// Smallest entry relative to the largest, `min Φ / max Φ`.
    pub fn relative_minimum(&self) -> f64 {
        let s = self.phi.as_slice();
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        min / max
    }

    /// Largest entry on the rows and columns of interval endpoints.
    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.len();
        let mut m = 0.0f64;
        for p in &self.grid.pieces {
            for b in [p.first, p.first + p.cells] {
                for k in 0..n {
                    m = m.max(self.phi[(b, k)].abs()).max(self.phi[(k, b)].abs());
                }
            }
        }
        m
    }
}

/// Inverts `−L_Δ` and rescales by the quadrature weights so that
/// `Σⱼ Φ(xᵢ,yⱼ) g(yⱼ) wⱼ` reproduces `(−L_Δ)^{-1} g`.
pub fn build_quasipotential(l: &TruncatedGeneratorMatrix) -> Result<QuasiPotentialKernel> {
    let neg = l.matrix.scale(-1.0);
    let (inverse, condition) = checked_inverse(&neg, MAX_CONDITION)?;
    let g = &l.grid;
    let n = g.len();
    let mut phi = Matrix::zeros(n, n);
    for (a, &i) in g.interior.iter().enumerate() {
        for (b, &j) in g.interior.iter().enumerate() {
            phi[(i, j)] = inverse[(a, b)] / g.weights[j];
        }
    }
    let mut k = QuasiPotentialKernel {
        phi,
        grid: g.clone(),
        inverse,
        condition,
        regularity: Regularity { beta: 0.0, constant: 0.0, pass: true },
    };
    k.regularity = check_regularity(&k);
    Ok(k)
}

/// `‖(−L_Δ) B − I‖∞`.
pub fn inverse_residual(l: &TruncatedGeneratorMatrix, k: &QuasiPotentialKernel) -> f64 {
    let p = l.matrix.scale(-1.0).matmul(&k.inverse);
    let n = p.rows();
    let mut worst = 0.0f64;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| (p[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs()).sum();
        worst = worst.max(row);
    }
    worst
}

/// Least-squares slope of `log max|Φ|` against `log d` over distances
/// `d = h … 16h` within each interval, maxima taken over all pairs at that
/// distance. `β̂` is minus the slope; `M̂` makes the bound hold on every
/// sampled pair.
pub fn check_regularity(k: &QuasiPotentialKernel) -> Regularity {
    let g = &k.grid;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in &g.pieces {
        let lags = 16.min(p.cells / 2);
        for lag in 1..=lags {
            let mut m = 0.0f64;
            for i in p.first + 1..p.first + p.cells - lag {
                m = m.max(k.phi[(i, i + lag)].abs()).max(k.phi[(i + lag, i)].abs());
            }
            if m > 0.0 {
                xs.push((lag as f64 * p.h).ln());
                ys.push(m.ln());
            }
        }
    }
    if xs.len() < 2 {
        return Regularity { beta: 0.0, constant: k.max_abs(), pass: true };
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let beta = -sxy / sxx;
    let b = beta.max(0.0);
    let mut constant = 0.0f64;
    for p in &g.pieces {
        for i in p.first..=p.first + p.cells {
            for q in &g.pieces {
                for j in q.first..=q.first + q.cells {
                    if i != j {
                        let d = (g.nodes[i] - g.nodes[j]).abs();
                        constant = constant.max(k.phi[(i, j)].abs() * d.powf(b));
                    }
                }
            }
        }
    }
    Regularity { beta, constant, pass: beta < 1.0 }
}

/// `max |Φ₂(xᵢ,yⱼ) − Φ₁(xᵢ+δ, yⱼ+δ)|` for kernels on `Δ` and `Δ + δ` built
/// with identical per-interval grids.
pub fn translation_covariance_check(triplet: &LevyTriplet, domain: &DomainDelta, delta: f64, n: usize) -> Result<f64> {
    let g1 = QuadratureGrid::new(domain, n)?;
    let g2 = g1.shifted(delta)?;
    let k1 = build_quasipotential(&assemble_on_grid(triplet, g1)?)?;
    let k2 = build_quasipotential(&assemble_on_grid(triplet, g2)?)?;
    Ok(k1.phi.as_slice().iter().zip(k2.phi.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasipotential::assemble_truncated_generator;

    fn brownian(n: usize) -> QuasiPotentialKernel {
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        build_quasipotential(&assemble_truncated_generator(&LevyTriplet::brownian(1.0), &d, n).unwrap()).unwrap()
    }

    #[test]
    fn brownian_green_function() {
        let k = brownian(401);
        assert!((k.phi[(200, 200)] - 1.0).abs() < 1e-3);
        let green = |x: f64, y: f64| (x.min(y) + 1.0) * (1.0 - x.max(y));
        let g = &k.grid;
        for &(i, j) in &[(100usize, 300usize), (50, 60), (390, 10)] {
            assert!((k.phi[(i, j)] - green(g.nodes[i], g.nodes[j])).abs() < 1e-3);
        }
        assert_eq!(k.boundary_max(), 0.0);
        assert!(k.relative_minimum() >= -1e-8);
        assert!(k.regularity.pass && k.regularity.beta < 0.1);
    }

    #[test]
    fn green_function_error_is_second_order() {
        let err = |n: usize| {
            let k = brownian(n);
            let g = &k.grid;
            let green = |x: f64, y: f64| (x.min(y) + 1.0) * (1.0 - x.max(y));
            let mut e = 0.0f64;
            for &i in &g.interior {
                for &j in &g.interior {
                    e = e.max((k.phi[(i, j)] - green(g.nodes[i], g.nodes[j])).abs());
                }
            }
            e
        };
        let (e1, e2) = (err(41), err(81));
        // the discrete Green's function is exact at the nodes for this stencil
        assert!(e2 < 1e-10 || (e1 / e2).log2() >= 1.9, "{e1} {e2}");
    }

    #[test]
    fn inverse_identity_and_translation() {
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        let l = assemble_truncated_generator(&LevyTriplet::stable(1.5, 1.0, 1.0), &d, 101).unwrap();
        let k = build_quasipotential(&l).unwrap();
        assert!(inverse_residual(&l, &k) < 1e-8);
        assert!(k.relative_minimum() >= -1e-8);
        assert!(k.regularity.pass);
        assert_eq!(translation_covariance_check(&LevyTriplet::brownian(1.0), &d, 0.0, 41).unwrap(), 0.0);
        assert!(translation_covariance_check(&LevyTriplet::stable(1.5, 1.0, 1.0), &d, 0.5, 101).unwrap() < 1e-8);
    }

    #[test]
    fn singular_kernel_fails_regularity() {
        let g = QuadratureGrid::new(&DomainDelta::interval(-1.0, 1.0).unwrap(), 201).unwrap();
        let k = QuasiPotentialKernel::from_fn(g, |x, y| if x == y { 0.0 } else { (x - y).abs().powf(-1.2) });
        assert!(!k.regularity.pass);
        assert!((k.regularity.beta - 1.2).abs() < 1e-6);
    }
}
