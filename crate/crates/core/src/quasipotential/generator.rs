use rayon::prelude::*;

use super::domain::{DomainDelta, QuadratureGrid};
use crate::error::Result;
use crate::kernels::{build_kernel, cell_integral};
use crate::models::{LevyMeasure, LevyTriplet};
use crate::quad::{adaptive, Tolerance};
use crate::Matrix;

/// `L_Δ = P_Δ L P_Δ` on the interior nodes of a [`QuadratureGrid`]; the
/// boundary nodes carry the homogeneous conditions and are eliminated.
#[derive(Clone, Debug)]
pub struct TruncatedGeneratorMatrix {
    pub matrix: Matrix,
    pub grid: QuadratureGrid,
    pub triplet: LevyTriplet,
}

struct Cell {
    left: usize,
    right: usize,
    lo: f64,
    hi: f64,
    h: f64,
}

fn cells(grid: &QuadratureGrid) -> Vec<Cell> {
    grid.pieces
        .iter()
        .flat_map(|p| {
            (0..p.cells).map(move |j| Cell {
                left: p.first + j,
                right: p.first + j + 1,
                lo: grid.nodes[p.first + j],
                hi: grid.nodes[p.first + j + 1],
                h: p.h,
            })
        })
        .collect()
}

impl TruncatedGeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `L_Δ f` at the interior nodes for `f` sampled on the full grid.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let inner: Vec<f64> = self.grid.interior.iter().map(|&i| f[i]).collect();
        self.matrix.matvec(&inner)
    }
}

/// Assembles `L_Δ` for a triplet on `domain`, `n` nodes for a single
/// interval (see [`QuadratureGrid::new`]).
///
/// Convolution-form generators use `d/dx S d/dx`: slopes of the piecewise
/// linear interpolant live on cells, `S` integrates `k` over cells of `Δ`
/// only and is sampled at cell midpoints, and the outer difference returns
/// to the nodes. Compound Poisson jumps are assembled directly with the
/// trapezoid rule.
pub fn assemble_truncated_generator(triplet: &LevyTriplet, domain: &DomainDelta, n: usize) -> Result<TruncatedGeneratorMatrix> {
    let grid = QuadratureGrid::new(domain, n)?;
    assemble_on_grid(triplet, grid)
}

pub fn assemble_on_grid(triplet: &LevyTriplet, grid: QuadratureGrid) -> Result<TruncatedGeneratorMatrix> {
    triplet.check()?;
    let matrix = match &triplet.measure {
        LevyMeasure::CompoundPoisson(_) => compound_poisson_matrix(triplet, &grid)?,
        _ => convolution_matrix(triplet, &grid)?,
    };
    Ok(TruncatedGeneratorMatrix { matrix, grid, triplet: triplet.clone() })
}

fn convolution_matrix(triplet: &LevyTriplet, grid: &QuadratureGrid) -> Result<Matrix> {
    let kernel = build_kernel(triplet)?;
    let cells = cells(grid);
    let nc = cells.len();
    // S on slopes: (S σ)(m_c) = Σ_d s[c][d] σ_d
    let s: Vec<Vec<f64>> = cells
        .par_iter()
        .enumerate()
        .map(|(c, cell)| {
            let m = 0.5 * (cell.lo + cell.hi);
            (0..nc)
                .map(|d| {
                    let e = &cells[d];
                    let diag = if c == d { kernel.a_half } else { 0.0 };
                    cell_integral(&kernel, e.lo - m, e.hi - m) + diag
                })
                .collect()
        })
        .collect();
    let mut col = vec![usize::MAX; grid.len()];
    for (k, &i) in grid.interior.iter().enumerate() {
        col[i] = k;
    }
    // cell index to the right of each node
    let mut right_cell = vec![usize::MAX; grid.len()];
    for (c, cell) in cells.iter().enumerate() {
        right_cell[cell.left] = c;
    }
    let dim = grid.interior.len();
    let rows: Vec<Vec<f64>> = grid
        .interior
        .par_iter()
        .map(|&i| {
            let cr = right_cell[i];
            let cl = cr - 1;
            let h = cells[cr].h;
            let mut row = vec![0.0; dim];
            for (d, cell) in cells.iter().enumerate() {
                let w = (s[cr][d] - s[cl][d]) / (h * cell.h);
                if col[cell.right] != usize::MAX {
                    row[col[cell.right]] += w;
                }
                if col[cell.left] != usize::MAX {
                    row[col[cell.left]] -= w;
                }
            }
            row
        })
        .collect();
    Ok(Matrix::from_rows(dim, dim, rows.into_iter().flatten().collect()))
}

fn compound_poisson_matrix(triplet: &LevyTriplet, grid: &QuadratureGrid) -> Result<Matrix> {
    let LevyMeasure::CompoundPoisson(cp) = &triplet.measure else { unreachable!() };
    let mass = cp.mass();
    let tol = Tolerance::default();
    let small_mean = adaptive(|y: f64| y * cp.density(y), -1.0, 0.0, tol)?.value + adaptive(|y: f64| y * cp.density(y), 0.0, 1.0, tol)?.value;
    let drift = triplet.gamma - small_mean;
    let dim = grid.interior.len();
    let pos: Vec<usize> = grid.interior.clone();
    let mut m = Matrix::from_fn(dim, dim, |r, c| {
        let (i, j) = (pos[r], pos[c]);
        grid.weights[j] * cp.density(grid.nodes[j] - grid.nodes[i])
    });
    for (r, &i) in pos.iter().enumerate() {
        m[(r, r)] -= mass;
        let p = grid.pieces.iter().find(|p| p.first < i && i < p.first + p.cells).expect("interior node");
        let h = p.h;
        let diff = 0.5 * triplet.a / (h * h);
        let adv = drift / (2.0 * h);
        m[(r, r)] -= 2.0 * diff;
        if i > p.first + 1 {
            m[(r, r - 1)] += diff - adv;
        }
        if i + 1 < p.first + p.cells {
            m[(r, r + 1)] += diff + adv;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::apply_generator_conv;
    use crate::GridFunction;

    #[test]
    fn brownian_is_dirichlet_laplacian() {
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        let l = assemble_truncated_generator(&LevyTriplet::brownian(1.0), &d, 201).unwrap();
        let h: f64 = 0.01;
        let m = &l.matrix;
        assert_eq!(l.dim(), 199);
        for i in 0..199usize {
            for j in 0..199 {
                let want = match i.abs_diff(j) {
                    0 => -1.0 / (h * h),
                    1 => 0.5 / (h * h),
                    _ => 0.0,
                };
                assert!((m[(i, j)] - want).abs() < 1e-8 * (1.0 / (h * h)), "{i} {j}");
            }
        }
    }

    fn action_gap(t: &LevyTriplet, n: usize, margin: f64) -> f64 {
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        let l = assemble_truncated_generator(t, &d, n).unwrap();
        let f: Vec<f64> = l.grid.nodes.iter().map(|x| (1.0 - x * x).powi(2)).collect();
        let got = l.apply(&f);
        let g = GridFunction::from_fn(-1.0, 1.0, n, |x: f64| (1.0 - x * x).powi(2)).unwrap();
        let want = apply_generator_conv(&build_kernel(t).unwrap(), &g).unwrap();
        l.grid
            .interior
            .iter()
            .enumerate()
            .filter(|(_, &i)| 1.0 - l.grid.nodes[i].abs() >= margin)
            .map(|(k, &i)| (got[k] - want.values()[i]).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn action_matches_zero_extended_generator() {
        assert!(action_gap(&LevyTriplet::brownian(1.0).with_drift(0.4), 201, 0.0) < 1e-9);
        // jump generators differ in an O(h^{2−α}) layer at the endpoints
        assert!(action_gap(&LevyTriplet::stable(1.5, 1.0, 0.6).with_drift(0.3), 201, 0.05) < 5e-3);
    }

    #[test]
    fn jumps_couple_separate_intervals() {
        let d: DomainDelta = "-2,-1;1,2".parse().unwrap();
        let l = assemble_truncated_generator(&LevyTriplet::stable(1.5, 1.0, 1.0), &d, 41).unwrap();
        let half = l.dim() / 2;
        assert!(l.matrix[(0, half + 3)].abs() > 1e-6);
        assert!(l.matrix[(half + 3, 0)].abs() > 1e-6);
    }
}
