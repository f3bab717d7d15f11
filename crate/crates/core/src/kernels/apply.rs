//! Application of the generator in convolution, direct and compound Poisson
//! form on uniform grids.

use rayon::prelude::*;

use super::moments::{cubic_offset_weights, hat_moments, OffsetWeights};
use super::ConvolutionKernel;
use crate::error::{LevyError, Result};
use crate::models::tables::{moment_below, MeasureTables};
use crate::models::{CompoundPoisson, LevyMeasure, LevyTriplet, Side};
use crate::GridFunction;

const MIN_NODES: usize = 5;

fn uniform_spacing(f: &GridFunction) -> Result<f64> {
    if f.len() < MIN_NODES {
        return Err(LevyError::GridTooSmall { need: MIN_NODES, got: f.len() });
    }
    if !f.is_uniform(1e-9) {
        return Err(LevyError::InvalidGrid("generator application needs equispaced nodes".into()));
    }
    Ok(f.spacing())
}

/// First derivative by central differences, second-order one-sided at the ends.
pub fn central_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d
}

fn second_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let h2 = h * h;
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    d
}

/// Five-point first derivative; the compensator `f'(x)∫yν'` grows like
/// `h^{1−α}`, so the derivative error has to be `o(h²)`.
fn fourth_order_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let at = |i: isize| if i < 0 || i >= n as isize { 0.0 } else { v[i as usize] };
    (0..n as isize)
        .map(|i| (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h))
        .collect()
}

fn third_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let at = |i: isize| if i < 0 || i >= n as isize { 0.0 } else { v[i as usize] };
    let h3 = h * h * h;
    (0..n as isize)
        .map(|i| (at(i + 2) - 2.0 * at(i + 1) + 2.0 * at(i - 1) - at(i - 2)) / (2.0 * h3))
        .collect()
}

fn toeplitz_apply(w: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            // W_{j−i} sits at index j − i + n − 1
            let row = &w[n - 1 - i..2 * n - 1 - i];
            row.iter().zip(v).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// `(Sf)(xᵢ) = ½A f(xᵢ) + ∫ k(y − xᵢ) f(y) dy` with `f` replaced by its
/// piecewise-linear interpolant (zero outside the grid).
pub fn apply_s(kernel: &ConvolutionKernel, f: &GridFunction) -> Result<GridFunction> {
    if kernel.singularity >= 1.0 {
        return Err(LevyError::NonIntegrableKernel { exponent: kernel.singularity });
    }
    let h = uniform_spacing(f)?;
    let w = hat_moments(kernel, h, f.len());
    let conv = toeplitz_apply(&w, f.values());
    let out = conv.iter().zip(f.values()).map(|(c, v)| c + kernel.a_half * v).collect();
    Ok(f.with_values(out))
}

/// `Lf = d/dx S d/dx f`. Both derivatives are central differences of half
/// width: `f'` lives on the cell midpoints (including one ghost cell past
/// each end, where `f` is extended by zero), `S` acts there, and the outer
/// difference brings the result back to the nodes.
pub fn apply_generator_conv(kernel: &ConvolutionKernel, f: &GridFunction) -> Result<GridFunction> {
    let h = uniform_spacing(f)?;
    let v = f.values();
    let n = v.len();
    let at = |i: isize| if i < 0 || i >= n as isize { 0.0 } else { v[i as usize] };
    let mids: Vec<f64> = (0..=n).map(|k| f.nodes()[0] + (k as f64 - 0.5) * h).collect();
    let slopes: Vec<f64> = (0..=n as isize).map(|k| (at(k) - at(k - 1)) / h).collect();
    let g = GridFunction::new(mids, slopes)?;
    let s = apply_s(kernel, &g)?;
    let sv = s.values();
    Ok(f.with_values((0..n).map(|i| (sv[i + 1] - sv[i]) / h).collect()))
}

/// Precomputed direct-form generator
/// `½Af'' + γf' + ∫(f(x+y) − f(x) − y f'(x) 1_{|y|≤1}) ν'(y) dy`
/// for a fixed spacing and span.
#[derive(Clone, Debug)]
pub struct DirectGenerator {
    pub h: f64,
    pub epsilon: f64,
    diffusion: f64,
    skew: f64,
    gamma: f64,
    near: OffsetWeights,
    far: OffsetWeights,
    far_mass: f64,
}

impl DirectGenerator {
    /// `span` bounds the jump sizes that can land inside the grid.
    pub fn new(triplet: &LevyTriplet, h: f64, span: f64) -> Result<Self> {
        triplet.check()?;
        let epsilon = h.max(1e-4);
        let measure = &triplet.measure;
        if let LevyMeasure::PureDiffusion = measure {
            return Ok(Self {
                h,
                epsilon,
                diffusion: 0.5 * triplet.a,
                skew: 0.0,
                gamma: triplet.gamma,
                near: OffsetWeights::zero(),
                far: OffsetWeights::zero(),
                far_mass: 0.0,
            });
        }
        let dens = |u: f64| {
            if u < 0.0 {
                measure.side_density(Side::Left, -u)
            } else {
                measure.side_density(Side::Right, u)
            }
        };
        let m2 = moment_below(measure, Side::Left, 2.0, epsilon)? + moment_below(measure, Side::Right, 2.0, epsilon)?;
        let m3 = moment_below(measure, Side::Right, 3.0, epsilon)? - moment_below(measure, Side::Left, 3.0, epsilon)?;
        let near = if epsilon < 1.0 {
            cubic_offset_weights(dens, h, -1.0, -epsilon, &[]).merge(&cubic_offset_weights(dens, h, epsilon, 1.0, &[]))
        } else {
            OffsetWeights::zero()
        };
        let far = cubic_offset_weights(dens, h, -span.max(1.0), -1.0, &[])
            .merge(&cubic_offset_weights(dens, h, 1.0, span.max(1.0), &[]));
        let tables = MeasureTables::build(measure)?;
        let far_mass = tables.left.tail_mass(1.0) + tables.right.tail_mass(1.0);
        Ok(Self { h, epsilon, diffusion: 0.5 * triplet.a + 0.5 * m2, skew: m3 / 6.0, gamma: triplet.gamma, near, far, far_mass })
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let h = uniform_spacing(f)?;
        if (h - self.h).abs() > 1e-9 * self.h {
            return Err(LevyError::InvalidGrid(format!("generator built for spacing {} but grid has {}", self.h, h)));
        }
        let v = f.values();
        let d1 = fourth_order_derivative(v, h);
        let d2 = second_derivative(v, h);
        let d3 = if self.skew != 0.0 { third_derivative(v, h) } else { vec![0.0; v.len()] };
        let out = (0..v.len())
            .into_par_iter()
            .map(|i| {
                self.diffusion * d2[i] + self.skew * d3[i] + self.gamma * d1[i] + self.near.apply_at(v, i)
                    - self.near.mass * v[i]
                    - self.near.first * d1[i]
                    + self.far.apply_at(v, i)
                    - self.far_mass * v[i]
            })
            .collect();
        Ok(f.with_values(out))
    }
}

/// Direct-form generator; small jumps `|y| < ε = max(h, 1e-4)` enter through
/// the Taylor terms `½f''∫y²ν'` and `⅙f'''∫y³ν'`.
pub fn apply_generator_direct(triplet: &LevyTriplet, f: &GridFunction) -> Result<GridFunction> {
    let h = uniform_spacing(f)?;
    let nodes = f.nodes();
    let span = nodes[nodes.len() - 1] - nodes[0];
    DirectGenerator::new(triplet, h, span)?.apply(f)
}

/// `Lf = −Mf(x) + ∫ ν'(y − x) f(y) dy` for a finite jump measure.
pub fn apply_generator_cp(spec: &CompoundPoisson, f: &GridFunction) -> Result<GridFunction> {
    let h = uniform_spacing(f)?;
    let nodes = f.nodes();
    let span = nodes[nodes.len() - 1] - nodes[0];
    let mass = spec.mass();
    let w = cubic_offset_weights(|u| spec.density(u), h, -span, span, &[0.0]);
    let v = f.values();
    let out = (0..v.len()).into_par_iter().map(|i| w.apply_at(v, i) - mass * v[i]).collect();
    Ok(f.with_values(out))
}
