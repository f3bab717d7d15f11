//! Transition densities `ρ(x,t) = (1/2π)∫ e^{−ixz} e^{−tλ(z)} dz` and the
//! mass bound `M(t) = (1/2π)∫ e^{−t Re λ(z)} dz ≥ sup ρ(·,t)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LevyError, Result};
use crate::models::{char_exponent, re_char_exponent, LevyMeasure, LevyTriplet};
use crate::quad::Tolerance;

/// Decay threshold for truncating the Fourier integral.
const DECAY: f64 = 1e-12;
/// Smallest aliasing period `2π/dz` used for inversion.
const MIN_PERIOD: f64 = 2000.0;
const MAX_FREQUENCY: f64 = 1e6;
/// Search limit for the decay of `|e^{−tλ}|` when only `Re λ` is needed.
const MAX_BOUND_FREQUENCY: f64 = 1e100;
const MAX_SAMPLES: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassBound {
    pub value: f64,
    /// `|e^{−tλ(z)}|` does not decay; `value` is infinite.
    pub divergent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensitySlice {
    pub t: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub mass_bound: f64,
}

impl DensitySlice {
    /// Trapezoid integral over the nodes.
    pub fn integral(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Beyond this frequency the jump part of `Re λ` of quadrature-based models
/// is continued by its small-jump asymptotics.
const NUMERIC_FREQUENCY: f64 = 1e4;

fn re_lambda(triplet: &LevyTriplet, z: f64) -> Result<f64> {
    let z = z.abs();
    let closed = matches!(
        triplet.measure,
        LevyMeasure::PureDiffusion
            | LevyMeasure::Stable { .. }
            | LevyMeasure::VarianceGamma { .. }
            | LevyMeasure::Nig { .. }
            | LevyMeasure::Meixner { .. }
    );
    if closed || z <= NUMERIC_FREQUENCY {
        return re_char_exponent(triplet, z);
    }
    let diffusion = 0.5 * triplet.a * z * z;
    if triplet.measure.has_finite_mass() {
        // Riemann–Lebesgue: Re λ − ½Az² → M
        let mass = match &triplet.measure {
            LevyMeasure::CompoundPoisson(cp) => cp.mass(),
            _ => 0.0,
        };
        return Ok(diffusion + mass);
    }
    let z0 = NUMERIC_FREQUENCY;
    let jump0 = char_exponent(triplet, z0)?.re - 0.5 * triplet.a * z0 * z0;
    let jump = match triplet.measure.singularity_index() {
        Some(a) if a > 0.0 => jump0 * (z / z0).powf(a),
        _ => {
            let (c1, c2) = triplet.measure.leading_coefficients();
            jump0 + (c1 + c2) * (z / z0).ln()
        }
    };
    Ok(diffusion + jump)
}

/// Smallest `Z` (up to doubling) with `e^{−t Re λ(z)} < DECAY` for `z ≥ Z`;
/// `None` when no such `Z ≤ MAX_FREQUENCY` exists.
fn cutoff_frequency(triplet: &LevyTriplet, t: f64, limit: f64) -> Result<Option<f64>> {
    let target = -DECAY.ln() / t;
    let mut z = 1.0;
    while z <= limit {
        // Re λ is not monotone in general; require two consecutive doublings
        if re_lambda(triplet, z)? > target && re_lambda(triplet, 2.0 * z)? > target {
            return Ok(Some(z));
        }
        z *= 2.0;
    }
    Ok(None)
}

/// `M(t)`; divergence is reported through the flag, not as an error.
pub fn mass_bound(triplet: &LevyTriplet, t: f64) -> Result<MassBound> {
    if !(t > 0.0) {
        return Err(LevyError::Domain(format!("time must be positive, got {t}")));
    }
    triplet.check()?;
    let z_max = match cutoff_frequency(triplet, t, MAX_BOUND_FREQUENCY)? {
        Some(z) => 2.0 * z,
        None => return Ok(MassBound { value: f64::INFINITY, divergent: true }),
    };
    let tol = Tolerance::new(1e-15, 1e-11);
    let mut err = None;
    let f = |z: f64| match re_lambda(triplet, z) {
        Ok(r) => (-t * r).exp(),
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    // geometric panels resolve both the peak at 0 and the tail
    let mut pts = vec![0.0];
    let mut b = (z_max * 1e-6).min(1e-3);
    while b < z_max {
        pts.push(b);
        b *= 2.0;
    }
    pts.push(z_max);
    let v = crate::quad::adaptive_pieces(f, &pts, tol)?.value;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(MassBound { value: v / std::f64::consts::PI, divergent: false })
}

/// Small-time behaviour of `M(t)`: fitted exponent `p` in `M(t) ~ t^{−p}`
/// and the integral of `M` over `(0, 1]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmallTimeCheck {
    pub finite: bool,
    pub exponent: f64,
    pub integral: f64,
}

/// Whether `∫_0^1 M(t) dt < ∞`, from `M` on a logarithmic time grid down to
/// `1e-6` with a power-law extrapolation below.
pub fn small_time_integrability(triplet: &LevyTriplet) -> Result<SmallTimeCheck> {
    let ts: Vec<f64> = (0..=24).map(|k| 10f64.powf(-(k as f64) / 4.0)).collect();
    let mut ms = Vec::with_capacity(ts.len());
    for &t in &ts {
        let m = mass_bound(triplet, t)?;
        if m.divergent {
            return Ok(SmallTimeCheck { finite: false, exponent: f64::INFINITY, integral: f64::INFINITY });
        }
        ms.push(m.value);
    }
    let n = ts.len();
    let exponent = (ms[n - 1] / ms[n - 5]).ln() / (ts[n - 5] / ts[n - 1]).ln();
    // trapezoid in log t: ∫ M dt = ∫ M t d(log t)
    let mut integral = 0.0;
    for k in 0..n - 1 {
        let dl = (ts[k] / ts[k + 1]).ln();
        integral += 0.5 * dl * (ms[k] * ts[k] + ms[k + 1] * ts[k + 1]);
    }
    let finite = exponent < 1.0 - 1e-3;
    if finite {
        integral += ms[n - 1] * ts[n - 1] / (1.0 - exponent);
    } else {
        integral = f64::INFINITY;
    }
    Ok(SmallTimeCheck { finite, exponent, integral })
}

/// `ρ(x,t)` on arbitrary nodes by trapezoidal Fourier inversion. The step
/// `dz` keeps the aliasing period above both `4·max|x|` and a fixed floor.
pub fn transition_density(triplet: &LevyTriplet, t: f64, x: &[f64]) -> Result<DensitySlice> {
    let mb = mass_bound(triplet, t)?;
    if mb.divergent {
        return Err(LevyError::Unsupported(
            "characteristic function is not integrable; the transition law has no density (use Monte Carlo)".into(),
        ));
    }
    let z_max = cutoff_frequency(triplet, t, MAX_FREQUENCY)?.map(|z| 2.0 * z).unwrap_or(MAX_FREQUENCY);
    let x_abs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let period = (4.0 * x_abs).max(MIN_PERIOD);
    let mut dz = 2.0 * std::f64::consts::PI / period;
    dz = dz.min(std::f64::consts::PI / (2.0 * x_abs.max(1e-300)));
    let m = (z_max / dz).ceil() as usize;
    if m > MAX_SAMPLES {
        return Err(LevyError::Unsupported(format!("Fourier inversion needs {m} samples; exceeds {MAX_SAMPLES}")));
    }
    let mu: Vec<Complex64> = (0..=m)
        .into_par_iter()
        .map(|k| {
            let z = k as f64 * dz;
            char_exponent(triplet, z).map(|l| (-t * l).exp())
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = x
        .par_iter()
        .map(|&xi| {
            // (1/π) Σ' Re[e^{−ixz} μ(z)] dz with a rotating phase
            let step = Complex64::from_polar(1.0, -xi * dz);
            let mut phase = Complex64::new(1.0, 0.0);
            let mut acc = 0.5 * mu[0].re;
            for (k, m) in mu.iter().enumerate().skip(1) {
                phase *= step;
                if k % 64 == 0 {
                    phase = Complex64::from_polar(1.0, -xi * dz * k as f64);
                }
                acc += (phase * m).re;
            }
            acc * dz / std::f64::consts::PI
        })
        .collect();
    Ok(DensitySlice { t, nodes: x.to_vec(), values, mass_bound: mb.value })
}

/// `sup_i |ρ(xᵢ,t) − ∫ρ(xᵢ−ξ, t−τ) ρ(ξ,τ) dξ|` with the convolution taken by
/// the trapezoid rule over a window wide enough for heavy tails.
pub fn chapman_kolmogorov_check(triplet: &LevyTriplet, t: f64, tau: f64, x: &[f64]) -> Result<f64> {
    if !(tau > 0.0 && tau < t) {
        return Err(LevyError::Domain(format!("need 0 < tau < t, got tau={tau}, t={t}")));
    }
    if x.len() < 2 {
        return Err(LevyError::GridTooSmall { need: 2, got: x.len() });
    }
    let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let x_abs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let w = (10.0 * x_abs).max(40.0);
    let nw = (w / h).ceil() as i64;
    let xi: Vec<f64> = (-nw..=nw).map(|k| k as f64 * h).collect();
    let rho_tau = transition_density(triplet, tau, &xi)?;
    let lo = x[0] - nw as f64 * h;
    let nd = ((x[x.len() - 1] + nw as f64 * h - lo) / h).round() as usize;
    let diffs: Vec<f64> = (0..=nd).map(|k| lo + k as f64 * h).collect();
    let rho_rest = transition_density(triplet, t - tau, &diffs)?;
    let rho_t = transition_density(triplet, t, x)?;
    let mut worst = 0.0f64;
    for (i, &xv) in x.iter().enumerate() {
        let mut acc = 0.0;
        for (j, &xj) in xi.iter().enumerate() {
            let d = xv - xj;
            let k = ((d - lo) / h).round() as usize;
            let wgt = if j == 0 || j + 1 == xi.len() { 0.5 } else { 1.0 };
            acc += wgt * rho_rest.values[k] * rho_tau.values[j];
        }
        worst = worst.max((acc * h - rho_t.values[i]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mass_bounds() {
        let m = mass_bound(&LevyTriplet::brownian(1.0), 1.0).unwrap();
        assert!((m.value - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-10);
        let m = mass_bound(&LevyTriplet::cauchy(), 1.0).unwrap();
        assert!((m.value - 1.0 / PI).abs() < 1e-10);
        let cp = LevyTriplet::compound_poisson(crate::models::CompoundPoisson::laplace(1.0, 1.0));
        assert!(mass_bound(&cp, 1.0).unwrap().divergent);
        assert!(transition_density(&cp, 1.0, &[0.0]).is_err());
    }

    #[test]
    fn small_time() {
        let b = small_time_integrability(&LevyTriplet::brownian(1.0)).unwrap();
        assert!(b.finite && (b.exponent - 0.5).abs() < 1e-3);
        let s = small_time_integrability(&LevyTriplet::stable(0.5, 1.0, 1.0)).unwrap();
        assert!(!s.finite && (s.exponent - 2.0).abs() < 1e-3, "{s:?}");
        let s = small_time_integrability(&LevyTriplet::stable(1.5, 1.0, 1.0)).unwrap();
        assert!(s.finite && (s.exponent - 2.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn gaussian_and_cauchy_densities() {
        let xs: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.25).collect();
        let g = transition_density(&LevyTriplet::brownian(1.0), 1.0, &xs).unwrap();
        for (x, v) in xs.iter().zip(&g.values) {
            assert!((v - (-0.5 * x * x).exp() / (2.0 * PI).sqrt()).abs() < 1e-10);
        }
        let c = transition_density(&LevyTriplet::cauchy(), 1.0, &xs).unwrap();
        for (x, v) in xs.iter().zip(&c.values) {
            assert!((v - 1.0 / (PI * (1.0 + x * x))).abs() < 1e-6, "x={x}");
        }
        for k in 0..xs.len() {
            assert!((c.values[k] - c.values[xs.len() - 1 - k]).abs() < 1e-10);
        }
    }
}
