//! Potential `Q = ∫_0^∞ P_t dt` of a compound Poisson semigroup built from
//! the Fourier symbols `K(u) = −(M√(2π))^{-1}∫ν'(x)e^{−iux}dx` and
//! `N = K/(1 − √(2π)K)`, together with the resolvent `(sI − L)^{-1}` as a
//! trusted reference.
//!
//! Fourier convention: `ĝ(u) = (2π)^{-1/2} ∫ g(x) e^{−iux} dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{LevyError, Result};
use crate::kernels::{apply_generator_cp, cubic_offset_weights};
use crate::models::{CompoundPoisson, JumpDensity};
use crate::quad::{adaptive, Tolerance};
use crate::GridFunction;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Sign given to the kernel `n` when forming `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NSign {
    /// `n(x) = −(2π)^{-1/2} ∫ N(u) e^{−iux} du`
    AsPrinted,
    Flipped,
}

#[derive(Clone, Debug)]
pub struct PotentialOperator {
    pub spec: CompoundPoisson,
    pub mass: f64,
    /// `∫_{|y|≤1} y ν'(y) dy`
    pub small_mean: f64,
    /// Smooth part `n(x) − ν'(−x)/M` on `[−extent, extent]`.
    remainder: Vec<f64>,
    remainder_step: f64,
    extent: f64,
}

/// `∫ ν'(x) e^{−iux} dx`
fn density_transform(spec: &CompoundPoisson, u: f64) -> Complex64 {
    match spec.density {
        JumpDensity::Laplace { c, b } => Complex64::new(2.0 * c * b / (b * b + u * u), 0.0),
        JumpDensity::Gaussian { c, sigma } => Complex64::new(c * sigma * SQRT_2PI * (-0.5 * sigma * sigma * u * u).exp(), 0.0),
        JumpDensity::Function { .. } => {
            let x = spec.cutoff();
            let tol = Tolerance::new(1e-14, 1e-11);
            let pieces = ((2.0 * x * u.abs() / PI).ceil() as usize).max(1);
            let h = 2.0 * x / pieces as f64;
            let mut re = 0.0;
            let mut im = 0.0;
            for k in 0..pieces {
                let a = -x + k as f64 * h;
                re += adaptive(|y: f64| spec.density(y) * (u * y).cos(), a, a + h, tol).map(|e| e.value).unwrap_or(f64::NAN);
                im -= adaptive(|y: f64| spec.density(y) * (u * y).sin(), a, a + h, tol).map(|e| e.value).unwrap_or(f64::NAN);
            }
            Complex64::new(re, im)
        }
    }
}

impl PotentialOperator {
    /// Checks `M < ∞`, `∫ν'² < ∞` and tabulates `n` on `[−extent, extent]`
    /// with step `step`.
    pub fn build(spec: &CompoundPoisson, extent: f64, step: f64) -> Result<Self> {
        let mass = spec.mass();
        let sq = spec.square_integral();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(LevyError::Precondition(format!("jump mass must be finite and positive, got {mass}")));
        }
        if !sq.is_finite() {
            return Err(LevyError::Precondition("jump density is not square integrable".into()));
        }
        let small_mean = adaptive(|y: f64| y * spec.density(y), -1.0, 0.0, Tolerance::default())?.value
            + adaptive(|y: f64| y * spec.density(y), 0.0, 1.0, Tolerance::default())?.value;
        let mut op = Self { spec: spec.clone(), mass, small_mean, remainder: Vec::new(), remainder_step: step, extent };
        op.tabulate_remainder()?;
        Ok(op)
    }

    /// `K(u)`
    pub fn symbol_k(&self, u: f64) -> Complex64 {
        -density_transform(&self.spec, u) / (self.mass * SQRT_2PI)
    }

    /// `N(u) = K(u)/(1 − √(2π)K(u))`
    pub fn symbol_n(&self, u: f64) -> Complex64 {
        let k = self.symbol_k(u);
        k / (1.0 - SQRT_2PI * k)
    }

    /// `λ(u)` of the compound Poisson process, from `K`.
    pub fn exponent(&self, u: f64) -> Complex64 {
        self.mass * (1.0 + SQRT_2PI * self.symbol_k(u).conj()) + Complex64::new(0.0, u * self.small_mean)
    }

    /// `N − K = √(2π)K²/(1 − √(2π)K)` decays like `K²`, so its inverse
    /// transform converges fast; the `K` part inverts to `ν'(−x)/M` exactly.
    fn tabulate_remainder(&mut self) -> Result<()> {
        let dx = self.remainder_step;
        let n = (4.0 * self.extent / dx).ceil().max(64.0) as usize;
        let n = n.next_power_of_two();
        let du = 2.0 * PI / (n as f64 * dx);
        let mut buf: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let u = frequency(k, n, du);
                let kk = self.symbol_k(u);
                SQRT_2PI * kk * kk / (1.0 - SQRT_2PI * kk)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let half = ((self.extent / dx).ceil() as usize).min(n / 2 - 1);
        self.remainder = (0..=2 * half)
            .map(|i| {
                let j = (i as i64 - half as i64).rem_euclid(n as i64) as usize;
                -buf[j].re * du / SQRT_2PI
            })
            .collect();
        self.extent = half as f64 * dx;
        Ok(())
    }

    /// `n(x)` with the sign convention as printed.
    pub fn kernel_n(&self, x: f64) -> f64 {
        self.spec.density(-x) / self.mass + self.remainder_at(x)
    }

    fn remainder_at(&self, x: f64) -> f64 {
        if x.abs() >= self.extent {
            return 0.0;
        }
        let p = (x + self.extent) / self.remainder_step;
        let i = (p.floor() as usize).clamp(1, self.remainder.len() - 3);
        let t = p - i as f64;
        let y = &self.remainder[i - 1..i + 3];
        // cubic Lagrange on nodes i−1..i+2
        -t * (t - 1.0) * (t - 2.0) / 6.0 * y[0] + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * y[1]
            - (t + 1.0) * t * (t - 2.0) / 2.0 * y[2]
            + (t + 1.0) * t * (t - 1.0) / 6.0 * y[3]
    }

    /// Tail of the tabulated `n`: largest `|n|` on the outer tenth of the table.
    pub fn kernel_tail(&self) -> f64 {
        let m = self.remainder.len();
        let k = m / 10;
        let mut worst = 0.0f64;
        for i in (0..k).chain(m - k..m) {
            let x = -self.extent + i as f64 * self.remainder_step;
            worst = worst.max(self.kernel_n(x).abs());
        }
        worst
    }

    /// `Qf = M^{-1}[f(x) ± ∫ f(y) n(x − y) dy]`.
    pub fn apply_q(&self, f: &GridFunction, sign: NSign) -> Result<GridFunction> {
        let h = grid_step(f)?;
        let nodes = f.nodes();
        let span = nodes[nodes.len() - 1] - nodes[0];
        let sgn = if sign == NSign::AsPrinted { 1.0 } else { -1.0 };
        // ∫ f(y) n(x − y) dy = ∫ n(−u) f(x + u) du
        let w = cubic_offset_weights(|u| self.kernel_n(-u), h, -span, span, &[0.0]);
        let v = f.values();
        let out = (0..v.len()).map(|i| (v[i] + sgn * w.apply_at(v, i)) / self.mass).collect();
        Ok(f.with_values(out))
    }

    /// Bound `|K(u)| < (2π)^{-1/2}` for `u ≠ 0` and `K(0) = −(2π)^{-1/2}` on
    /// `|u| ≤ u_max`; returns `(K(0), max_{u≠0}|K(u)|, holds)`.
    pub fn check_k_bound(&self, u_max: f64, points: usize) -> (f64, f64, bool) {
        let k0 = self.symbol_k(0.0).re;
        let mut worst = 0.0f64;
        for j in 1..=points {
            let u = u_max * j as f64 / points as f64;
            worst = worst.max(self.symbol_k(u).norm()).max(self.symbol_k(-u).norm());
        }
        let bound = 1.0 / SQRT_2PI;
        (k0, worst, (k0 + bound).abs() < 1e-12 && worst < bound)
    }
}

/// [`PotentialOperator::build`] with `n` tabulated on `[−40, 40]` at step `0.005`.
pub fn build_potential(spec: &CompoundPoisson) -> Result<PotentialOperator> {
    PotentialOperator::build(spec, 40.0, 0.005)
}

fn grid_step(f: &GridFunction) -> Result<f64> {
    if f.len() < 5 {
        return Err(LevyError::GridTooSmall { need: 5, got: f.len() });
    }
    if !f.is_uniform(1e-9) {
        return Err(LevyError::InvalidGrid("potential operators need equispaced nodes".into()));
    }
    Ok(f.spacing())
}

fn frequency(k: usize, n: usize, du: f64) -> f64 {
    if k < n / 2 { k as f64 * du } else { (k as f64 - n as f64) * du }
}

/// `(sI − L)^{-1} g` through the symbol `1/(s + λ(u))`; `g` is zero-padded
/// to four times its span before the discrete transform.
pub fn resolvent_apply(op: &PotentialOperator, s: f64, g: &GridFunction) -> Result<GridFunction> {
    if !(s > 0.0) {
        return Err(LevyError::Domain(format!("resolvent needs s > 0, got {s}")));
    }
    let h = grid_step(g)?;
    let v = g.values();
    let n = (4 * v.len()).next_power_of_two();
    let du = 2.0 * PI / (n as f64 * h);
    let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).chain(std::iter::repeat(Complex64::new(0.0, 0.0))).take(n).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let multiplier: Vec<Complex64> = (0..n).into_par_iter().map(|k| 1.0 / (s + op.exponent(frequency(k, n, du)))).collect();
    for (b, m) in buf.iter_mut().zip(&multiplier) {
        *b *= m;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(g.with_values(buf[..v.len()].iter().map(|c| c.re / n as f64).collect()))
}

#[derive(Clone, Debug, Serialize)]
pub struct PotentialResidual {
    pub function: String,
    pub variant: String,
    pub s: Option<f64>,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PotentialReport {
    pub mass: f64,
    pub k_at_zero: f64,
    pub k_sup_off_zero: f64,
    pub k_bound_holds: bool,
    pub kernel_tail: f64,
    pub tolerance: f64,
    pub residuals: Vec<PotentialResidual>,
    /// Variants meeting the tolerance for every test function.
    pub satisfying_variants: Vec<String>,
    /// Sign of `n` with the smaller worst residual.
    pub best_sign: String,
}

/// Named test function `g` for the potential residuals.
pub type TestFunction = (String, Box<dyn Fn(f64) -> f64 + Send + Sync>);

/// Default test family: Gaussians with and without mean, an odd one and a
/// modulated one.
pub fn default_family() -> Vec<TestFunction> {
    vec![
        ("gauss".to_string(), Box::new(|x: f64| (-x * x).exp())),
        ("shifted_gauss".to_string(), Box::new(|x: f64| (-2.0 * (x - 1.0).powi(2)).exp())),
        ("odd_gauss".to_string(), Box::new(|x: f64| x * (-x * x).exp())),
        ("modulated".to_string(), Box::new(|x: f64| (2.0 * x).cos() * (-0.5 * x * x).exp())),
    ]
}

/// Residuals `‖−L(Qg) − g‖∞` for both signs of `n`, and
/// `‖(sI − L)Rₛg − g‖∞` for the resolvent at each `s`. Operators act on
/// about `[−2w, 2w]` at the same spacing; residuals are taken over `[−w, w]`.
pub fn verify_potential(
    spec: &CompoundPoisson,
    family: &[TestFunction],
    s_values: &[f64],
    half_width: f64,
    n: usize,
) -> Result<PotentialReport> {
    let tolerance = 1e-3;
    if n < 5 {
        return Err(LevyError::GridTooSmall { need: 5, got: n });
    }
    let h = 2.0 * half_width / (n - 1) as f64;
    let pad = n.div_ceil(2);
    let outer = half_width + pad as f64 * h;
    let inner = pad..pad + n;
    let op = PotentialOperator::build(spec, 2.0 * outer, h)?;
    let (k0, ksup, holds) = op.check_k_bound(100.0, 2000);
    let sup = |a: &[f64]| a[inner.clone()].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut residuals = Vec::new();
    for (name, g) in family {
        let gf = GridFunction::from_fn(-outer, outer, n + 2 * pad, g)?;
        for (sign, label) in [(NSign::AsPrinted, "as_printed"), (NSign::Flipped, "flipped")] {
            let q = op.apply_q(&gf, sign)?;
            let lq = apply_generator_cp(spec, &q)?;
            let diff: Vec<f64> = lq.values().iter().zip(gf.values()).map(|(a, b)| -a - b).collect();
            let r = sup(&diff);
            residuals.push(PotentialResidual { function: name.clone(), variant: label.into(), s: None, residual: r, pass: r <= tolerance });
        }
        for &s in s_values {
            let rg = resolvent_apply(&op, s, &gf)?;
            let lr = apply_generator_cp(spec, &rg)?;
            let diff: Vec<f64> = rg.values().iter().zip(lr.values()).zip(gf.values()).map(|((a, l), b)| s * a - l - b).collect();
            let r = sup(&diff);
            residuals.push(PotentialResidual {
                function: name.clone(),
                variant: "resolvent".into(),
                s: Some(s),
                residual: r,
                pass: r <= tolerance,
            });
        }
    }
    let mut satisfying = Vec::new();
    for v in ["as_printed", "flipped", "resolvent"] {
        let rows: Vec<&PotentialResidual> = residuals.iter().filter(|r| r.variant == v).collect();
        if !rows.is_empty() && rows.iter().all(|r| r.pass) {
            satisfying.push(v.to_string());
        }
    }
    let worst = |v: &str| residuals.iter().filter(|r| r.variant == v).fold(0.0f64, |m, r| m.max(r.residual));
    let best_sign = if worst("as_printed") <= worst("flipped") { "as_printed" } else { "flipped" }.to_string();
    Ok(PotentialReport {
        best_sign,
        mass: op.mass,
        k_at_zero: k0,
        k_sup_off_zero: ksup,
        k_bound_holds: holds,
        kernel_tail: op.kernel_tail(),
        tolerance,
        residuals,
        satisfying_variants: satisfying,
    })
}
