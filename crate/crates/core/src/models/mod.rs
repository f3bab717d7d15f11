//! Lévy triplets, the catalog of Lévy measures and the characteristic
//! exponent.

pub mod bessel;
pub mod config;
mod exponent;
pub mod tables;
pub mod validate;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{LevyError, Result};
use crate::quad::{adaptive, Tolerance};

pub use bessel::bessel_k1;
pub use config::ModelConfig;
pub use exponent::{char_exponent, char_exponent_quadrature, re_char_exponent, stable_char_exponent};
pub use tables::MeasureTables;
pub use validate::{validate_triplet, ValidationEntry, ValidationReport};

/// Shared scalar function, used for user-supplied densities.
#[derive(Clone)]
pub struct ScalarFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl ScalarFn {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarFn(..)")
    }
}

/// Which half-line a jump lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// Large-jump behaviour of one side of a Lévy density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// Density negligible (relative to its bulk) beyond this radius.
    Cutoff(f64),
    /// `ν'(r) ≈ coef · r^{-exponent}` for `r ≥ from`.
    Power { coef: f64, exponent: f64, from: f64 },
}

/// Jump-size density of a compound Poisson process.
#[derive(Clone, Debug)]
pub enum JumpDensity {
    /// `c e^{-b|y|}`
    Laplace { c: f64, b: f64 },
    /// `c e^{-y²/(2σ²)}`
    Gaussian { c: f64, sigma: f64 },
    /// Arbitrary nonnegative integrable density, negligible beyond `cutoff`.
    Function { f: ScalarFn, cutoff: f64 },
}

#[derive(Clone, Debug)]
pub struct CompoundPoisson {
    pub density: JumpDensity,
}

impl CompoundPoisson {
    pub fn laplace(c: f64, b: f64) -> Self {
        Self { density: JumpDensity::Laplace { c, b } }
    }

    pub fn gaussian(c: f64, sigma: f64) -> Self {
        Self { density: JumpDensity::Gaussian { c, sigma } }
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, cutoff: f64) -> Self {
        Self { density: JumpDensity::Function { f: ScalarFn::new(f), cutoff } }
    }

    /// ν'(y), finite everywhere including the origin.
    pub fn density(&self, y: f64) -> f64 {
        match &self.density {
            JumpDensity::Laplace { c, b } => c * (-b * y.abs()).exp(),
            JumpDensity::Gaussian { c, sigma } => c * (-0.5 * (y / sigma).powi(2)).exp(),
            JumpDensity::Function { f, .. } => f.eval(y),
        }
    }

    pub fn cutoff(&self) -> f64 {
        match &self.density {
            JumpDensity::Laplace { b, .. } => 42.0 / b,
            JumpDensity::Gaussian { sigma, .. } => 9.5 * sigma,
            JumpDensity::Function { cutoff, .. } => *cutoff,
        }
    }

    /// Total jump intensity `M = ∫ν'`.
    pub fn mass(&self) -> f64 {
        match &self.density {
            JumpDensity::Laplace { c, b } => 2.0 * c / b,
            JumpDensity::Gaussian { c, sigma } => c * sigma * (2.0 * PI).sqrt(),
            JumpDensity::Function { f, cutoff } => {
                let g = |y: f64| f.eval(y);
                let tol = Tolerance::new(1e-14, 1e-12);
                let l = adaptive(g, -cutoff, 0.0, tol).map(|e| e.value).unwrap_or(f64::NAN);
                let r = adaptive(g, 0.0, *cutoff, tol).map(|e| e.value).unwrap_or(f64::NAN);
                l + r
            }
        }
    }

    /// `∫[ν'(y)]² dy`.
    pub fn square_integral(&self) -> f64 {
        match &self.density {
            JumpDensity::Laplace { c, b } => c * c / b,
            JumpDensity::Gaussian { c, sigma } => c * c * sigma * PI.sqrt(),
            JumpDensity::Function { f, cutoff } => {
                let g = |y: f64| f.eval(y).powi(2);
                let tol = Tolerance::new(1e-14, 1e-12);
                adaptive(g, -cutoff, 0.0, tol).map(|e| e.value).unwrap_or(f64::NAN)
                    + adaptive(g, 0.0, *cutoff, tol).map(|e| e.value).unwrap_or(f64::NAN)
            }
        }
    }

    fn check(&self) -> Result<()> {
        match &self.density {
            JumpDensity::Laplace { c, b } => {
                if !(*c > 0.0 && *b > 0.0) {
                    return Err(LevyError::InvalidModel(format!("laplace jumps need c>0, b>0 (c={c}, b={b})")));
                }
            }
            JumpDensity::Gaussian { c, sigma } => {
                if !(*c > 0.0 && *sigma > 0.0) {
                    return Err(LevyError::InvalidModel(format!("gaussian jumps need c>0, sigma>0 (c={c}, sigma={sigma})")));
                }
            }
            JumpDensity::Function { cutoff, .. } => {
                if !(*cutoff > 0.0 && cutoff.is_finite()) {
                    return Err(LevyError::InvalidModel("jump density cutoff must be positive and finite".into()));
                }
            }
        }
        let m = self.mass();
        if !(m > 0.0 && m.is_finite()) {
            return Err(LevyError::InvalidModel(format!("compound Poisson mass must be finite and positive, got {m}")));
        }
        Ok(())
    }
}

/// Lévy density given as a function together with its declared envelope
/// `ν'(y) ≤ envelope · |y|^{-alpha-1}`.
#[derive(Clone, Debug)]
pub struct CustomMeasure {
    pub density: ScalarFn,
    pub alpha: f64,
    pub envelope: f64,
    /// Density is treated as zero beyond this radius.
    pub cutoff: f64,
}

#[derive(Clone, Debug)]
pub enum LevyMeasure {
    PureDiffusion,
    Stable { alpha: f64, c1: f64, c2: f64 },
    DampedStable { alpha: f64, c1: f64, c2: f64, lambda1: f64, lambda2: f64 },
    VarianceGamma { c1: f64, c2: f64, g: f64, m: f64 },
    Nig { c: f64, beta: f64 },
    Meixner { c: f64, beta: f64 },
    CompoundPoisson(CompoundPoisson),
    Custom(CustomMeasure),
}

impl LevyMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            LevyMeasure::PureDiffusion => "pure_diffusion",
            LevyMeasure::Stable { .. } => "stable",
            LevyMeasure::DampedStable { .. } => "damped_stable",
            LevyMeasure::VarianceGamma { .. } => "variance_gamma",
            LevyMeasure::Nig { .. } => "nig",
            LevyMeasure::Meixner { .. } => "meixner",
            LevyMeasure::CompoundPoisson(_) => "compound_poisson",
            LevyMeasure::Custom(_) => "custom",
        }
    }

    /// Parameter constraints of each catalog family.
    pub fn check_parameters(&self) -> Result<()> {
        let bad = |msg: String| Err(LevyError::InvalidModel(msg));
        match self {
            LevyMeasure::PureDiffusion => Ok(()),
            LevyMeasure::Stable { alpha, c1, c2 } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return bad(format!("stable alpha must lie in (0,2), got {alpha}"));
                }
                if !(*c1 > 0.0 && *c2 > 0.0) {
                    return bad(format!("stable needs c1>0, c2>0 (c1={c1}, c2={c2})"));
                }
                Ok(())
            }
            LevyMeasure::DampedStable { alpha, c1, c2, lambda1, lambda2 } => {
                if !(*alpha > 0.0 && *alpha < 2.0) || *alpha == 1.0 {
                    return bad(format!("damped stable alpha must lie in (0,2) and differ from 1, got {alpha}"));
                }
                if !(*c1 > 0.0 && *c2 > 0.0 && *lambda1 > 0.0 && *lambda2 > 0.0) {
                    return bad("damped stable needs c1, c2, lambda1, lambda2 > 0".into());
                }
                Ok(())
            }
            LevyMeasure::VarianceGamma { c1, c2, g, m } => {
                if !(*c1 > 0.0 && *c2 > 0.0 && *g > 0.0 && *m > 0.0) {
                    return bad("variance gamma needs c1, c2, g, m > 0".into());
                }
                Ok(())
            }
            LevyMeasure::Nig { c, beta } => {
                if !(*c > 0.0) || !(-1.0..=1.0).contains(beta) {
                    return bad(format!("nig needs c>0 and beta in [-1,1] (c={c}, beta={beta})"));
                }
                Ok(())
            }
            LevyMeasure::Meixner { c, beta } => {
                if !(*c > 0.0) || !(*beta > -PI && *beta < PI) {
                    return bad(format!("meixner needs c>0 and beta in (-pi,pi) (c={c}, beta={beta})"));
                }
                Ok(())
            }
            LevyMeasure::CompoundPoisson(cp) => cp.check(),
            LevyMeasure::Custom(cm) => {
                if !(cm.envelope > 0.0 && cm.cutoff > 0.0 && cm.cutoff.is_finite() && cm.alpha.is_finite()) {
                    return bad("custom measure needs envelope>0, finite cutoff>0 and a declared alpha".into());
                }
                Ok(())
            }
        }
    }

    /// ν'(y) for `y ≠ 0`.
    pub fn density(&self, y: f64) -> Result<f64> {
        if y == 0.0 || !y.is_finite() {
            return Err(LevyError::Domain(format!("Levy density is evaluated at y != 0, got {y}")));
        }
        let side = if y < 0.0 { Side::Left } else { Side::Right };
        Ok(self.side_density(side, y.abs()))
    }

    /// ν'(±r) for `r > 0`, no argument checks.
    pub fn side_density(&self, side: Side, r: f64) -> f64 {
        let left = side == Side::Left;
        match self {
            LevyMeasure::PureDiffusion => 0.0,
            LevyMeasure::Stable { alpha, c1, c2 } => {
                let c = if left { c1 } else { c2 };
                c * r.powf(-alpha - 1.0)
            }
            LevyMeasure::DampedStable { alpha, c1, c2, lambda1, lambda2 } => {
                let (c, l) = if left { (c1, lambda1) } else { (c2, lambda2) };
                c * (-l * r).exp() * r.powf(-alpha - 1.0)
            }
            LevyMeasure::VarianceGamma { c1, c2, g, m } => {
                let (c, l) = if left { (c1, g) } else { (c2, m) };
                c * (-l * r).exp() / r
            }
            LevyMeasure::Nig { c, beta } => {
                let y = side.sign() * r;
                // e^{βy} K1(r) = e^{βy - r} · (e^r K1(r))
                let scaled = bessel::bessel_k1_scaled(r).unwrap_or(0.0);
                c * (beta * y - r).exp() * scaled / r
            }
            LevyMeasure::Meixner { c, beta } => {
                let y = side.sign() * r;
                // e^{βy}/(y sinh πy) written to avoid overflow for large r
                let e = (beta * y - PI * r).exp();
                c * 2.0 * e / (r * -(-2.0 * PI * r).exp_m1())
            }
            LevyMeasure::CompoundPoisson(cp) => cp.density(side.sign() * r),
            LevyMeasure::Custom(cm) => {
                if r > cm.cutoff {
                    0.0
                } else {
                    cm.density.eval(side.sign() * r)
                }
            }
        }
    }

    /// Index α of the small-jump singularity `ν'(y) ~ c|y|^{-α-1}`;
    /// `None` for finite-mass and diffusion-only measures.
    pub fn singularity_index(&self) -> Option<f64> {
        match self {
            LevyMeasure::PureDiffusion | LevyMeasure::CompoundPoisson(_) => None,
            LevyMeasure::Stable { alpha, .. } | LevyMeasure::DampedStable { alpha, .. } => Some(*alpha),
            LevyMeasure::VarianceGamma { .. } => Some(0.0),
            LevyMeasure::Nig { .. } | LevyMeasure::Meixner { .. } => Some(1.0),
            LevyMeasure::Custom(cm) => Some(cm.alpha),
        }
    }

    /// Leading small-jump coefficients `(c_left, c_right)` with
    /// `ν'(±r) ≈ c r^{-α-1}` as `r → 0`. Estimated from the density for
    /// custom measures.
    pub fn leading_coefficients(&self) -> (f64, f64) {
        match self {
            LevyMeasure::PureDiffusion | LevyMeasure::CompoundPoisson(_) => (0.0, 0.0),
            LevyMeasure::Stable { c1, c2, .. }
            | LevyMeasure::DampedStable { c1, c2, .. }
            | LevyMeasure::VarianceGamma { c1, c2, .. } => (*c1, *c2),
            LevyMeasure::Nig { c, .. } => (*c, *c),
            LevyMeasure::Meixner { c, .. } => (c / PI, c / PI),
            LevyMeasure::Custom(cm) => {
                let r = 1e-9;
                let p = cm.alpha + 1.0;
                (
                    cm.density.eval(-r) * r.powf(p),
                    cm.density.eval(r) * r.powf(p),
                )
            }
        }
    }

    pub fn tail(&self, side: Side) -> Tail {
        let left = side == Side::Left;
        let exp_cutoff = |rate: f64| Tail::Cutoff((42.0 / rate).max(1.0));
        match self {
            LevyMeasure::PureDiffusion => Tail::Cutoff(1.0),
            LevyMeasure::Stable { alpha, c1, c2 } => Tail::Power {
                coef: if left { *c1 } else { *c2 },
                exponent: alpha + 1.0,
                from: 1.0,
            },
            LevyMeasure::DampedStable { lambda1, lambda2, .. } => exp_cutoff(if left { *lambda1 } else { *lambda2 }),
            LevyMeasure::VarianceGamma { g, m, .. } => exp_cutoff(if left { *g } else { *m }),
            LevyMeasure::Nig { c, beta } => {
                let rate = if left { 1.0 + beta } else { 1.0 - beta };
                if rate > 1e-3 {
                    exp_cutoff(rate)
                } else {
                    Tail::Power { coef: c * (PI / 2.0).sqrt(), exponent: 1.5, from: 1.0 }
                }
            }
            LevyMeasure::Meixner { beta, .. } => exp_cutoff(if left { PI + beta } else { PI - beta }),
            LevyMeasure::CompoundPoisson(cp) => Tail::Cutoff(cp.cutoff()),
            LevyMeasure::Custom(cm) => Tail::Cutoff(cm.cutoff),
        }
    }

    pub fn has_finite_mass(&self) -> bool {
        matches!(self, LevyMeasure::CompoundPoisson(_) | LevyMeasure::PureDiffusion)
    }

    /// Mirror symmetry `ν'(-y) = ν'(y)`, decided from the parameters.
    pub fn is_symmetric(&self) -> bool {
        match self {
            LevyMeasure::PureDiffusion => true,
            LevyMeasure::Stable { c1, c2, .. } => c1 == c2,
            LevyMeasure::DampedStable { c1, c2, lambda1, lambda2, .. } => c1 == c2 && lambda1 == lambda2,
            LevyMeasure::VarianceGamma { c1, c2, g, m } => c1 == c2 && g == m,
            LevyMeasure::Nig { beta, .. } | LevyMeasure::Meixner { beta, .. } => *beta == 0.0,
            LevyMeasure::CompoundPoisson(cp) => matches!(cp.density, JumpDensity::Laplace { .. } | JumpDensity::Gaussian { .. }),
            LevyMeasure::Custom(_) => false,
        }
    }
}

/// `(A, γ, ν)`: diffusion coefficient, drift and Lévy measure. The
/// compensator in the exponent uses the closed unit ball `|x| ≤ 1`.
#[derive(Clone, Debug)]
pub struct LevyTriplet {
    pub a: f64,
    pub gamma: f64,
    pub measure: LevyMeasure,
}

impl LevyTriplet {
    pub fn new(a: f64, gamma: f64, measure: LevyMeasure) -> Result<Self> {
        let t = Self { a, gamma, measure };
        t.check()?;
        Ok(t)
    }

    pub fn brownian(a: f64) -> Self {
        Self { a, gamma: 0.0, measure: LevyMeasure::PureDiffusion }
    }

    pub fn drift(gamma: f64) -> Self {
        Self { a: 0.0, gamma, measure: LevyMeasure::PureDiffusion }
    }

    pub fn stable(alpha: f64, c1: f64, c2: f64) -> Self {
        Self { a: 0.0, gamma: 0.0, measure: LevyMeasure::Stable { alpha, c1, c2 } }
    }

    /// Symmetric Cauchy process with `λ(z) = |z|`.
    pub fn cauchy() -> Self {
        Self::stable(1.0, 1.0 / PI, 1.0 / PI)
    }

    pub fn compound_poisson(cp: CompoundPoisson) -> Self {
        Self { a: 0.0, gamma: 0.0, measure: LevyMeasure::CompoundPoisson(cp) }
    }

    pub fn with_drift(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_diffusion(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    /// Basic invariants: `A ≥ 0`, finite drift, admissible parameters.
    pub fn check(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(LevyError::InvalidModel(format!("diffusion coefficient must be finite and >= 0, got {}", self.a)));
        }
        if !self.gamma.is_finite() {
            return Err(LevyError::InvalidModel("drift must be finite".into()));
        }
        self.measure.check_parameters()
    }

    pub fn is_symmetric(&self) -> bool {
        self.gamma == 0.0 && self.measure.is_symmetric()
    }
}

/// ν'(y) of a catalog measure; errors at `y = 0`.
pub fn levy_density(spec: &LevyMeasure, y: f64) -> Result<f64> {
    spec.density(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_density_values() {
        let s = LevyMeasure::Stable { alpha: 0.5, c1: 1.0, c2: 2.0 };
        assert!((levy_density(&s, 2.0).unwrap() - 2.0 * 2f64.powf(-1.5)).abs() < 1e-15);
        let vg = LevyMeasure::VarianceGamma { c1: 1.0, c2: 1.0, g: 1.0, m: 1.0 };
        assert!((levy_density(&vg, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(levy_density(&vg, 0.0).is_err());
    }

    #[test]
    fn nig_density_near_zero_is_bounded_by_inverse_square() {
        let nig = LevyMeasure::Nig { c: 1.0, beta: 0.0 };
        for k in 1..12 {
            let y = 10f64.powi(-k);
            let v = levy_density(&nig, y).unwrap() * y * y;
            assert!(v <= 1.0 + 1e-9 && v > 0.9, "y={y} v={v}");
        }
    }

    #[test]
    fn meixner_density_matches_direct_formula() {
        let c = 0.7;
        let beta = 0.4;
        let mx = LevyMeasure::Meixner { c, beta };
        for &y in &[-2.0, -0.3, 0.1, 1.5] {
            let direct = c * (beta * y).exp() / (y * (PI * y).sinh());
            assert!((levy_density(&mx, y).unwrap() - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(LevyTriplet::new(-1.0, 0.0, LevyMeasure::PureDiffusion).is_err());
        assert!(LevyTriplet::new(0.0, 0.0, LevyMeasure::Stable { alpha: 2.0, c1: 1.0, c2: 1.0 }).is_err());
        assert!(LevyTriplet::new(0.0, 0.0, LevyMeasure::Nig { c: 1.0, beta: 1.5 }).is_err());
        assert!(LevyTriplet::new(0.0, 0.0, LevyMeasure::DampedStable { alpha: 1.0, c1: 1.0, c2: 1.0, lambda1: 1.0, lambda2: 1.0 }).is_err());
        assert!(LevyTriplet::new(1.0, 0.5, LevyMeasure::Meixner { c: 1.0, beta: 0.5 }).is_ok());
    }

    #[test]
    fn compound_poisson_mass() {
        let cp = CompoundPoisson::laplace(1.0, 1.0);
        assert!((cp.mass() - 2.0).abs() < 1e-15);
        let f = CompoundPoisson::from_fn(|y: f64| (-y.abs()).exp(), 45.0);
        assert!((f.mass() - 2.0).abs() < 1e-10);
        assert!((f.square_integral() - 1.0).abs() < 1e-10);
    }
}
