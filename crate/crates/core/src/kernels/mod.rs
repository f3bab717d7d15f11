//! Convolution form `L = d/dx S d/dx` of a Lévy generator with
//! `Sf = ½Af + ∫ k(y−x) f(y) dy`, and the direct integro-differential form
//! used to cross-check it.

mod apply;
mod moments;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{LevyError, Result};
use crate::models::tables::{MeasureTables, SideTable};
use crate::models::{validate_triplet, LevyMeasure, LevyTriplet, Side};

pub use apply::{
    apply_generator_conv, apply_generator_cp, apply_generator_direct, apply_s, central_derivative,
    DirectGenerator,
};
pub use moments::{cell_integral, cubic_offset_weights, hat_moments};

/// Choice of the drift correction `Γ` collected when the jump part is
/// written in convolution form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaRule {
    /// `k₀(−1) − k₀'(−1) − k₀(−1) + k₀'(1)`
    AsWritten,
    /// `k₀(−1) − k₀'(−1) − k₀(1) + k₀'(1)`
    Corrected,
    /// `k₀(−1) + k₀'(−1) − k₀(1) + k₀'(1)`, obtained by integrating the
    /// convolution by parts on each side of ±1.
    Consistent,
}

impl GammaRule {
    pub const ALL: [GammaRule; 3] = [GammaRule::AsWritten, GammaRule::Corrected, GammaRule::Consistent];

    pub fn name(self) -> &'static str {
        match self {
            GammaRule::AsWritten => "as_written",
            GammaRule::Corrected => "corrected",
            GammaRule::Consistent => "consistent",
        }
    }

    /// `Γ` from `k₀(±1)` and `ν(±1) = k₀'(±1)`.
    pub fn evaluate(self, k_minus: f64, k_plus: f64, nu_minus: f64, nu_plus: f64) -> f64 {
        match self {
            GammaRule::AsWritten => k_minus - nu_minus - k_minus + nu_plus,
            GammaRule::Corrected => k_minus - nu_minus - k_plus + nu_plus,
            GammaRule::Consistent => k_minus + nu_minus - k_plus + nu_plus,
        }
    }
}

/// How `k₀` is anchored on one half-line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideForm {
    /// `−(r T(r) + ∫_0^r s ν' ds)`, vanishes at 0 (index below 1).
    Inner,
    /// `∫_r^∞ (s − r) ν' ds`, vanishes at infinity.
    Outer,
    /// `∫_r^1 T(u) du`, vanishes at 1 (heavy tails with index ≥ 1).
    Anchored,
}

#[derive(Clone, Debug)]
pub enum KernelShape {
    Zero,
    /// `|y|^{1−α}/(α(α−1)) · c_side`
    StablePower { alpha: f64, c1: f64, c2: f64 },
    /// `−log|y| · c_side`
    Log { c1: f64, c2: f64 },
    Tabulated { tables: Arc<MeasureTables>, left: SideForm, right: SideForm },
}

/// `k(y) = k₀(y) + sign_coeff · ½ sign(y)` together with the diffusion
/// part `a_half = A/2` of `S`.
#[derive(Clone, Debug)]
pub struct ConvolutionKernel {
    pub shape: KernelShape,
    pub sign_coeff: f64,
    pub gamma_correction: f64,
    pub a_half: f64,
    /// `s` with `|k₀(y)| ~ |y|^{-s}` at the origin (`α − 1`; 0 for the log case).
    pub singularity: f64,
    pub gamma_rule: GammaRule,
}

fn side_of(y: f64) -> Side {
    if y < 0.0 {
        Side::Left
    } else {
        Side::Right
    }
}

fn side_form(table: &SideTable) -> SideForm {
    match table.singularity_index() {
        Some(a) if a < 1.0 => SideForm::Inner,
        None => SideForm::Inner,
        _ if table.outer_first_moment(1.0).is_some() => SideForm::Outer,
        _ => SideForm::Anchored,
    }
}

fn tabulated_k0(table: &SideTable, form: SideForm, r: f64) -> f64 {
    let t = table.tail_mass(r);
    match form {
        SideForm::Inner => -(r * t + table.inner_first_moment(r).unwrap_or(f64::NAN)),
        SideForm::Outer => table.outer_first_moment(r).unwrap_or(f64::NAN) - r * t,
        SideForm::Anchored => table.tail_mass(1.0) - r * t - table.first_moment_from_one(r),
    }
}

impl ConvolutionKernel {
    /// Assembles a kernel from its parts; `gamma_correction` is stored as given.
    pub fn from_parts(shape: KernelShape, sign_coeff: f64, gamma_correction: f64, a_half: f64) -> Self {
        let singularity = match &shape {
            KernelShape::Zero | KernelShape::Log { .. } => 0.0,
            KernelShape::StablePower { alpha, .. } => alpha - 1.0,
            KernelShape::Tabulated { tables, .. } => tables.left.singularity_index().map_or(-1.0, |a| a - 1.0),
        };
        Self { shape, sign_coeff, gamma_correction, a_half, singularity, gamma_rule: GammaRule::Consistent }
    }

    /// The absolutely continuous part `k₀(y)`; `y = 0` gives the limit
    /// (possibly infinite).
    pub fn k0(&self, y: f64) -> f64 {
        let r = y.abs();
        match &self.shape {
            KernelShape::Zero => 0.0,
            KernelShape::StablePower { alpha, c1, c2 } => {
                let c = if y < 0.0 { c1 } else { c2 };
                c * r.powf(1.0 - alpha) / (alpha * (alpha - 1.0))
            }
            KernelShape::Log { c1, c2 } => {
                let c = if y < 0.0 { c1 } else { c2 };
                -c * r.ln()
            }
            KernelShape::Tabulated { tables, left, right } => {
                if r == 0.0 {
                    return match tables.left.singularity_index() {
                        Some(a) if a >= 1.0 => f64::INFINITY,
                        _ => 0.0,
                    };
                }
                let (t, f) = if y < 0.0 { (&tables.left, *left) } else { (&tables.right, *right) };
                tabulated_k0(t, f, r)
            }
        }
    }

    /// `ν(y) = k₀'(y)` for `y ≠ 0`.
    pub fn k0_derivative(&self, y: f64) -> f64 {
        let r = y.abs();
        let s = side_of(y);
        let t = match &self.shape {
            KernelShape::Zero => 0.0,
            KernelShape::StablePower { alpha, c1, c2 } => {
                let c = if s == Side::Left { c1 } else { c2 };
                c * r.powf(-alpha) / alpha
            }
            KernelShape::Log { c1, c2 } => {
                let c = if s == Side::Left { c1 } else { c2 };
                c / r
            }
            KernelShape::Tabulated { tables, .. } => tables.side(s).tail_mass(r),
        };
        if s == Side::Left {
            t
        } else {
            -t
        }
    }

    /// Full kernel `k(y) = k₀(y) + sign_coeff · p₀(y)`, `p₀ = ½ sign`.
    pub fn k(&self, y: f64) -> f64 {
        self.k0(y) + self.sign_coeff * 0.5 * y.signum() * (y != 0.0) as i32 as f64
    }

    /// Singular model part `c |y|^{1−α}/(α(α−1))` or `−c log|y|` that the
    /// quadrature near the origin treats exactly; `None` when `k₀` is bounded.
    pub(crate) fn singular_part(&self) -> Option<KernelShape> {
        match &self.shape {
            KernelShape::Tabulated { tables, .. } => {
                let a = tables.left.singularity_index()?;
                let c1 = tables.left.leading_coefficient();
                let c2 = tables.right.leading_coefficient();
                if a <= 0.0 {
                    None
                } else if a == 1.0 {
                    Some(KernelShape::Log { c1, c2 })
                } else {
                    Some(KernelShape::StablePower { alpha: a, c1, c2 })
                }
            }
            _ => None,
        }
    }

    /// `Γ` recomputed under another rule, with the matching sign coefficient.
    pub fn with_gamma_rule(&self, rule: GammaRule, gamma: f64) -> Self {
        let g = rule.evaluate(self.k0(-1.0), self.k0(1.0), self.k0_derivative(-1.0), self.k0_derivative(1.0));
        let mut k = self.clone();
        k.gamma_correction = g;
        k.sign_coeff = g - gamma;
        k.gamma_rule = rule;
        k
    }

    /// `∫_{−M}^{M} |k(t)| dt`.
    pub fn local_l1(&self, m: f64) -> Result<f64> {
        use crate::quad::{adaptive, Tolerance};
        let tol = Tolerance::new(1e-12, 1e-9);
        let f = |t: f64| self.k(t).abs();
        let mut total = 0.0;
        for (a, b) in [(-m, 0.0), (0.0, m)] {
            total += adaptive(f, a, b, tol)?.value;
        }
        Ok(total)
    }
}

/// Builds `k₀`, `Γ` and the sign coefficient `Γ − γ` of a triplet. The sign
/// part enters as `(Γ − γ) p₀(y − x)`, which produces the drift `γ d/dx`.
pub fn build_kernel(triplet: &LevyTriplet) -> Result<ConvolutionKernel> {
    build_kernel_with(triplet, GammaRule::Consistent)
}

pub fn build_kernel_with(triplet: &LevyTriplet, rule: GammaRule) -> Result<ConvolutionKernel> {
    if let LevyMeasure::CompoundPoisson(_) = triplet.measure {
        return Err(LevyError::Unsupported(
            "compound Poisson measures have no convolution kernel; use apply_generator_cp".into(),
        ));
    }
    let report = validate_triplet(triplet);
    if !report.passed() {
        let failed: Vec<String> = report.entries.iter().filter(|e| !e.pass).map(|e| format!("{}: {}", e.name, e.detail)).collect();
        if let Some(a) = triplet.measure.singularity_index() {
            if a >= 2.0 {
                return Err(LevyError::NonIntegrableKernel { exponent: a - 1.0 });
            }
        }
        return Err(LevyError::Precondition(format!("triplet fails validation: {}", failed.join("; "))));
    }
    let a_half = 0.5 * triplet.a;
    let shape = match &triplet.measure {
        LevyMeasure::PureDiffusion => KernelShape::Zero,
        LevyMeasure::Stable { alpha, c1, c2 } if *alpha == 1.0 => KernelShape::Log { c1: *c1, c2: *c2 },
        LevyMeasure::Stable { alpha, c1, c2 } => KernelShape::StablePower { alpha: *alpha, c1: *c1, c2: *c2 },
        m => {
            let tables = MeasureTables::build(m)?;
            let left = side_form(&tables.left);
            let right = side_form(&tables.right);
            KernelShape::Tabulated { tables: Arc::new(tables), left, right }
        }
    };
    let kernel = ConvolutionKernel::from_parts(shape, 0.0, 0.0, a_half);
    if kernel.singularity >= 1.0 {
        return Err(LevyError::NonIntegrableKernel { exponent: kernel.singularity });
    }
    Ok(kernel.with_gamma_rule(rule, triplet.gamma))
}

/// Closed-form stable kernel.
pub fn stable_k0(alpha: f64, c1: f64, c2: f64, y: f64) -> f64 {
    let c = if y < 0.0 { c1 } else { c2 };
    if alpha == 1.0 {
        -c * y.abs().ln()
    } else {
        c * y.abs().powf(1.0 - alpha) / (alpha * (alpha - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_closed_forms() {
        let k = build_kernel(&LevyTriplet::stable(1.5, 1.0, 1.0)).unwrap();
        assert!((k.k0(1.0) - 4.0 / 3.0).abs() < 1e-15);
        let k = build_kernel(&LevyTriplet::stable(1.0, 1.0, 1.0)).unwrap();
        assert!((k.k0(0.5) - 2f64.ln()).abs() < 1e-15);
        let k = build_kernel(&LevyTriplet::stable(0.5, 1.0, 1.0)).unwrap();
        assert!((k.k0(1.0) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_measures_need_no_correction() {
        for t in [
            LevyTriplet::stable(1.5, 1.0, 1.0),
            LevyTriplet::stable(0.5, 2.0, 2.0),
            LevyTriplet::new(0.0, 0.0, LevyMeasure::Nig { c: 1.0, beta: 0.0 }).unwrap(),
        ] {
            let k = build_kernel(&t).unwrap();
            assert!(k.gamma_correction.abs() < 1e-9, "{}", k.gamma_correction);
        }
    }

    #[test]
    fn uncompensated_correction_is_small_jump_mean() {
        // index below 1: Γ = ∫_{|y|≤1} y ν'(y) dy = (c2 − c1)/(1 − α)
        let k = build_kernel(&LevyTriplet::stable(0.5, 1.0, 3.0)).unwrap();
        assert!((k.gamma_correction - 2.0 / 0.5).abs() < 1e-12);
    }

    #[test]
    fn tabulated_kernel_matches_defining_integral() {
        let (c1, c2, l1, l2) = (1.0, 0.5, 2.0, 0.7);
        let t = LevyTriplet::new(0.0, 0.0, LevyMeasure::DampedStable { alpha: 1.5, c1, c2, lambda1: l1, lambda2: l2 }).unwrap();
        let k = build_kernel(&t).unwrap();
        for &y in &[-1.7f64, -0.3, 0.01, 0.7, 4.0] {
            let r = y.abs();
            let f = |s: f64| (s - r) * t.measure.side_density(if y < 0.0 { Side::Left } else { Side::Right }, s);
            let want = crate::quad::adaptive(f, r, 60.0, crate::quad::Tolerance::new(1e-13, 1e-11)).unwrap().value;
            assert!((k.k0(y) - want).abs() < 1e-8 * (1.0 + want.abs()), "y={y} {} {want}", k.k0(y));
        }
        for &y in &[-0.8f64, 0.2, 2.5] {
            let d = (k.k0(y + 1e-5) - k.k0(y - 1e-5)) / 2e-5;
            assert!((d - k.k0_derivative(y)).abs() < 1e-5 * (1.0 + d.abs()), "y={y}");
        }
        assert!(k.gamma_correction.abs() > 1e-3);
    }

    #[test]
    fn compound_poisson_is_rejected() {
        let t = LevyTriplet::compound_poisson(crate::models::CompoundPoisson::laplace(1.0, 1.0));
        assert!(matches!(build_kernel(&t), Err(LevyError::Unsupported(_))));
    }
}
