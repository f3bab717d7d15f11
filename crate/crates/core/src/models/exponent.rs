//! Characteristic exponent `λ(z) = ½Az² − iγz − ∫(e^{ixz} − 1 − ixz1_{|x|≤1}) ν(dx)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use super::{LevyMeasure, LevyTriplet, Side, Tail};
use crate::error::Result;
use crate::quad::{adaptive, Tolerance};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// λ(z), closed form for pure diffusion and stable measures, quadrature otherwise.
pub fn char_exponent(triplet: &LevyTriplet, z: f64) -> Result<Complex64> {
    triplet.check()?;
    match &triplet.measure {
        LevyMeasure::PureDiffusion => Ok(gaussian_part(triplet, z)),
        LevyMeasure::Stable { alpha, c1, c2 } => {
            Ok(gaussian_part(triplet, z) + stable_char_exponent(*alpha, *c1, *c2, z))
        }
        _ => char_exponent_quadrature(triplet, z),
    }
}

fn gaussian_part(triplet: &LevyTriplet, z: f64) -> Complex64 {
    Complex64::new(0.5 * triplet.a * z * z, -triplet.gamma * z)
}

/// Jump part of λ for `ν'(y) = |y|^{-α-1}(c1 1_{y<0} + c2 1_{y>0})`.
pub fn stable_char_exponent(alpha: f64, c1: f64, c2: f64, z: f64) -> Complex64 {
    if z == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = z.abs();
    // I(w) = ∫_0^∞ (e^{irw} − 1 − irw 1_{r≤1}) r^{-α-1} dr
    let i_plus = if alpha == 1.0 {
        Complex64::new(-0.5 * PI * w, w * (1.0 - EULER_GAMMA - w.ln()))
    } else {
        let g = gamma(-alpha) * w.powf(alpha);
        let phase = -0.5 * PI * alpha;
        Complex64::new(g * phase.cos(), g * phase.sin() - w / (1.0 - alpha))
    };
    let lam = -(i_plus * c2 + i_plus.conj() * c1);
    if z > 0.0 {
        lam
    } else {
        lam.conj()
    }
}

/// λ(z) by adaptive quadrature of the defining integral; valid for every
/// measure in the catalog and used as the reference for closed forms.
pub fn char_exponent_quadrature(triplet: &LevyTriplet, z: f64) -> Result<Complex64> {
    triplet.check()?;
    let mut lam = gaussian_part(triplet, z);
    if z == 0.0 || matches!(triplet.measure, LevyMeasure::PureDiffusion) {
        return Ok(lam);
    }
    let w = z.abs();
    let mut re = 0.0;
    let mut im = 0.0;
    for side in Side::BOTH {
        let (c, s) = side_integrals(&triplet.measure, side, w)?;
        re += c;
        im += side.sign() * s;
    }
    // jump integral J = re + i·im for z>0; λ = ... − J
    let jump = Complex64::new(re, im);
    lam -= if z > 0.0 { jump } else { jump.conj() };
    Ok(lam)
}

/// `Re λ(z) = ½Az² + ∫(1 − cos yz)ν'(y)dy`, closed form for diffusion,
/// stable, variance gamma, NIG and Meixner measures.
pub fn re_char_exponent(triplet: &LevyTriplet, z: f64) -> Result<f64> {
    triplet.check()?;
    let w = z.abs();
    let jump = match triplet.measure {
        LevyMeasure::PureDiffusion => 0.0,
        LevyMeasure::Stable { alpha, c1, c2 } => stable_char_exponent(alpha, c1, c2, w).re,
        LevyMeasure::VarianceGamma { c1, c2, g, m } => c1 * (w / g).hypot(1.0).ln() + c2 * (w / m).hypot(1.0).ln(),
        LevyMeasure::Nig { c, beta } => {
            let root = Complex64::new(1.0 - beta * beta + w * w, -2.0 * beta * w).sqrt();
            PI * c * (root.re - (1.0 - beta * beta).sqrt())
        }
        LevyMeasure::Meixner { c, beta } => {
            // ln((cosh w + cos β)/(1 + cos β)) without overflow
            let e = (-w).exp();
            c * (w + (0.5 * (1.0 + e * e) + beta.cos() * e).ln() - (1.0 + beta.cos()).ln())
        }
        _ => return Ok(char_exponent(triplet, z)?.re),
    };
    Ok(0.5 * triplet.a * w * w + jump)
}

/// `(∫(cos rw − 1)ν'(±r)dr, ∫(sin rw − rw 1_{r≤1})ν'(±r)dr)` over `r > 0`.
fn side_integrals(measure: &LevyMeasure, side: Side, w: f64) -> Result<(f64, f64)> {
    let dens = |r: f64| measure.side_density(side, r);
    let cos_term = |r: f64| {
        let s = (0.5 * r * w).sin();
        -2.0 * s * s * dens(r)
    };
    let sin_term = |r: f64| {
        let x = r * w;
        let osc = if r <= 1.0 {
            if x < 1e-4 {
                let x2 = x * x;
                -x * x2 / 6.0 * (1.0 - x2 / 20.0)
            } else {
                x.sin() - x
            }
        } else {
            x.sin()
        };
        osc * dens(r)
    };
    let tol = Tolerance::new(1e-15, 1e-11);
    let mut re = 0.0;
    let mut im = 0.0;
    let piece = |a: f64, b: f64| -> Result<(f64, f64)> {
        Ok((adaptive(cos_term, a, b, tol)?.value, adaptive(sin_term, a, b, tol)?.value))
    };
    let add = |a: f64, b: f64, re: &mut f64, im: &mut f64| -> Result<()> {
        let (c, s) = piece(a, b)?;
        *re += c;
        *im += s;
        Ok(())
    };

    // singular region (0, r0]: geometric panels plus the leading-order remainder
    let r0 = (1.0 / w).min(1.0);
    let halvings = 60;
    let mut hi = r0;
    for _ in 0..halvings {
        let lo = 0.5 * hi;
        add(lo, hi, &mut re, &mut im)?;
        hi = lo;
    }
    if let Some(alpha) = measure.singularity_index() {
        let c = dens(hi) * hi.powf(alpha + 1.0);
        re -= 0.5 * w * w * c * hi.powf(2.0 - alpha) / (2.0 - alpha);
        im -= w.powi(3) / 6.0 * c * hi.powf(3.0 - alpha) / (3.0 - alpha);
    }

    let period = PI / w;
    let chunked = |a: f64, b: f64| -> Vec<(f64, f64)> {
        if b <= a {
            return Vec::new();
        }
        let n = ((b - a) / period).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        (0..n).map(|k| (a + k as f64 * h, if k + 1 == n { b } else { a + (k + 1) as f64 * h })).collect()
    };
    for (a, b) in chunked(r0, 1.0) {
        add(a, b, &mut re, &mut im)?;
    }
    match measure.tail(side) {
        Tail::Cutoff(x) => {
            for (a, b) in chunked(1.0, x.max(1.0)) {
                add(a, b, &mut re, &mut im)?;
            }
        }
        Tail::Power { coef, exponent, .. } => {
            let x = (200.0 / w).max(50.0);
            for (a, b) in chunked(1.0, x) {
                add(a, b, &mut re, &mut im)?;
            }
            // non-oscillatory −ν'(r) part on [x, ∞): geometric panels then power law
            let mut lo = x;
            for _ in 0..40 {
                re -= adaptive(dens, lo, 2.0 * lo, tol)?.value;
                lo *= 2.0;
            }
            re -= coef * lo.powf(1.0 - exponent) / (exponent - 1.0);
            // oscillatory part ∫_x^∞ e^{irw} coef r^{-p} dr by asymptotic expansion
            let osc = oscillatory_power_tail(coef, exponent, w, x);
            re += osc.re;
            im += osc.im;
        }
    }
    Ok((re, im))
}

/// `∫_x^∞ e^{iwr} c r^{-p} dr` for `wx ≫ p`.
fn oscillatory_power_tail(c: f64, p: f64, w: f64, x: f64) -> Complex64 {
    // repeated integration by parts: e^{iwx} x^{-p} (i/w) Σ_k (p)_k (-i/(wx))^k
    let i = Complex64::new(0.0, 1.0);
    let ratio = -i / (w * x);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..8 {
        term = term * ratio * (p + k as f64);
        sum += term;
    }
    let phase = Complex64::from_polar(1.0, w * x);
    phase * x.powf(-p) * (i / w) * sum * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CompoundPoisson;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn trivial_triplets() {
        let bm = LevyTriplet::brownian(1.0);
        assert_eq!(char_exponent(&bm, 2.0).unwrap(), Complex64::new(2.0, 0.0));
        let dr = LevyTriplet::drift(1.0);
        assert_eq!(char_exponent(&dr, 1.0).unwrap(), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn cauchy_symbol_by_quadrature() {
        let t = LevyTriplet::cauchy();
        let q = char_exponent_quadrature(&t, 3.0).unwrap();
        assert!(close(q, Complex64::new(3.0, 0.0), 1e-8), "{q}");
        let c = char_exponent(&t, 3.0).unwrap();
        assert!(close(c, Complex64::new(3.0, 0.0), 1e-12), "{c}");
    }

    #[test]
    fn stable_closed_form_matches_quadrature() {
        for &(alpha, c1, c2) in &[(0.5, 1.0, 2.0), (1.0, 0.3, 0.9), (1.5, 1.0, 1.0), (1.8, 2.0, 0.5)] {
            let t = LevyTriplet::stable(alpha, c1, c2);
            for &z in &[-7.0, -0.4, 0.05, 1.0, 13.0] {
                let a = char_exponent(&t, z).unwrap();
                let b = char_exponent_quadrature(&t, z).unwrap();
                assert!(close(a, b, 1e-7), "alpha={alpha} z={z} {a} {b}");
            }
        }
    }

    #[test]
    fn compound_poisson_laplace_exponent() {
        // ν' = e^{-|y|}: ∫(1 − cos yz)e^{-|y|} = 2 − 2/(1+z²)
        let t = LevyTriplet::compound_poisson(CompoundPoisson::laplace(1.0, 1.0));
        for &z in &[0.3, 1.0, 4.0] {
            let l = char_exponent(&t, z).unwrap();
            let want = 2.0 - 2.0 / (1.0 + z * z);
            assert!((l.re - want).abs() < 1e-10, "{l} {want}");
            // odd part: −∫_{|y|≤1} ... cancels for symmetric ν
            assert!(l.im.abs() < 1e-12);
        }
    }

    #[test]
    fn variance_gamma_exponent() {
        // symmetric VG: ∫(1−cos yz) c e^{-g|y|}/|y| dy = c ln(1 + z²/g²)
        let t = LevyTriplet::new(0.0, 0.0, LevyMeasure::VarianceGamma { c1: 1.5, c2: 1.5, g: 2.0, m: 2.0 }).unwrap();
        for &z in &[0.5, 3.0, 40.0] {
            let l = char_exponent(&t, z).unwrap();
            let want = 1.5 * (1.0 + z * z / 4.0).ln();
            assert!((l.re - want).abs() < 1e-9 * (1.0 + want), "{l} {want}");
        }
    }

    #[test]
    fn nig_exponent_symmetric() {
        // δ(√(a²+z²) − a) with a = 1, δ = cπ
        let c = 0.8;
        let t = LevyTriplet::new(0.0, 0.0, LevyMeasure::Nig { c, beta: 0.0 }).unwrap();
        for &z in &[0.5, 2.0, 20.0] {
            let l = char_exponent(&t, z).unwrap();
            let want = c * PI * ((1.0 + z * z).sqrt() - 1.0);
            assert!((l.re - want).abs() < 1e-8 * (1.0 + want), "{l} {want}");
        }
    }
}
