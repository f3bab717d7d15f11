use crate::error::{LevyError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modified Bessel function of the second kind, order one.
///
/// Power series below `x = 2`; above, the representation
/// `K₁(x) = ∫₀^∞ exp(-x cosh t) cosh t dt` integrated by the trapezoid rule,
/// which converges geometrically for this entire integrand.
pub fn bessel_k1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(LevyError::Domain(format!("K1 needs a finite positive argument, got {x}")));
    }
    Ok(if x <= 2.0 { k1_series(x) } else { k1_scaled_integral(x) * (-x).exp() })
}

/// `e^x K₁(x)`, useful in densities that multiply by `e^{βx}`.
pub fn bessel_k1_scaled(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(LevyError::Domain(format!("K1 needs a finite positive argument, got {x}")));
    }
    Ok(if x <= 2.0 { k1_series(x) * x.exp() } else { k1_scaled_integral(x) })
}

pub(crate) fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    // I1 and the digamma sum share the term (x²/4)^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut i1_sum = 0.0;
    let mut psi_sum = 0.0;
    let mut harmonic = 0.0; // H_k
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            term *= q / (kf * (kf + 1.0));
            harmonic += 1.0 / kf;
        }
        let psi_k1 = -EULER_GAMMA + harmonic;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i1_sum += term;
        psi_sum += (psi_k1 + psi_k2) * term;
        if term < 1e-18 * i1_sum.abs().max(1.0) {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + i1 * (0.5 * x).ln() - 0.25 * x * psi_sum
}

pub(crate) fn k1_scaled_integral(x: f64) -> f64 {
    let h = 0.1;
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = h * k as f64;
        let ch = t.cosh();
        let term = (-x * (ch - 1.0)).exp() * ch;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    sum * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // K1(1) = 0.6019072301972346
        assert!((bessel_k1(1.0).unwrap() - 0.601_907_230_197_234_6).abs() < 1e-13);
        assert!(bessel_k1(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
    }

    #[test]
    fn series_and_integral_agree_on_overlap() {
        for i in 0..=20 {
            let x = 0.5 + 0.1 * i as f64;
            let a = k1_series(x);
            let b = k1_scaled_integral(x) * (-x).exp();
            assert!((a - b).abs() < 1e-13 * a, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn small_and_large_argument_limits() {
        for &x in &[1e-3, 1e-6, 1e-9] {
            assert!((x * bessel_k1(x).unwrap() - 1.0).abs() < 10.0 * x);
        }
        for &x in &[10.0, 30.0, 100.0] {
            let asym = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 3.0 / (8.0 * x) - 15.0 / (128.0 * x * x));
            let v = bessel_k1(x).unwrap();
            assert!((v - asym).abs() < 0.15 / (x * x * x) * v, "x={x}");
            // exponential envelope e^{-x}/x holds with a constant fitted on
            // any bounded range; here M = max over [1, x] of x e^x K1(x)
            let fitted = (1..=100)
                .map(|i| 1.0 + (x - 1.0) * i as f64 / 100.0)
                .map(|y| y * y.exp() * bessel_k1(y).unwrap())
                .fold(0.0, f64::max);
            assert!(v <= fitted * (-x).exp() / x * (1.0 + 1e-12));
        }
    }
}
