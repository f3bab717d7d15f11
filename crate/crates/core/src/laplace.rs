//! Gaver–Stehfest inversion of real Laplace transforms.
//!
//! The weights are computed exactly in rational arithmetic and stored as
//! double-word values; the weighted sum is accumulated with error-free
//! transformations so that cancellation between the large alternating
//! weights does not eat the working precision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LevyError, Result};
use crate::scalar::{DoubleWord, Real};

pub const DEFAULT_TERMS_HALF: usize = 7;

#[derive(Clone, Debug)]
pub struct GaverStehfest<T> {
    half: usize,
    weights: Vec<DoubleWord<T>>,
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact Stehfest weights `V_1..V_{2m}`.
pub fn stehfest_weights(m: usize) -> Vec<BigRational> {
    let n = 2 * m;
    (1..=n)
        .map(|k| {
            let mut acc = BigRational::zero();
            for j in k.div_ceil(2)..=k.min(m) {
                let num = BigInt::from(j).pow(m as u32) * factorial(2 * j);
                let den = factorial(m - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k);
                acc += BigRational::new(num, den);
            }
            if (k + m) % 2 == 1 {
                -acc
            } else {
                acc
            }
        })
        .collect()
}

fn rational_to_double_word<T: Real>(r: &BigRational) -> DoubleWord<T> {
    let hi_f = r.to_f64().unwrap_or(f64::NAN);
    let hi = T::lit(hi_f);
    let hi_exact = BigRational::from_float(hi.as_f64()).unwrap_or_else(BigRational::zero);
    let rem = r - hi_exact;
    let lo = T::lit(rem.to_f64().unwrap_or(0.0));
    DoubleWord { hi, lo }
}

impl<T: Real> GaverStehfest<T> {
    /// `2m` terms; `m` between 1 and 12.
    pub fn new(m: usize) -> Result<Self> {
        if !(1..=12).contains(&m) {
            return Err(LevyError::Precondition(format!("Gaver-Stehfest half-order {m} outside 1..=12")));
        }
        let weights = stehfest_weights(m).iter().map(rational_to_double_word).collect();
        Ok(Self { half: m, weights })
    }

    pub fn terms(&self) -> usize {
        2 * self.half
    }

    /// Abscissas `k ln2 / t` at which the transform is sampled.
    pub fn abscissas(&self, t: T) -> Vec<T> {
        let a = T::LN_2() / t;
        (1..=self.terms()).map(|k| a * T::from_usize_lossy(k)).collect()
    }

    /// Combines transform samples taken at [`GaverStehfest::abscissas`].
    pub fn combine(&self, t: T, samples: &[T]) -> T {
        assert_eq!(samples.len(), self.terms());
        let mut acc = DoubleWord::zero();
        for (w, &f) in self.weights.iter().zip(samples) {
            acc = acc + w.mul_scalar(f);
        }
        acc.mul_scalar(T::LN_2() / t).value()
    }

    pub fn invert<F: FnMut(T) -> T>(&self, mut transform: F, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(LevyError::Domain(format!("Laplace inversion needs t > 0, got {t}")));
        }
        let samples: Vec<T> = self.abscissas(t).into_iter().map(&mut transform).collect();
        Ok(self.combine(t, &samples))
    }

    /// Largest weight magnitude, a proxy for the amplification of sample noise.
    pub fn max_weight(&self) -> f64 {
        stehfest_weights(self.half)
            .iter()
            .map(|w| w.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_zero_and_known_low_order() {
        let w = stehfest_weights(1);
        assert_eq!(w, vec![BigRational::from_integer(2.into()), BigRational::from_integer((-2).into())]);
        for m in 1..=10 {
            let s: BigRational = stehfest_weights(m).iter().sum();
            assert!(s.is_zero(), "m={m}");
        }
    }

    #[test]
    fn constant_and_exponential() {
        let gs = GaverStehfest::<f64>::new(7).unwrap();
        for &t in &[0.1, 1.0, 5.0] {
            let v = gs.invert(|s| 1.0 / s, t).unwrap();
            // rounding of F(s) is amplified by the largest weight
            assert!((v - 1.0).abs() < 1e-15 * gs.max_weight(), "t={t} v={v}");
        }
        assert!(gs.invert(|s| 1.0 / s, 0.0).is_err());
        assert!(GaverStehfest::<f64>::new(0).is_err());
    }
}
