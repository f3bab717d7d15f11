//! Cumulative tables of a Lévy density on each half-line: tail mass
//! `T(r) = ∫_r^∞ ν'(±s) ds` and first moment `F(r) = ∫_1^r s ν'(±s) ds`,
//! tabulated on a logarithmic grid with cubic Hermite interpolation.

use super::{LevyMeasure, Side, Tail};
use crate::error::{LevyError, Result};
use crate::quad::{adaptive, gauss_kronrod_15, Tolerance};

const LOG_STEP: f64 = 0.01;
const R_MIN: f64 = 1e-12;
const POWER_TAIL_MAX: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct SideTable {
    side: Side,
    measure: LevyMeasure,
    alpha: Option<f64>,
    lead: f64,
    tail_kind: Tail,
    x0: f64,
    r_max: f64,
    tail: Vec<f64>,
    dtail: Vec<f64>,
    first: Vec<f64>,
    dfirst: Vec<f64>,
    inner_first: Option<f64>,
    outer_first: Option<f64>,
}

fn hermite(x: f64, y0: f64, y1: f64, d0: f64, d1: f64, h: f64) -> f64 {
    let t = x;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * d1
}

impl SideTable {
    pub fn build(measure: &LevyMeasure, side: Side) -> Result<Self> {
        let alpha = measure.singularity_index();
        let (cl, cr) = measure.leading_coefficients();
        let lead = if side == Side::Left { cl } else { cr };
        let tail_kind = measure.tail(side);
        let r_max = match tail_kind {
            Tail::Cutoff(x) => x.max(2.0),
            Tail::Power { .. } => POWER_TAIL_MAX,
        };
        let k_lo = (R_MIN.ln() / LOG_STEP).floor() as i64;
        let k_hi = (r_max.ln() / LOG_STEP).ceil() as i64;
        let x0 = k_lo as f64 * LOG_STEP;
        let n = (k_hi - k_lo + 1) as usize;
        let r: Vec<f64> = (0..n).map(|i| (x0 + i as f64 * LOG_STEP).exp()).collect();
        let r_max = r[n - 1];
        let anchor = (-k_lo) as usize;
        let dens = |s: f64| measure.side_density(side, s);

        let mut dt = vec![0.0; n - 1];
        let mut df = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let (a, b) = (r[i], r[i + 1]);
            dt[i] = gauss_kronrod_15(&mut |s: f64| dens(s), a, b).0;
            df[i] = gauss_kronrod_15(&mut |s: f64| s * dens(s), a, b).0;
        }
        let mut tail = vec![0.0; n];
        tail[n - 1] = match tail_kind {
            Tail::Cutoff(_) => 0.0,
            Tail::Power { coef, exponent, .. } => coef * r_max.powf(1.0 - exponent) / (exponent - 1.0),
        };
        for i in (0..n - 1).rev() {
            tail[i] = tail[i + 1] + dt[i];
        }
        let mut first = vec![0.0; n];
        for i in anchor..n - 1 {
            first[i + 1] = first[i] + df[i];
        }
        for i in (0..anchor).rev() {
            first[i] = first[i + 1] - df[i];
        }
        let dtail: Vec<f64> = r.iter().map(|&s| -s * dens(s)).collect();
        let dfirst: Vec<f64> = r.iter().map(|&s| s * s * dens(s)).collect();

        let inner_first = match alpha {
            Some(a) if a >= 1.0 => None,
            Some(a) => Some(-first[0] + lead * R_MIN.powf(1.0 - a) / (1.0 - a)),
            None => Some(-first[0]),
        };
        let outer_first = match tail_kind {
            Tail::Cutoff(_) => Some(first[n - 1]),
            Tail::Power { coef, exponent, .. } if exponent > 2.0 => {
                Some(first[n - 1] + coef * r_max.powf(2.0 - exponent) / (exponent - 2.0))
            }
            Tail::Power { .. } => None,
        };
        if tail.iter().chain(first.iter()).any(|v| !v.is_finite()) {
            return Err(LevyError::Quadrature { estimate: f64::NAN, residual: f64::INFINITY });
        }
        Ok(Self {
            side,
            measure: measure.clone(),
            alpha,
            lead,
            tail_kind,
            x0,
            r_max,
            tail,
            dtail,
            first,
            dfirst,
            inner_first,
            outer_first,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn density(&self, r: f64) -> f64 {
        self.measure.side_density(self.side, r)
    }

    fn locate(&self, r: f64) -> (usize, f64) {
        let x = (r.ln() - self.x0) / LOG_STEP;
        let i = (x.floor().max(0.0) as usize).min(self.tail.len() - 2);
        (i, x - i as f64)
    }

    /// `T(r) = ∫_r^∞ ν'(±s) ds`.
    pub fn tail_mass(&self, r: f64) -> f64 {
        if r >= self.r_max {
            return match self.tail_kind {
                Tail::Cutoff(_) => 0.0,
                Tail::Power { coef, exponent, .. } => coef * r.powf(1.0 - exponent) / (exponent - 1.0),
            };
        }
        if r <= R_MIN {
            return match self.alpha {
                Some(a) if a > 0.0 => self.tail[0] + self.lead * (r.powf(-a) - R_MIN.powf(-a)) / a,
                Some(_) => self.tail[0] + self.lead * (R_MIN / r).ln(),
                None => self.tail[0] + self.density(R_MIN) * (R_MIN - r),
            };
        }
        let (i, t) = self.locate(r);
        hermite(t, self.tail[i], self.tail[i + 1], self.dtail[i], self.dtail[i + 1], LOG_STEP)
    }

    /// `F(r) = ∫_1^r s ν'(±s) ds` (negative for `r < 1`).
    pub fn first_moment_from_one(&self, r: f64) -> f64 {
        if r >= self.r_max {
            let n = self.first.len() - 1;
            return match self.tail_kind {
                Tail::Cutoff(_) => self.first[n],
                Tail::Power { coef, exponent, .. } => {
                    let p = exponent - 2.0;
                    if p.abs() < 1e-12 {
                        self.first[n] + coef * (r / self.r_max).ln()
                    } else {
                        self.first[n] + coef * (self.r_max.powf(-p) - r.powf(-p)) / p
                    }
                }
            };
        }
        if r <= R_MIN {
            return match self.alpha {
                Some(1.0) => self.first[0] - self.lead * (R_MIN / r).ln(),
                Some(a) => self.first[0] - self.lead * (R_MIN.powf(1.0 - a) - r.powf(1.0 - a)) / (1.0 - a),
                None => self.first[0],
            };
        }
        let (i, t) = self.locate(r);
        hermite(t, self.first[i], self.first[i + 1], self.dfirst[i], self.dfirst[i + 1], LOG_STEP)
    }

    /// `∫_0^r s ν'(±s) ds`, finite only when the singularity index is below 1.
    pub fn inner_first_moment(&self, r: f64) -> Option<f64> {
        self.inner_first.map(|m| m + self.first_moment_from_one(r))
    }

    /// `∫_r^∞ s ν'(±s) ds`, finite only for fast enough tails.
    pub fn outer_first_moment(&self, r: f64) -> Option<f64> {
        self.outer_first.map(|m| m - self.first_moment_from_one(r))
    }

    pub fn singularity_index(&self) -> Option<f64> {
        self.alpha
    }

    pub fn leading_coefficient(&self) -> f64 {
        self.lead
    }

    pub fn tail_kind(&self) -> Tail {
        self.tail_kind
    }

    /// Radius beyond which the density is treated as zero (or the power
    /// tail takes over).
    pub fn extent(&self) -> f64 {
        self.r_max
    }

    /// Solves `T(r) = mass` for `r` by bisection in `log r`.
    pub fn inverse_tail(&self, mass: f64) -> f64 {
        let mut lo = R_MIN.ln();
        let mut hi = self.r_max.ln();
        if mass <= self.tail_mass(self.r_max) {
            if let Tail::Power { coef, exponent, .. } = self.tail_kind {
                return (mass * (exponent - 1.0) / coef).powf(-1.0 / (exponent - 1.0));
            }
            return self.r_max;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.tail_mass(mid.exp()) > mass {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        (0.5 * (lo + hi)).exp()
    }
}

/// `∫_0^r s^p ν'(±s) ds` for `p > α` by geometric panels and the
/// leading-order remainder.
pub fn moment_below(measure: &LevyMeasure, side: Side, p: f64, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Ok(0.0);
    }
    let tol = Tolerance::new(1e-16, 1e-12);
    let mut total = 0.0;
    let mut hi = r;
    for _ in 0..60 {
        let lo = 0.5 * hi;
        total += adaptive(|s: f64| s.powf(p) * measure.side_density(side, s), lo, hi, tol)?.value;
        hi = lo;
    }
    if let Some(a) = measure.singularity_index() {
        if p <= a {
            return Err(LevyError::Precondition(format!("moment of order {p} diverges at 0 for index {a}")));
        }
        let c = measure.side_density(side, hi) * hi.powf(a + 1.0);
        total += c * hi.powf(p - a) / (p - a);
    }
    Ok(total)
}

/// Tables for both half-lines.
#[derive(Clone, Debug)]
pub struct MeasureTables {
    pub left: SideTable,
    pub right: SideTable,
}

impl MeasureTables {
    pub fn build(measure: &LevyMeasure) -> Result<Self> {
        Ok(Self { left: SideTable::build(measure, Side::Left)?, right: SideTable::build(measure, Side::Right)? })
    }

    pub fn side(&self, side: Side) -> &SideTable {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_tail_and_moments() {
        let alpha = 1.5;
        let m = LevyMeasure::Stable { alpha, c1: 1.0, c2: 2.0 };
        let t = MeasureTables::build(&m).unwrap();
        for &r in &[1e-6f64, 0.013, 0.5, 1.0, 3.7, 250.0] {
            let want = 2.0 * r.powf(-alpha) / alpha;
            let got = t.right.tail_mass(r);
            assert!((got - want).abs() < 1e-9 * want, "r={r} {got} {want}");
            let f_want = 2.0 * (r.powf(1.0 - alpha) - 1.0) / (1.0 - alpha);
            let f_got = t.right.first_moment_from_one(r);
            assert!((f_got - f_want).abs() < 1e-9 * (1.0 + f_want.abs()), "r={r} {f_got} {f_want}");
            let u = t.left.outer_first_moment(r).unwrap();
            let u_want = r.powf(1.0 - alpha) / (alpha - 1.0);
            assert!((u - u_want).abs() < 1e-8 * u_want, "r={r} {u} {u_want}");
        }
        assert!(t.left.inner_first_moment(0.5).is_none());
    }

    #[test]
    fn variance_gamma_inner_moment() {
        // ∫_0^r s e^{-s}/s ds = 1 − e^{-r}
        let m = LevyMeasure::VarianceGamma { c1: 1.0, c2: 1.0, g: 1.0, m: 1.0 };
        let t = SideTable::build(&m, Side::Right).unwrap();
        for &r in &[1e-3f64, 0.2, 2.0, 10.0] {
            let got = t.inner_first_moment(r).unwrap();
            assert!((got - (1.0 - (-r).exp())).abs() < 1e-10, "r={r} {got}");
        }
        let r = t.inverse_tail(t.tail_mass(0.37));
        assert!((r - 0.37).abs() < 1e-10);
    }

    #[test]
    fn second_moment_below() {
        let m = LevyMeasure::Stable { alpha: 1.2, c1: 1.0, c2: 1.0 };
        let v = moment_below(&m, Side::Left, 2.0, 0.1).unwrap();
        let want = 0.1f64.powf(0.8) / 0.8;
        assert!((v - want).abs() < 1e-10 * want);
    }
}
