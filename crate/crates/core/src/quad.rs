//! Gauss–Legendre rules and globally adaptive Gauss–Kronrod integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LevyError, Result};
use crate::scalar::Real;

/// Fixed-order Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::from_usize_lossy(n);
        let one = T::one();
        let two = T::lit(2.0);
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess
            let theta = T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5));
            let mut x = theta.cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    let (_, d) = legendre_and_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = two / ((one - x * x) * dp * dp);
            nodes[i] = x;
            weights[i] = w;
            nodes[n - 1 - i] = -x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_and_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel: returns `(K15, |K15 - G7|)`.
pub fn gauss_kronrod_15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kron += T::lit(WGK[j]) * s;
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * s;
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).abs())
}

/// Stopping rule for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-10, max_panels: 2000 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]` (bisection of
/// the panel with the largest error estimate).
///
/// Integrable endpoint singularities are fine since the nodes never touch
/// the endpoints.
pub fn adaptive<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: Tolerance) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: T::zero() });
    }
    let (value, error) = gauss_kronrod_15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let abs = T::lit(tol.abs);
    let rel = T::lit(tol.rel);
    let mut panels = 1;
    while total_err > abs.max(rel * total.abs()) {
        if panels >= tol.max_panels {
            let est = total.as_f64();
            let res = total_err.as_f64();
            if !est.is_finite() || !res.is_finite() || res > 1e3 * tol.abs.max(tol.rel * est.abs()) {
                return Err(LevyError::Quadrature { estimate: est, residual: res });
            }
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = (worst.a + worst.b) * T::lit(0.5);
        if mid <= worst.a || mid >= worst.b {
            // panel can no longer be split in this precision
            heap.push(worst);
            break;
        }
        let (v1, e1) = gauss_kronrod_15(&mut f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        panels += 1;
        if panels % 64 == 0 {
            // resum to shed accumulated rounding in the running totals
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    if !T::is_finite(value) {
        return Err(LevyError::Quadrature { estimate: value.as_f64(), residual: f64::INFINITY });
    }
    Ok(Estimate { value, error })
}

/// Adaptive integration over consecutive breakpoints `points[0] < points[1] < ...`.
pub fn adaptive_pieces<T: Real, F: FnMut(T) -> T>(mut f: F, points: &[T], tol: Tolerance) -> Result<Estimate<T>> {
    let mut value = T::zero();
    let mut error = T::zero();
    for w in points.windows(2) {
        let e = adaptive(&mut f, w[0], w[1], tol)?;
        value += e.value;
        error += e.error;
    }
    Ok(Estimate { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::<f64>::new(6);
        // degree 11 is exact for 6 nodes
        let v = rule.integrate(|x| x.powi(10) + x.powi(11), 0.0, 1.0);
        assert_relative_eq!(v, 1.0 / 11.0 + 1.0 / 12.0, max_relative = 1e-14);
        let s: f64 = rule.weights().iter().sum();
        assert_relative_eq!(s, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn legendre_rule_in_single_precision() {
        let rule = GaussLegendre::<f32>::new(8);
        let v = rule.integrate(|x| x.exp(), 0.0, 1.0);
        assert!((v - (std::f32::consts::E - 1.0)).abs() < 1e-5);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let e = adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::new(1e-12, 1e-10)).unwrap();
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-8);
        let e = adaptive(|x: f64| x.ln(), 0.0, 1.0, Tolerance::new(1e-12, 1e-11)).unwrap();
        assert_relative_eq!(e.value, -1.0, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_reports_divergence() {
        let r = adaptive(|x: f64| 1.0 / x, 0.0, 1.0, Tolerance { abs: 1e-12, rel: 1e-12, max_panels: 200 });
        assert!(matches!(r, Err(LevyError::Quadrature { .. })));
    }
}
