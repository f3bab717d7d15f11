//! Product-integration weights: moments of the kernel against hat functions
//! and of a density against the cardinal cubic interpolation basis.

use rayon::prelude::*;

use super::{ConvolutionKernel, KernelShape};
use crate::quad::GaussLegendre;

/// Second antiderivative of `c_side(v)|v|^β`, vanishing with its slope at 0.
fn power_antideriv(beta: f64, c1: f64, c2: f64, v: f64) -> f64 {
    let c = if v < 0.0 { c1 } else { c2 };
    c * v.abs().powf(beta + 2.0) / ((beta + 1.0) * (beta + 2.0))
}

/// Second antiderivative of `−c_side(v) log|v|`.
fn log_antideriv(c1: f64, c2: f64, v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let c = if v < 0.0 { c1 } else { c2 };
    -c * 0.5 * v * v * (v.abs().ln() - 1.5)
}

fn side_square(c1: f64, c2: f64, v: f64) -> f64 {
    let c = if v < 0.0 { c1 } else { c2 };
    0.5 * c * v * v
}

fn second_difference(f: impl Fn(f64) -> f64, m: f64) -> f64 {
    f(m + 1.0) - 2.0 * f(m) + f(m - 1.0)
}

/// `∫ k₀^{sing}(u) hat(u/h − m) du` for the closed-form shapes.
fn singular_hat_moment(shape: &KernelShape, h: f64, m: i64) -> f64 {
    let mf = m as f64;
    match shape {
        KernelShape::StablePower { alpha, c1, c2 } => {
            let beta = 1.0 - alpha;
            let k = 1.0 / (alpha * (alpha - 1.0));
            k * h.powf(1.0 + beta) * second_difference(|v| power_antideriv(beta, *c1, *c2, v), mf)
        }
        KernelShape::Log { c1, c2 } => {
            h * (-h.ln() * second_difference(|v| side_square(*c1, *c2, v), mf)
                + second_difference(|v| log_antideriv(*c1, *c2, v), mf))
        }
        _ => 0.0,
    }
}

fn singular_value(shape: &KernelShape, u: f64) -> f64 {
    match shape {
        KernelShape::StablePower { alpha, c1, c2 } => super::stable_k0(*alpha, *c1, *c2, u),
        KernelShape::Log { c1, c2 } => super::stable_k0(1.0, *c1, *c2, u),
        _ => 0.0,
    }
}

/// `W_m = ∫ k(u) hat(u/h − m) du` for `|m| < count`, stored at index
/// `m + count − 1`. Hat functions are unit-height, width `2h`.
pub fn hat_moments(kernel: &ConvolutionKernel, h: f64, count: usize) -> Vec<f64> {
    let near = GaussLegendre::<f64>::new(24);
    let far = GaussLegendre::<f64>::new(8);
    let n = count as i64;
    let sing = kernel.singular_part();
    (-(n - 1)..n)
        .into_par_iter()
        .map(|m| {
            let c = m as f64 * h;
            let hat = |u: f64| 1.0 - ((u - c) / h).abs();
            let mut w = match (&kernel.shape, m.abs() <= 1) {
                (KernelShape::Zero, _) => 0.0,
                (KernelShape::StablePower { .. } | KernelShape::Log { .. }, true) => singular_hat_moment(&kernel.shape, h, m),
                (KernelShape::Tabulated { .. }, true) => {
                    let rem = |u: f64| {
                        let s = sing.as_ref().map_or(0.0, |s| singular_value(s, u));
                        (kernel.k0(u) - s) * hat(u)
                    };
                    near.integrate(rem, c - h, c) + near.integrate(rem, c, c + h)
                        + sing.as_ref().map_or(0.0, |s| singular_hat_moment(s, h, m))
                }
                (_, false) => {
                    let rule = if m.abs() <= 3 { &near } else { &far };
                    let f = |u: f64| kernel.k0(u) * hat(u);
                    rule.integrate(f, c - h, c) + rule.integrate(f, c, c + h)
                }
            };
            if m != 0 {
                w += kernel.sign_coeff * 0.5 * h * (m.signum() as f64);
            }
            w
        })
        .collect()
}

/// `∫_0^v k₀^{sing}(u) du` for the closed-form shapes.
fn singular_antideriv(shape: &KernelShape, v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    match shape {
        KernelShape::StablePower { alpha, c1, c2 } => {
            let c = if v < 0.0 { c1 } else { c2 };
            v.signum() * c * v.abs().powf(2.0 - alpha) / (alpha * (alpha - 1.0) * (2.0 - alpha))
        }
        KernelShape::Log { c1, c2 } => {
            let c = if v < 0.0 { c1 } else { c2 };
            -c * (v * v.abs().ln() - v)
        }
        _ => 0.0,
    }
}

/// `∫_lo^hi k(u) du`, exact for the closed-form shapes; tabulated kernels
/// subtract their singular model part near the origin.
pub fn cell_integral(kernel: &ConvolutionKernel, lo: f64, hi: f64) -> f64 {
    let sign = kernel.sign_coeff * 0.5 * (hi.abs() - lo.abs());
    let body = match &kernel.shape {
        KernelShape::Zero => 0.0,
        KernelShape::StablePower { .. } | KernelShape::Log { .. } => {
            singular_antideriv(&kernel.shape, hi) - singular_antideriv(&kernel.shape, lo)
        }
        KernelShape::Tabulated { .. } => {
            let sing = kernel.singular_part();
            let pieces: &[(f64, f64)] = if lo < 0.0 && hi > 0.0 { &[(lo, 0.0), (0.0, hi)] } else { &[(lo, hi)] };
            pieces.iter().map(|&(p, q)| tabulated_piece(kernel, sing.as_ref(), p, q)).sum()
        }
    };
    sign + body
}

fn tabulated_piece(kernel: &ConvolutionKernel, sing: Option<&KernelShape>, p: f64, q: f64) -> f64 {
    let width = q - p;
    let dist = p.abs().min(q.abs());
    match sing {
        Some(s) if dist < 4.0 * width => {
            let rule = GaussLegendre::<f64>::new(16);
            let rem = |u: f64| kernel.k0(u) - singular_value(s, u);
            let body = if dist == 0.0 {
                // geometric panels towards the origin
                let (z, e) = if p == 0.0 { (p, q) } else { (q, p) };
                let mut total = 0.0;
                let mut outer = e;
                for _ in 0..20 {
                    let inner = z + 0.5 * (outer - z);
                    total += rule.integrate(rem, inner.min(outer), inner.max(outer));
                    outer = inner;
                }
                total + rule.integrate(rem, z.min(outer), z.max(outer))
            } else {
                rule.integrate(rem, p, q)
            };
            body + singular_antideriv(s, q) - singular_antideriv(s, p)
        }
        _ if dist < 4.0 * width => GaussLegendre::<f64>::new(16).integrate(|u| kernel.k0(u), p, q),
        _ => GaussLegendre::<f64>::new(8).integrate(|u| kernel.k0(u), p, q),
    }
}

/// Weights `w_m` with `Σ_m w_m f(x + mh) ≈ ∫_lo^hi g(u) f(x + u) du` for `f`
/// replaced by its piecewise-cubic Lagrange interpolant on the grid `hℤ`.
#[derive(Clone, Debug)]
pub struct OffsetWeights {
    /// Offset of `weights[0]`.
    pub start: i64,
    pub weights: Vec<f64>,
    /// `∫ g`.
    pub mass: f64,
    /// `∫ u g(u) du`.
    pub first: f64,
}

impl OffsetWeights {
    pub fn zero() -> Self {
        Self { start: 0, weights: Vec::new(), mass: 0.0, first: 0.0 }
    }

    /// `Σ_m w_m f[i + m]`, with `f` extended by zero.
    pub fn apply_at(&self, f: &[f64], i: usize) -> f64 {
        let n = f.len() as i64;
        let lo = (-(i as i64) - self.start).max(0) as usize;
        let hi = ((n - i as i64 - self.start).max(0) as usize).min(self.weights.len());
        if lo >= hi {
            return 0.0;
        }
        let first = (i as i64 + self.start + lo as i64) as usize;
        self.weights[lo..hi].iter().zip(&f[first..first + (hi - lo)]).map(|(w, v)| w * v).sum()
    }

    pub fn merge(mut self, other: &OffsetWeights) -> Self {
        if other.weights.is_empty() {
            return self;
        }
        if self.weights.is_empty() {
            return other.clone();
        }
        let start = self.start.min(other.start);
        let end = (self.start + self.weights.len() as i64).max(other.start + other.weights.len() as i64);
        let mut w = vec![0.0; (end - start) as usize];
        for (k, v) in self.weights.iter().enumerate() {
            w[(self.start - start) as usize + k] += v;
        }
        for (k, v) in other.weights.iter().enumerate() {
            w[(other.start - start) as usize + k] += v;
        }
        self.start = start;
        self.weights = w;
        self.mass += other.mass;
        self.first += other.first;
        self
    }
}

fn lagrange_cubic(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Builds [`OffsetWeights`] for `g` on `[lo, hi]`; cells are split at
/// multiples of `h` and at the extra `breaks`.
pub fn cubic_offset_weights<G: Fn(f64) -> f64 + Sync>(g: G, h: f64, lo: f64, hi: f64, breaks: &[f64]) -> OffsetWeights {
    if !(hi > lo) {
        return OffsetWeights::zero();
    }
    let rule = GaussLegendre::<f64>::new(8);
    let k_lo = (lo / h).floor() as i64;
    let k_hi = (hi / h).ceil() as i64;
    let start = k_lo - 1;
    let len = (k_hi - k_lo + 4) as usize;
    let cells: Vec<i64> = (k_lo..k_hi).collect();
    let partial: Vec<(Vec<f64>, f64, f64)> = cells
        .par_chunks(256)
        .map(|chunk| {
            let mut w = vec![0.0; len];
            let mut mass = 0.0;
            let mut first = 0.0;
            for &k in chunk {
                let a = (k as f64 * h).max(lo);
                let b = ((k + 1) as f64 * h).min(hi);
                if b <= a {
                    continue;
                }
                let mut pts = vec![a];
                pts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
                pts.push(b);
                for seg in pts.windows(2) {
                    for (u, wq) in rule.mapped(seg[0], seg[1]) {
                        let gw = wq * g(u);
                        mass += gw;
                        first += gw * u;
                        let t = u / h - k as f64;
                        let l = lagrange_cubic(t);
                        let base = (k - 1 - start) as usize;
                        for s in 0..4 {
                            w[base + s] += gw * l[s];
                        }
                    }
                }
            }
            (w, mass, first)
        })
        .collect();
    let mut weights = vec![0.0; len];
    let mut mass = 0.0;
    let mut first = 0.0;
    for (w, m, f) in partial {
        for (a, b) in weights.iter_mut().zip(w) {
            *a += b;
        }
        mass += m;
        first += f;
    }
    OffsetWeights { start, weights, mass, first }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelShape;

    #[test]
    fn power_hat_moments_match_quadrature() {
        let k = ConvolutionKernel::from_parts(KernelShape::StablePower { alpha: 1.5, c1: 1.0, c2: 2.0 }, 0.0, 0.0, 0.0);
        let h = 0.1;
        let w = hat_moments(&k, h, 4);
        for m in -3i64..=3 {
            let c = m as f64 * h;
            let f = |u: f64| k.k0(u) * (1.0 - ((u - c) / h).abs());
            let tol = crate::quad::Tolerance::new(1e-14, 1e-12);
            let q = crate::quad::adaptive(f, c - h, c, tol).unwrap().value + crate::quad::adaptive(f, c, c + h, tol).unwrap().value;
            assert!((w[(m + 3) as usize] - q).abs() < 1e-10, "m={m} {} {q}", w[(m + 3) as usize]);
        }
    }

    #[test]
    fn log_hat_moments_match_quadrature() {
        let k = ConvolutionKernel::from_parts(KernelShape::Log { c1: 0.5, c2: 1.5 }, 0.0, 0.0, 0.0);
        let h = 0.05;
        let w = hat_moments(&k, h, 3);
        for m in -2i64..=2 {
            let c = m as f64 * h;
            let f = |u: f64| k.k0(u) * (1.0 - ((u - c) / h).abs());
            let tol = crate::quad::Tolerance::new(1e-14, 1e-12);
            let q = crate::quad::adaptive(f, c - h, c, tol).unwrap().value + crate::quad::adaptive(f, c, c + h, tol).unwrap().value;
            assert!((w[(m + 2) as usize] - q).abs() < 1e-10, "m={m}");
        }
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        let h = 0.1;
        let g = |u: f64| (-u.abs()).exp();
        let ow = cubic_offset_weights(g, h, -2.0, 2.0, &[0.0]);
        let f: Vec<f64> = (-40..=40).map(|k| { let x = k as f64 * h; x * x * x - x }).collect();
        let got = ow.apply_at(&f, 40);
        let want = crate::quad::adaptive(|u: f64| g(u) * (u * u * u - u), -2.0, 2.0, Default::default()).unwrap().value;
        assert!((got - want).abs() < 1e-12, "{got} {want}");
        assert!((ow.mass - 2.0 * (1.0 - (-2f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn cell_integrals_match_quadrature() {
        use crate::kernels::build_kernel;
        use crate::models::{LevyMeasure, LevyTriplet};
        use crate::quad::{adaptive, Tolerance};
        let stable = build_kernel(&LevyTriplet::stable(1.5, 1.0, 0.4).with_drift(0.3)).unwrap();
        let damped =
            build_kernel(&LevyTriplet::new(0.0, 0.2, LevyMeasure::DampedStable { alpha: 1.3, c1: 1.0, c2: 0.5, lambda1: 1.0, lambda2: 2.0 }).unwrap())
                .unwrap();
        let tol = Tolerance::new(1e-13, 1e-11);
        for k in [&stable, &damped] {
            for &(lo, hi) in &[(-0.01f64, 0.01f64), (0.0, 0.02), (-0.3, -0.29), (0.5, 0.51), (-2.0, 1.5)] {
                let mut want = 0.0f64;
                let mut cuts = vec![lo, hi];
                if lo < 0.0 && hi > 0.0 {
                    cuts.insert(1, 0.0);
                }
                for w in cuts.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if a == 0.0 || b == 0.0 {
                        let e: f64 = if a == 0.0 { b } else { a };
                        let mut outer = e;
                        for _ in 0..120 {
                            let inner = 0.5 * outer;
                            want += adaptive(|u: f64| k.k(u), inner.min(outer), inner.max(outer), tol).unwrap().value;
                            outer = inner;
                        }
                    } else {
                        want += adaptive(|u: f64| k.k(u), a, b, tol).unwrap().value;
                    }
                }
                let got = cell_integral(k, lo, hi);
                assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{lo} {hi} {got} {want}");
            }
        }
    }
}
