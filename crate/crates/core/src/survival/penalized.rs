//! The penalized densities `Q(x,t,u)` with `E[e^{−u∫V(X)}; X_t ∈ dx]`,
//! `V = 1 − 1_Δ`, either as the alternating series `Σ(−u)ⁿQₙ` or by solving
//! `Q + u ∫₀ᵗ ρ_{t−τ} * (V Q_τ) dτ = ρ_t` step by step.
//!
//! Space and time integrals are exact for the piecewise-linear interpolant
//! (in `ξ` and `τ`) of `V Q`: the spatial kernel `ρ_σ * hat` is applied in
//! Fourier space as an alias sum weighted by `sinc²`, and the time integral
//! of `e^{−σλ}` against linear hats has closed-form weights.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::density::mass_bound;
use crate::error::{LevyError, Result};
use crate::models::{char_exponent, LevyMeasure, LevyTriplet};
use crate::quasipotential::DomainDelta;

use super::{SurvivalCurve, SurvivalMethod};

const NEGLIGIBLE: f64 = 1e-17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyMethod {
    Series,
    Volterra,
}

#[derive(Clone, Copy, Debug)]
pub struct PenalizedConfig {
    /// Spatial step; `None` picks `min(0.01, shortest interval / 50)`.
    pub h: Option<f64>,
    /// Time steps up to the final time (raised so that `u·dt ≤ 1`).
    pub steps: usize,
    /// One Richardson extrapolation against half as many steps.
    pub richardson: bool,
    /// Window padding in units of the density width at the final time.
    pub pad_widths: f64,
    /// Aliases `|k| ≤ max_aliases` in the `sinc²` sums.
    pub max_aliases: usize,
    /// Series when `u·t` is at most this, direct solve otherwise.
    pub series_limit: f64,
}

impl Default for PenalizedConfig {
    fn default() -> Self {
        Self { h: None, steps: 64, richardson: true, pad_widths: 4.0, max_aliases: 64, series_limit: 5.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PenalizedSolution {
    pub u: f64,
    pub t: f64,
    pub method: PenaltyMethod,
    pub nodes: Vec<f64>,
    /// `Q(x,t,u)`
    pub values: Vec<f64>,
    /// `ρ(x,t) = Q₀(x,t)`
    pub rho: Vec<f64>,
    /// `Qₙ(x,t)`, `n = 0, 1, …` (series only).
    pub iterates: Vec<Vec<f64>>,
    /// `(tₘ, ∫_Δ Q(x,tₘ,u) dx)` on the time grid.
    pub survival: Vec<(f64, f64)>,
}

impl PenalizedSolution {
    pub fn retained(&self) -> usize {
        self.iterates.len()
    }

    /// `∫_{c1}^{c2} Q(x,t,u) dx` for the piecewise-linear interpolant.
    pub fn integrate(&self, c1: f64, c2: f64) -> f64 {
        integrate_linear(&self.nodes, &self.values, &[(c1, c2)])
    }
}

fn integrate_linear(nodes: &[f64], values: &[f64], intervals: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for w in 0..nodes.len() - 1 {
        let (x0, x1) = (nodes[w], nodes[w + 1]);
        let (f0, f1) = (values[w], values[w + 1]);
        for &(a, b) in intervals {
            let lo = a.max(x0);
            let hi = b.min(x1);
            if hi > lo {
                let at = |x: f64| f0 + (f1 - f0) * (x - x0) / (x1 - x0);
                total += 0.5 * (hi - lo) * (at(lo) + at(hi));
            }
        }
    }
    total
}

/// `(z − 1 + e^{−z})/z²` and `(1 − e^{−z} − z e^{−z})/z²`.
fn phi(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-2 {
        let b = 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0 + z * z * z * z / 720.0;
        let a = 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0 + z * z * z * z / 144.0;
        (b, a)
    } else {
        let e = (-z).exp();
        let z2 = z * z;
        ((z - 1.0 + e) / z2, (1.0 - e - z * e) / z2)
    }
}

fn sinc2(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0
    } else {
        (x.sin() / x).powi(2)
    }
}

/// `λ` on demand: closed forms directly, otherwise exact up to `w_lo` and
/// a cubic table in `log|ω|` above.
struct Exponent {
    triplet: LevyTriplet,
    closed: bool,
    w_lo: f64,
    log_lo: f64,
    step: f64,
    table: [Vec<Complex64>; 2],
}

impl Exponent {
    fn new(triplet: &LevyTriplet, w_lo: f64, w_hi: f64) -> Result<Self> {
        let closed = matches!(triplet.measure, LevyMeasure::PureDiffusion | LevyMeasure::Stable { .. });
        let per_decade = 200.0;
        let (log_lo, log_hi) = (w_lo.ln(), w_hi.ln());
        let step = std::f64::consts::LN_10 / per_decade;
        let count = if closed { 0 } else { ((log_hi - log_lo) / step).ceil() as usize + 4 };
        let side = |sign: f64| -> Result<Vec<Complex64>> {
            (0..count).into_par_iter().map(|i| char_exponent(triplet, sign * (log_lo + (i as f64 - 1.0) * step).exp())).collect()
        };
        let table = [side(-1.0)?, side(1.0)?];
        Ok(Self { triplet: triplet.clone(), closed, w_lo, log_lo, step, table })
    }

    fn eval(&self, w: f64) -> Result<Complex64> {
        if self.closed || w.abs() <= self.w_lo {
            return char_exponent(&self.triplet, w);
        }
        let t = &self.table[(w > 0.0) as usize];
        let p = (w.abs().ln() - self.log_lo) / self.step + 1.0;
        let i = (p.floor() as usize).clamp(1, t.len() - 3);
        let s = p - i as f64;
        let (y0, y1, y2, y3) = (t[i - 1], t[i], t[i + 1], t[i + 2]);
        // Catmull-Rom
        Ok(y1 + 0.5 * s * (y2 - y0 + s * (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3 + s * (3.0 * (y1 - y2) + y3 - y0))))
    }
}

struct Alias {
    s: f64,
    mu: Complex64,
    decay: Complex64,
    a: Complex64,
    b: Complex64,
}

struct Mode {
    phase: Complex64,
    persistent: Vec<Alias>,
    instant_a: Complex64,
    instant_b: Complex64,
}

/// Spatial window, frequency modes and time-step weights for one `dt`.
struct Propagator {
    n: usize,
    h: f64,
    dt: f64,
    nodes: Vec<f64>,
    v: Vec<f64>,
    modes: Vec<Mode>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

struct Layout {
    n: usize,
    h: f64,
    x_lo: f64,
    j0: usize,
}

fn layout(triplet: &LevyTriplet, domain: &DomainDelta, x0: f64, t_end: f64, cfg: &PenalizedConfig) -> Result<Layout> {
    let shortest = domain.intervals().iter().map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    let h = cfg.h.unwrap_or_else(|| 0.01f64.min(shortest / 50.0));
    // width 1/z with t·Re λ(z) = 1
    let re = |z: f64| char_exponent(triplet, z).map(|c| c.re.max(char_exponent(triplet, -z).map_or(0.0, |d| d.re)));
    let mut hi = 1e-3;
    while t_end * re(hi)? < 1.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(LevyError::Unsupported("characteristic exponent stays bounded; no density width".into()));
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if t_end * re(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let width = 1.0 / hi;
    let (a, b) = domain.hull();
    let (a, b) = (a.min(x0), b.max(x0));
    let window = (b - a) + 2.0 * cfg.pad_widths * width;
    let n = ((2.0 * window / h).ceil() as usize).next_power_of_two().max(64);
    let j0 = n / 2 - ((0.5 * (a + b) - x0) / h).round() as usize;
    let x_lo = x0 - j0 as f64 * h;
    Ok(Layout { n, h, x_lo, j0 })
}

impl Propagator {
    fn new(domain: &DomainDelta, lay: &Layout, dt: f64, cfg: &PenalizedConfig, lambda: &Exponent) -> Result<Self> {
        let Layout { n, h, x_lo, j0 } = *lay;
        let nodes: Vec<f64> = (0..n).map(|i| x_lo + i as f64 * h).collect();
        let v = nodes
            .iter()
            .map(|&x| {
                let inside: f64 = domain.intervals().iter().map(|&(a, b)| ((x + 0.5 * h).min(b) - (x - 0.5 * h).max(a)).max(0.0)).sum();
                1.0 - inside / h
            })
            .collect();
        let k_max = cfg.max_aliases as i64;
        let modes = (0..n)
            .into_par_iter()
            .map(|q| {
                let wq = if q < n / 2 { q as f64 } else { q as f64 - n as f64 } * 2.0 * PI / (n as f64 * h);
                let phase = Complex64::from_polar(1.0, -wq * j0 as f64 * h);
                let mut persistent = Vec::new();
                let mut instant_a = Complex64::new(0.0, 0.0);
                let mut instant_b = Complex64::new(0.0, 0.0);
                for k in -k_max..=k_max {
                    let w = wq + 2.0 * PI * k as f64 / h;
                    let s = sinc2(0.5 * w * h);
                    let mu = lambda.eval(-w)?;
                    let z = dt * mu;
                    let (pb, pa) = phi(z);
                    let decay = (-z).exp();
                    if decay.norm() > NEGLIGIBLE {
                        persistent.push(Alias { s, mu, decay, a: dt * pa, b: dt * pb });
                    } else {
                        instant_a += s * dt * pa;
                        instant_b += s * dt * pb;
                    }
                }
                Ok(Mode { phase, persistent, instant_a, instant_b })
            })
            .collect::<Result<Vec<Mode>>>()?;
        let mut planner = FftPlanner::new();
        Ok(Self { n, h, dt, nodes, v, modes, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
    }

    fn forward(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut buf);
        buf.iter().map(|c| c.re / self.n as f64).collect()
    }

    /// Samples of `ρ(· − x0, t)`.
    fn density(&self, t: f64) -> Vec<f64> {
        let spec = self
            .modes
            .iter()
            .map(|m| m.phase * m.persistent.iter().map(|a| (-t * a.mu).exp()).sum::<Complex64>() / self.h)
            .collect();
        self.inverse(spec)
    }

    fn penalize(&self, q: &[f64]) -> Vec<Complex64> {
        let g: Vec<f64> = q.iter().zip(&self.v).map(|(a, b)| a * b).collect();
        self.forward(&g)
    }
}

/// History of `∫₀^{tₘ} ρ_{tₘ−τ} * g(τ) dτ`, one complex state per
/// persistent alias of each mode.
struct Memory {
    states: Vec<Vec<Complex64>>,
}

impl Memory {
    fn new(p: &Propagator) -> Self {
        Self { states: p.modes.iter().map(|m| vec![Complex64::new(0.0, 0.0); m.persistent.len()]).collect() }
    }

    /// Part of the next step that does not depend on `ĝ_m`, and the
    /// coefficient of `ĝ_m`.
    fn split(&self, p: &Propagator, g_prev: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        p.modes
            .iter()
            .zip(&self.states)
            .zip(g_prev)
            .map(|((m, st), &gp)| {
                let mut known = m.instant_a * gp;
                let mut coef = m.instant_b;
                for (a, s) in m.persistent.iter().zip(st) {
                    known += a.s * (a.decay * s + a.a * gp);
                    coef += a.s * a.b;
                }
                (known, coef)
            })
            .unzip()
    }

    fn advance(&mut self, p: &Propagator, g_prev: &[Complex64], g_next: &[Complex64]) {
        for ((m, st), (&gp, &gn)) in p.modes.iter().zip(self.states.iter_mut()).zip(g_prev.iter().zip(g_next)) {
            for (a, s) in m.persistent.iter().zip(st.iter_mut()) {
                *s = a.decay * *s + a.a * gp + a.b * gn;
            }
        }
    }
}

struct Run {
    values: Vec<f64>,
    rho: Vec<f64>,
    iterates: Vec<Vec<f64>>,
    survival: Vec<f64>,
}

fn series_run(p: &Propagator, domain: &DomainDelta, u: f64, steps: usize, n_max: usize) -> Run {
    let times: Vec<f64> = (0..=steps).map(|m| m as f64 * p.dt).collect();
    // Q₀ at every step; the start is a point mass inside Δ, where V = 0
    let mut current: Vec<Vec<f64>> = times.iter().map(|&t| if t == 0.0 { vec![0.0; p.n] } else { p.density(t) }).collect();
    let mut total: Vec<Vec<f64>> = current.clone();
    let mut iterates = vec![current[steps].clone()];
    let mut coef = 1.0;
    for _ in 1..=n_max {
        coef *= -u;
        let g: Vec<Vec<Complex64>> = current.iter().map(|q| p.penalize(q)).collect();
        let mut mem = Memory::new(p);
        let mut next = vec![vec![0.0; p.n]];
        for m in 1..=steps {
            let (known, c) = mem.split(p, &g[m - 1]);
            let spec: Vec<Complex64> = known.iter().zip(&c).zip(&g[m]).map(|((k, c), g)| k + c * g).collect();
            next.push(p.inverse(spec));
            mem.advance(p, &g[m - 1], &g[m]);
        }
        for (tot, q) in total.iter_mut().zip(&next) {
            for (a, b) in tot.iter_mut().zip(q) {
                *a += coef * b;
            }
        }
        iterates.push(next[steps].clone());
        current = next;
    }
    let survival = total.iter().enumerate().map(|(m, q)| if m == 0 { 1.0 } else { integrate_linear(&p.nodes, q, domain.intervals()) }).collect();
    Run { values: total[steps].clone(), rho: iterates[0].clone(), iterates, survival }
}

fn volterra_run(p: &Propagator, domain: &DomainDelta, u: f64, steps: usize) -> Result<Run> {
    let mut mem = Memory::new(p);
    let mut g_prev = vec![Complex64::new(0.0, 0.0); p.n];
    let mut q = vec![0.0; p.n];
    let mut rho = vec![0.0; p.n];
    let mut survival = vec![1.0];
    for m in 1..=steps {
        rho = p.density(m as f64 * p.dt);
        let (known, c) = mem.split(p, &g_prev);
        // fixed point, contraction factor ≤ u·dt/2
        q.clone_from(&rho);
        let mut g = p.penalize(&q);
        for it in 0.. {
            let spec: Vec<Complex64> = known.iter().zip(&c).zip(&g).map(|((k, c), g)| -u * (k + c * g)).collect();
            let corr = p.inverse(spec);
            let next: Vec<f64> = rho.iter().zip(&corr).map(|(r, c)| r + c).collect();
            let change = next.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            q = next;
            g = p.penalize(&q);
            if change <= 1e-14 * scale {
                break;
            }
            if it > 500 {
                return Err(LevyError::Quadrature { estimate: scale, residual: change });
            }
        }
        mem.advance(p, &g_prev, &g);
        g_prev = g;
        survival.push(integrate_linear(&p.nodes, &q, domain.intervals()));
    }
    Ok(Run { values: q, rho, iterates: Vec::new(), survival })
}

fn series_terms(ut: f64) -> usize {
    let mut n = 0usize;
    let mut term = 1.0f64;
    while term >= 1e-10 || (n as f64) < ut {
        n += 1;
        term *= ut / n as f64;
    }
    n
}

/// `Q(x,t,u)` on a window around `Δ`, for a process started at `x0 ∈ Δ`.
pub fn penalized_iterates(triplet: &LevyTriplet, domain: &DomainDelta, x0: f64, u: f64, t: f64, cfg: PenalizedConfig) -> Result<PenalizedSolution> {
    if !(u >= 0.0) {
        return Err(LevyError::Domain(format!("penalty must be nonnegative, got {u}")));
    }
    if !(t > 0.0) {
        return Err(LevyError::Domain(format!("time must be positive, got {t}")));
    }
    if !domain.contains_interior(x0) {
        return Err(LevyError::Domain(format!("start point {x0} is not inside the domain")));
    }
    if mass_bound(triplet, t)?.divergent {
        return Err(LevyError::Unsupported("the transition law has no density; penalized densities are undefined".into()));
    }
    let lay = layout(triplet, domain, x0, t, &cfg)?;
    let method = if u * t <= cfg.series_limit { PenaltyMethod::Series } else { PenaltyMethod::Volterra };
    let mut steps = cfg.steps.max((u * t).ceil() as usize);
    if cfg.richardson {
        steps += steps % 2;
    }
    let w_lo = PI / lay.h * 1.0001;
    let lambda = Exponent::new(triplet, w_lo, (2 * cfg.max_aliases + 2) as f64 * PI / lay.h)?;
    let n_max = if method == PenaltyMethod::Series && u > 0.0 { series_terms(u * t) } else { 0 };
    let run = |k: usize| -> Result<(Run, Vec<f64>)> {
        let p = Propagator::new(domain, &lay, t / k as f64, &cfg, &lambda)?;
        let r = match method {
            PenaltyMethod::Series => series_run(&p, domain, u, k, n_max),
            PenaltyMethod::Volterra => volterra_run(&p, domain, u, k)?,
        };
        Ok((r, p.nodes))
    };
    let (fine, nodes) = run(steps)?;
    let times: Vec<f64> = (0..=steps).map(|m| t * m as f64 / steps as f64).collect();
    let (values, iterates, survival) = if cfg.richardson && u > 0.0 {
        let (coarse, _) = run(steps / 2)?;
        let mix = |f: &[f64], c: &[f64]| -> Vec<f64> { f.iter().zip(c).map(|(f, c)| (4.0 * f - c) / 3.0).collect() };
        let values = mix(&fine.values, &coarse.values);
        let iterates = fine.iterates.iter().zip(&coarse.iterates).map(|(f, c)| mix(f, c)).collect();
        let survival = (0..=steps / 2).map(|m| (times[2 * m], (4.0 * fine.survival[2 * m] - coarse.survival[m]) / 3.0)).collect();
        (values, iterates, survival)
    } else {
        (fine.values, fine.iterates, times.iter().cloned().zip(fine.survival).collect())
    };
    Ok(PenalizedSolution { u, t, method, nodes, values, rho: fine.rho, iterates, survival })
}

/// Survival curve `∫_Δ Q(x,t,u) dx` on `t_grid`, interpolated linearly
/// from one run up to `max t`.
pub fn penalized_survival(
    triplet: &LevyTriplet,
    domain: &DomainDelta,
    x0: f64,
    u: f64,
    t_grid: &[f64],
    cfg: PenalizedConfig,
) -> Result<SurvivalCurve> {
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    let mut cfg = cfg;
    cfg.series_limit = cfg.series_limit.min(u * t_max - 1e-12).max(0.0);
    let steps = t_grid.len().max(1) * cfg.steps.div_ceil(t_grid.len().max(1));
    cfg.steps = steps;
    let sol = penalized_iterates(triplet, domain, x0, u, t_max, cfg)?;
    let raw = t_grid
        .iter()
        .map(|&t| {
            let s = &sol.survival;
            let k = s.partition_point(|&(tm, _)| tm < t).clamp(1, s.len() - 1);
            let (t0, p0) = s[k - 1];
            let (t1, p1) = s[k];
            p0 + (p1 - p0) * (t - t0) / (t1 - t0)
        })
        .collect();
    let mut c = SurvivalCurve::from_raw(t_grid.to_vec(), raw, SurvivalMethod::Penalized);
    c.notes.push(format!("penalty u = {u}"));
    Ok(c)
}

/// `∫_{c1}^{c2} Q(x,t,u) dx`.
pub fn feynman_kac_rhs(triplet: &LevyTriplet, domain: &DomainDelta, x0: f64, u: f64, t: f64, c1: f64, c2: f64) -> Result<f64> {
    Ok(penalized_iterates(triplet, domain, x0, u, t, PenalizedConfig::default())?.integrate(c1, c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::transition_density;
    use crate::survival::brownian_interval_survival;

    fn unit() -> DomainDelta {
        DomainDelta::interval(-1.0, 1.0).unwrap()
    }

    #[test]
    fn no_penalty_gives_the_density() {
        let t = LevyTriplet::brownian(1.0);
        let sol = penalized_iterates(&t, &unit(), 0.0, 0.0, 1.0, PenalizedConfig::default()).unwrap();
        assert_eq!(sol.values, sol.rho);
        let xs: Vec<f64> = sol.nodes.iter().step_by(37).cloned().collect();
        let d = transition_density(&t, 1.0, &xs).unwrap();
        for (k, i) in (0..sol.nodes.len()).step_by(37).enumerate() {
            assert!((sol.values[i] - d.values[k]).abs() < 1e-9, "{} {} {}", sol.nodes[i], sol.values[i], d.values[k]);
        }
    }

    #[test]
    fn series_bounds_and_monotonicity() {
        for t in [LevyTriplet::brownian(1.0), LevyTriplet::cauchy()] {
            let cfg = PenalizedConfig::default();
            let lo = penalized_iterates(&t, &unit(), 0.0, 1.0, 1.0, cfg).unwrap();
            let hi = penalized_iterates(&t, &unit(), 0.0, 3.0, 1.0, cfg).unwrap();
            let mut fact = 1.0;
            for (n, q) in lo.iterates.iter().enumerate() {
                if n > 0 {
                    fact *= n as f64;
                }
                for (a, r) in q.iter().zip(&lo.rho) {
                    assert!(*a >= -1e-8 && *a <= r / fact + 1e-8, "n={n} {a} {r}");
                }
            }
            assert!(lo.values.iter().zip(&hi.values).all(|(a, b)| a + 1e-8 >= *b));
        }
    }

    #[test]
    fn direct_solve_matches_series() {
        let t = LevyTriplet::brownian(1.0);
        let mut cfg = PenalizedConfig::default();
        let series = penalized_iterates(&t, &unit(), 0.0, 4.0, 1.0, cfg).unwrap();
        cfg.series_limit = 0.0;
        let direct = penalized_iterates(&t, &unit(), 0.0, 4.0, 1.0, cfg).unwrap();
        assert_eq!(direct.method, PenaltyMethod::Volterra);
        let gap = series.values.iter().zip(&direct.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-7, "{gap}");
    }

    #[test]
    fn strong_penalty_approaches_killing() {
        let t = LevyTriplet::brownian(1.0);
        let sol = penalized_iterates(&t, &unit(), 0.0, 50.0, 1.0, PenalizedConfig::default()).unwrap();
        let p = sol.integrate(-1.0, 1.0);
        let exact = brownian_interval_survival(1.0, 1.0, 1.0);
        eprintln!("u=50: {p} vs {exact}");
        assert!(p > exact);
    }
}
