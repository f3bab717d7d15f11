//! Monte Carlo exit times of Lévy paths from a union of intervals.

mod schemes;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LevyError, Result};
use crate::models::{LevyMeasure, LevyTriplet};
use crate::quasipotential::DomainDelta;
use crate::survival::{SurvivalCurve, SurvivalMethod};

pub use schemes::{cms_standard, small_jump_variance, PathScheme};
use schemes::{EventDriven, Stepper};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExitSample {
    /// Exit time, or the horizon when censored.
    pub time: f64,
    pub censored: bool,
    pub position: f64,
    /// Stream index of the path under the master seed.
    pub path: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub dt: f64,
    /// Brownian-bridge exit test for the continuous part.
    pub bridge: bool,
    /// `None` selects by measure variant.
    pub scheme: Option<PathScheme>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { dt: 1e-3, bridge: true, scheme: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct McRun {
    pub scheme: PathScheme,
    /// `σ²(ε)` replaced by a Gaussian, jump-diffusion scheme only.
    pub small_jump_variance: Option<f64>,
    pub samples: Vec<ExitSample>,
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

fn interval_of(domain: &DomainDelta, x: f64) -> Option<(f64, f64)> {
    domain.intervals().iter().copied().find(|&(a, b)| a < x && x < b)
}

/// Exit test for a Brownian bridge with variance `var` from `x` to `y`
/// inside `(a, b)`; returns the crossed endpoint.
fn bridge_exit<R: Rng + ?Sized>(a: f64, b: f64, x: f64, y: f64, var: f64, rng: &mut R) -> Option<f64> {
    let up = (-2.0 * (b - x) * (b - y) / var).exp();
    let lo = (-2.0 * (x - a) * (y - a) / var).exp();
    let u: f64 = rng.random();
    if u < up {
        Some(b)
    } else if u < up + lo {
        Some(a)
    } else {
        None
    }
}

fn stepped_path(st: &Stepper, domain: &DomainDelta, x0: f64, horizon: f64, bridge: bool, rng: &mut ChaCha8Rng, path: u64) -> ExitSample {
    let steps = (horizon / st.dt).round().max(1.0) as usize;
    let var = st.sd * st.sd;
    let mut x = x0;
    let Some(mut cell) = interval_of(domain, x0) else {
        return ExitSample { time: 0.0, censored: false, position: x0, path };
    };
    for k in 1..=steps {
        let t = horizon * k as f64 / steps as f64;
        let y = x + st.continuous(rng);
        if !(cell.0 < y && y < cell.1) {
            let edge = if y >= cell.1 { cell.1 } else { cell.0 };
            return ExitSample { time: t, censored: false, position: edge, path };
        }
        if bridge && var > 0.0 {
            if let Some(edge) = bridge_exit(cell.0, cell.1, x, y, var, rng) {
                return ExitSample { time: t, censored: false, position: edge, path };
            }
        }
        x = y + st.jump(rng);
        match interval_of(domain, x) {
            Some(c) => cell = c,
            None => return ExitSample { time: t, censored: false, position: x, path },
        }
    }
    ExitSample { time: horizon, censored: true, position: x, path }
}

fn event_path(ev: &EventDriven, domain: &DomainDelta, x0: f64, horizon: f64, rng: &mut ChaCha8Rng, path: u64) -> ExitSample {
    let mut t = 0.0;
    let mut x = x0;
    loop {
        let Some((a, b)) = interval_of(domain, x) else {
            return ExitSample { time: t, censored: false, position: x, path };
        };
        let wait: f64 = if ev.sizes.rate > 0.0 { Exp1.sample(rng) } else { f64::INFINITY };
        let wait = wait / ev.sizes.rate;
        let hit = match ev.drift {
            d if d > 0.0 => (b - x) / d,
            d if d < 0.0 => (a - x) / d,
            _ => f64::INFINITY,
        };
        let next = t + wait.min(hit);
        if next >= horizon {
            return ExitSample { time: horizon, censored: true, position: x + ev.drift * (horizon - t), path };
        }
        if hit <= wait {
            let edge = if ev.drift > 0.0 { b } else { a };
            return ExitSample { time: next, censored: false, position: edge, path };
        }
        x += ev.drift * wait + ev.sizes.sample(rng);
        t = next;
    }
}

fn resolve_scheme(triplet: &LevyTriplet, domain: &DomainDelta, cfg: &McConfig) -> Result<PathScheme> {
    if let LevyMeasure::Custom(c) = &triplet.measure {
        if !(c.cutoff.is_finite() && c.envelope.is_finite()) {
            return Err(LevyError::Unsupported("custom measure without envelope parameters cannot be simulated".into()));
        }
    }
    match cfg.scheme {
        Some(s) => Ok(s),
        None => {
            let (a, b) = domain.hull();
            PathScheme::auto(triplet, cfg.dt, b - a)
        }
    }
}

/// Exit samples of `n_paths` paths started at `x0`, censored at `horizon`.
/// Path `i` uses stream `i` of the ChaCha generator seeded with `seed`, so
/// samples do not depend on the number of workers.
pub fn simulate_exit_with(
    triplet: &LevyTriplet,
    domain: &DomainDelta,
    x0: f64,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    cfg: McConfig,
) -> Result<McRun> {
    triplet.check()?;
    if n_paths == 0 {
        return Err(LevyError::Domain("at least one path is required".into()));
    }
    if !(horizon > 0.0) {
        return Err(LevyError::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let scheme = resolve_scheme(triplet, domain, &cfg)?;
    let (samples, small) = if scheme == PathScheme::CompoundPoissonExact {
        let ev = EventDriven::new(triplet)?;
        let s = (0..n_paths as u64).into_par_iter().map(|i| event_path(&ev, domain, x0, horizon, &mut path_rng(seed, i), i)).collect();
        (s, None)
    } else {
        let st = Stepper::new(triplet, scheme)?;
        let s = (0..n_paths as u64)
            .into_par_iter()
            .map(|i| stepped_path(&st, domain, x0, horizon, cfg.bridge, &mut path_rng(seed, i), i))
            .collect();
        (s, st.small_jump_variance)
    };
    Ok(McRun { scheme, small_jump_variance: small, samples })
}

pub fn simulate_exit(triplet: &LevyTriplet, domain: &DomainDelta, x0: f64, horizon: f64, n_paths: usize, seed: u64) -> Result<Vec<ExitSample>> {
    Ok(simulate_exit_with(triplet, domain, x0, horizon, n_paths, seed, McConfig::default())?.samples)
}

/// Fraction of paths still inside at each `t`, with standard error
/// `√(p̃(1−p̃)/n)`, `p̃ = (k+1)/(n+2)`, which stays positive at `p̂ ∈ {0,1}`.
pub fn survival_estimate(samples: &[ExitSample], t_grid: &[f64]) -> Result<SurvivalCurve> {
    if samples.is_empty() {
        return Err(LevyError::Domain("no samples".into()));
    }
    let n = samples.len() as f64;
    let mut p = Vec::with_capacity(t_grid.len());
    let mut se = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let k = samples.iter().filter(|s| s.censored || s.time > t).count() as f64;
        let q = (k + 1.0) / (n + 2.0);
        p.push(k / n);
        se.push((q * (1.0 - q) / n).sqrt());
    }
    let mut c = SurvivalCurve::from_raw(t_grid.to_vec(), p, SurvivalMethod::Mc);
    c.se = Some(se);
    Ok(c)
}

/// Sample mean and standard error of `e^{−u ∫₀ᵗ V(X_s) ds} 1{c1 < X_t < c2}`,
/// `V = 1 − 1_Δ`, occupation time by the trapezoid rule on the step grid.
#[allow(clippy::too_many_arguments)]
pub fn feynman_kac_estimate(
    triplet: &LevyTriplet,
    domain: &DomainDelta,
    x0: f64,
    u: f64,
    t: f64,
    (c1, c2): (f64, f64),
    n_paths: usize,
    seed: u64,
    cfg: McConfig,
) -> Result<(f64, f64)> {
    triplet.check()?;
    if n_paths < 2 {
        return Err(LevyError::Domain("at least two paths are required".into()));
    }
    let scheme = match resolve_scheme(triplet, domain, &cfg)? {
        PathScheme::CompoundPoissonExact => PathScheme::JumpDiffusionApprox { dt: cfg.dt, small_jump_cut: 0.0 },
        s => s,
    };
    let st = Stepper::new(triplet, scheme)?;
    let steps = (t / st.dt).round().max(1.0) as usize;
    let h = t / steps as f64;
    let v = |x: f64| domain.complement(x);
    let values: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let mut x = x0;
            let mut occ = 0.5 * v(x);
            for k in 1..=steps {
                x += st.continuous(&mut rng) + st.jump(&mut rng);
                occ += if k == steps { 0.5 } else { 1.0 } * v(x);
            }
            if c1 < x && x < c2 {
                (-u * h * occ).exp()
            } else {
                0.0
            }
        })
        .collect();
    let n = n_paths as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
