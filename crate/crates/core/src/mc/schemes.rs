//! One-step samplers for each path scheme.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, InverseGaussian, Poisson, StandardNormal};
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{LevyError, Result};
use crate::models::tables::{moment_below, SideTable};
use crate::models::{LevyMeasure, LevyTriplet, Side};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const TABLE_STEP: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum PathScheme {
    BrownianExact { dt: f64 },
    StableCms { dt: f64 },
    /// Jump times from exponential clocks; requires `A = 0`.
    CompoundPoissonExact,
    /// Variance gamma as a difference of gamma processes, NIG through an
    /// inverse Gaussian subordinator.
    SubordinatedGaussian { dt: f64 },
    /// Jumps `|y| ≥ ε` as compound Poisson, smaller ones as a Gaussian.
    JumpDiffusionApprox { dt: f64, small_jump_cut: f64 },
}

impl PathScheme {
    pub fn dt(&self) -> Option<f64> {
        match *self {
            PathScheme::BrownianExact { dt }
            | PathScheme::StableCms { dt }
            | PathScheme::SubordinatedGaussian { dt }
            | PathScheme::JumpDiffusionApprox { dt, .. } => Some(dt),
            PathScheme::CompoundPoissonExact => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PathScheme::BrownianExact { .. } => "brownian_exact",
            PathScheme::StableCms { .. } => "stable_cms",
            PathScheme::CompoundPoissonExact => "compound_poisson_exact",
            PathScheme::SubordinatedGaussian { .. } => "subordinated_gaussian",
            PathScheme::JumpDiffusionApprox { .. } => "jump_diffusion_approx",
        }
    }

    /// Scheme for the measure variant; `scale` sets the default small-jump
    /// cut through `σ(ε) ≤ 1e-3 · scale`.
    pub fn auto(triplet: &LevyTriplet, dt: f64, scale: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(LevyError::Domain(format!("time step must be positive, got {dt}")));
        }
        Ok(match &triplet.measure {
            LevyMeasure::PureDiffusion => PathScheme::BrownianExact { dt },
            LevyMeasure::Stable { .. } => PathScheme::StableCms { dt },
            LevyMeasure::CompoundPoisson(_) if triplet.a == 0.0 => PathScheme::CompoundPoissonExact,
            LevyMeasure::CompoundPoisson(_) => PathScheme::JumpDiffusionApprox { dt, small_jump_cut: 0.0 },
            LevyMeasure::VarianceGamma { .. } | LevyMeasure::Nig { .. } => PathScheme::SubordinatedGaussian { dt },
            m => PathScheme::JumpDiffusionApprox { dt, small_jump_cut: default_cut(m, scale)? },
        })
    }
}

/// `σ²(ε) = ∫_{|y|<ε} y² ν'(y) dy`.
pub fn small_jump_variance(measure: &LevyMeasure, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Ok(0.0);
    }
    Ok(moment_below(measure, Side::Left, 2.0, eps)? + moment_below(measure, Side::Right, 2.0, eps)?)
}

/// Largest `ε ≥ 1e-3` on a geometric ladder with `σ(ε) ≤ 1e-3 · scale`.
fn default_cut(measure: &LevyMeasure, scale: f64) -> Result<f64> {
    let mut eps = scale.max(1e-3);
    while eps > 1e-3 {
        if small_jump_variance(measure, eps)?.sqrt() <= 1e-3 * scale {
            return Ok(eps);
        }
        eps *= 0.5;
    }
    Ok(1e-3)
}

/// Standard `S(α, β, 0)` variate (Chambers–Mallows–Stuck).
pub fn cms_standard<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 && beta == 0.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        let p = FRAC_PI_2 + beta * v;
        (2.0 / PI) * (p * v.tan() - beta * ((FRAC_PI_2 * w * v.cos()) / p).ln())
    } else {
        let t = beta * (FRAC_PI_2 * alpha).tan();
        let b = t.atan() / alpha;
        let s = (1.0 + t * t).powf(0.5 / alpha);
        s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha) * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

/// Inverse of the tail mass `T(r)` on one half-line above `ε`.
#[derive(Clone, Debug)]
struct TailSampler {
    mass: f64,
    tails: Vec<f64>,
    log_r: Vec<f64>,
    table: SideTable,
}

impl TailSampler {
    fn new(measure: &LevyMeasure, side: Side, eps: f64) -> Result<Self> {
        let table = SideTable::build(measure, side)?;
        let lo = eps.max(1e-12);
        let hi = table.extent().max(lo * 2.0);
        let n = ((hi / lo).ln() / TABLE_STEP).ceil() as usize + 1;
        let log_r: Vec<f64> = (0..n).map(|i| lo.ln() + i as f64 * TABLE_STEP).collect();
        let tails: Vec<f64> = log_r.iter().map(|&l| table.tail_mass(l.exp()).max(0.0)).collect();
        Ok(Self { mass: tails[0], tails, log_r, table })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let target = self.mass * (1.0 - rng.random::<f64>());
        let last = *self.tails.last().unwrap();
        if target <= last {
            return self.table.inverse_tail(target);
        }
        // tails decrease; first index with tails[i] < target
        let i = self.tails.partition_point(|&t| t >= target).clamp(1, self.tails.len() - 1);
        let (t0, t1) = (self.tails[i - 1], self.tails[i]);
        let f = if t0 > t1 { (t0 - target) / (t0 - t1) } else { 0.0 };
        (self.log_r[i - 1] + f * (self.log_r[i] - self.log_r[i - 1])).exp()
    }
}

/// Jump sizes `|y| ≥ ε` drawn from `ν'` restricted there.
#[derive(Clone, Debug)]
pub(crate) struct JumpSampler {
    left: TailSampler,
    right: TailSampler,
    pub rate: f64,
}

impl JumpSampler {
    pub fn new(measure: &LevyMeasure, eps: f64) -> Result<Self> {
        let left = TailSampler::new(measure, Side::Left, eps)?;
        let right = TailSampler::new(measure, Side::Right, eps)?;
        let rate = left.mass + right.mass;
        if !rate.is_finite() {
            return Err(LevyError::Precondition(format!("jump intensity above {eps} is not finite")));
        }
        Ok(Self { left, right, rate })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() * self.rate < self.left.mass {
            -self.left.sample(rng)
        } else {
            self.right.sample(rng)
        }
    }
}

/// `∫_{ε<|y|≤1} y ν'` when `ε < 1`, `−∫_{1<|y|<ε} y ν'` otherwise.
fn compensator_above(measure: &LevyMeasure, eps: f64) -> Result<f64> {
    let mut total = 0.0;
    for side in Side::BOTH {
        let t = SideTable::build(measure, side)?;
        let f = if eps <= 0.0 {
            -t.inner_first_moment(1.0).ok_or_else(|| LevyError::Precondition("small jumps are not summable".into()))?
        } else {
            t.first_moment_from_one(eps)
        };
        total -= side.sign() * f;
    }
    Ok(total)
}

/// `E X_1 − γ = ∫_{|y|>1} y ν'`.
fn outer_mean(measure: &LevyMeasure) -> Result<f64> {
    let mut total = 0.0;
    for side in Side::BOTH {
        let t = SideTable::build(measure, side)?;
        total += side.sign() * t.outer_first_moment(1.0).ok_or_else(|| LevyError::Precondition("jump mean is infinite".into()))?;
    }
    Ok(total)
}

#[derive(Clone, Debug)]
enum Jumps {
    None,
    Stable { alpha: f64, beta: f64, scale: f64 },
    Gamma { up: Gamma<f64>, down: Gamma<f64> },
    Nig { ig: InverseGaussian<f64>, beta: f64 },
    Poisson { count: Poisson<f64>, sizes: Box<JumpSampler> },
}

/// Increment over one step: a continuous part `drift + sd·Z` (bridge
/// tested) followed by a jump part.
#[derive(Clone, Debug)]
pub(crate) struct Stepper {
    pub dt: f64,
    pub drift: f64,
    pub sd: f64,
    jumps: Jumps,
    pub small_jump_variance: Option<f64>,
}

impl Stepper {
    pub fn new(triplet: &LevyTriplet, scheme: PathScheme) -> Result<Self> {
        let Some(dt) = scheme.dt() else {
            return Err(LevyError::Unsupported("event-driven scheme has no fixed step".into()));
        };
        let mut drift = triplet.gamma * dt;
        let mut var = triplet.a * dt;
        let mut small = None;
        let jumps = match (scheme, &triplet.measure) {
            (PathScheme::BrownianExact { .. }, LevyMeasure::PureDiffusion) => Jumps::None,
            (PathScheme::StableCms { .. }, &LevyMeasure::Stable { alpha, c1, c2 }) => {
                let beta = (c2 - c1) / (c1 + c2);
                if alpha == 1.0 {
                    let sigma = (c1 + c2) * FRAC_PI_2 * dt;
                    drift += (c2 - c1) * (1.0 - EULER_GAMMA) * dt + 2.0 / PI * beta * sigma * sigma.ln();
                    Jumps::Stable { alpha, beta, scale: sigma }
                } else {
                    let sigma_a = -(c1 + c2) * gamma(-alpha) * (FRAC_PI_2 * alpha).cos();
                    drift += -(c2 - c1) / (1.0 - alpha) * dt;
                    Jumps::Stable { alpha, beta, scale: (sigma_a * dt).powf(1.0 / alpha) }
                }
            }
            (PathScheme::SubordinatedGaussian { .. }, m @ &LevyMeasure::VarianceGamma { c1, c2, g, m: mm }) => {
                drift += (outer_mean(m)? - (c2 / mm - c1 / g)) * dt;
                let up = Gamma::new(c2 * dt, 1.0 / mm).map_err(|e| LevyError::InvalidModel(e.to_string()))?;
                let down = Gamma::new(c1 * dt, 1.0 / g).map_err(|e| LevyError::InvalidModel(e.to_string()))?;
                Jumps::Gamma { up, down }
            }
            (PathScheme::SubordinatedGaussian { .. }, m @ &LevyMeasure::Nig { c, beta }) => {
                let delta = PI * c;
                let g0 = (1.0 - beta * beta).sqrt();
                drift += (outer_mean(m)? - delta * beta / g0) * dt;
                let ig = InverseGaussian::new(delta * dt / g0, (delta * dt).powi(2)).map_err(|e| LevyError::InvalidModel(e.to_string()))?;
                Jumps::Nig { ig, beta }
            }
            (PathScheme::JumpDiffusionApprox { small_jump_cut: eps, .. }, m) if !matches!(m, LevyMeasure::PureDiffusion) => {
                let s2 = small_jump_variance(m, eps)?;
                small = Some(s2);
                var += s2 * dt;
                drift -= compensator_above(m, eps)? * dt;
                let sizes = JumpSampler::new(m, eps)?;
                let count = Poisson::new(sizes.rate * dt).map_err(|e| LevyError::InvalidModel(e.to_string()))?;
                Jumps::Poisson { count, sizes: Box::new(sizes) }
            }
            (s, m) => {
                return Err(LevyError::Unsupported(format!("scheme {} does not apply to {} measures", s.name(), m.name())));
            }
        };
        Ok(Self { dt, drift, sd: var.sqrt(), jumps, small_jump_variance: small })
    }

    pub fn continuous<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sd > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            self.drift + self.sd * z
        } else {
            self.drift
        }
    }

    pub fn jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.jumps {
            Jumps::None => 0.0,
            Jumps::Stable { alpha, beta, scale } => scale * cms_standard(*alpha, *beta, rng),
            Jumps::Gamma { up, down } => up.sample(rng) - down.sample(rng),
            Jumps::Nig { ig, beta } => {
                let t = ig.sample(rng);
                let z: f64 = StandardNormal.sample(rng);
                beta * t + t.sqrt() * z
            }
            Jumps::Poisson { count, sizes } => {
                let n = count.sample(rng) as u64;
                (0..n).map(|_| sizes.sample(rng)).sum()
            }
        }
    }
}

/// Compound Poisson jumps with linear motion in between.
#[derive(Clone, Debug)]
pub(crate) struct EventDriven {
    pub drift: f64,
    pub sizes: JumpSampler,
}

impl EventDriven {
    pub fn new(triplet: &LevyTriplet) -> Result<Self> {
        if !matches!(triplet.measure, LevyMeasure::CompoundPoisson(_)) || triplet.a != 0.0 {
            return Err(LevyError::Unsupported("exact jump-time simulation needs a compound Poisson measure and A = 0".into()));
        }
        let drift = triplet.gamma - compensator_above(&triplet.measure, 0.0)?;
        Ok(Self { drift, sizes: JumpSampler::new(&triplet.measure, 0.0)? })
    }
}
