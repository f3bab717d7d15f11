//! Survival probability `p(t,Δ)` of a Lévy process started inside `Δ`:
//! the resolvent route `ψ = (I + sB*)^{-1} Φ(x0,·)` with numerical Laplace
//! inversion, and the penalization route `Q(x,t,u)`.

mod penalized;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{mass_bound, small_time_integrability};
use crate::error::{LevyError, Result};
use crate::linalg::Hessenberg;
use crate::models::LevyTriplet;
use crate::quasipotential::{assemble_truncated_generator, build_quasipotential, DomainDelta, QuasiPotentialKernel};
use crate::{GaverStehfest, Matrix};

pub use penalized::{
    feynman_kac_rhs, penalized_iterates, penalized_survival, PenalizedConfig, PenalizedSolution, PenaltyMethod,
};

#[derive(Clone, Debug, Serialize)]
pub struct PsiSlice {
    pub s: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// `∫_Δ ψ dx`
    pub laplace_mass: f64,
    /// `x0` outside the domain: `ψ ≡ 0`.
    pub outside: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurvivalMethod {
    Laplace,
    Penalized,
    Mc,
}

impl SurvivalMethod {
    pub fn name(self) -> &'static str {
        match self {
            SurvivalMethod::Laplace => "laplace",
            SurvivalMethod::Penalized => "penalized",
            SurvivalMethod::Mc => "mc",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalCurve {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub method: SurvivalMethod,
    /// Standard errors, Monte Carlo only.
    pub se: Option<Vec<f64>>,
    /// Values before clamping to `[0, 1]`.
    pub raw: Vec<f64>,
    pub notes: Vec<String>,
}

impl SurvivalCurve {
    pub fn from_raw(t: Vec<f64>, raw: Vec<f64>, method: SurvivalMethod) -> Self {
        let p = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Self { t, p, method, se: None, raw, notes: Vec::new() }
    }
}

/// `ψ(·,s)` for several `s` from one Hessenberg reduction of `B*`.
pub struct PsiSolver<'a> {
    kernel: &'a QuasiPotentialKernel,
    reduced: Hessenberg<f64>,
}

impl<'a> PsiSolver<'a> {
    pub fn new(kernel: &'a QuasiPotentialKernel) -> Self {
        Self { kernel, reduced: Hessenberg::reduce(&kernel.adjoint()) }
    }

    /// Solves `(I + sB*)ψ = Φ(x0,·)` on the interior nodes.
    pub fn solve(&self, s: f64, x0: f64) -> Result<PsiSlice> {
        if !(s > 0.0) {
            return Err(LevyError::Domain(format!("Laplace variable must be positive, got {s}")));
        }
        let g = &self.kernel.grid;
        let nodes = g.nodes.clone();
        let Some(row) = self.kernel.row_at(x0).filter(|_| g.domain.contains_interior(x0)) else {
            return Ok(PsiSlice { s, values: vec![0.0; nodes.len()], nodes, laplace_mass: 0.0, outside: true });
        };
        let rhs: Vec<f64> = g.interior.iter().map(|&i| row[i]).collect();
        let inner = self.reduced.solve_shifted(s, &rhs)?;
        let mut values = vec![0.0; nodes.len()];
        for (&i, v) in g.interior.iter().zip(inner) {
            values[i] = v;
        }
        let laplace_mass = g.integrate(&values);
        Ok(PsiSlice { s, nodes, values, laplace_mass, outside: false })
    }
}

pub fn solve_psi(kernel: &QuasiPotentialKernel, s: f64, x0: f64) -> Result<PsiSlice> {
    PsiSolver::new(kernel).solve(s, x0)
}

/// `(s, ∫_Δ ψ(x,s) dx)` over `s_grid`.
pub fn survival_laplace(kernel: &QuasiPotentialKernel, s_grid: &[f64], x0: f64) -> Result<Vec<(f64, f64)>> {
    let solver = PsiSolver::new(kernel);
    s_grid.iter().map(|&s| solver.solve(s, x0).map(|p| (s, p.laplace_mass))).collect()
}

/// Gaver–Stehfest inversion with `2m` terms at each `t`.
pub fn invert_laplace<F: Fn(f64) -> f64 + Sync>(f: F, t_grid: &[f64], m: usize, method: SurvivalMethod) -> Result<SurvivalCurve> {
    let gs = GaverStehfest::new(m)?;
    let raw = t_grid.par_iter().map(|&t| gs.invert(&f, t)).collect::<Result<Vec<f64>>>()?;
    Ok(SurvivalCurve::from_raw(t_grid.to_vec(), raw, method))
}

/// Options for the resolvent route.
#[derive(Clone, Copy, Debug)]
pub struct SurvivalConfig {
    /// Nodes on a single interval, see [`crate::quasipotential::QuadratureGrid::new`].
    pub n: usize,
    /// Gaver–Stehfest half order.
    pub m: usize,
}

impl Default for SurvivalConfig {
    fn default() -> Self {
        Self { n: 401, m: 7 }
    }
}

/// End-to-end `p(t,Δ)` by the resolvent route. A transition law without a
/// density is rejected; a non-integrable small-time bound `∫₀¹M(t)dt` and
/// an irregular quasi-potential are recorded in the notes.
pub fn survival_probability(triplet: &LevyTriplet, domain: &DomainDelta, x0: f64, t_grid: &[f64], cfg: SurvivalConfig) -> Result<SurvivalCurve> {
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(LevyError::Domain("survival times must be positive".into()));
    }
    if mass_bound(triplet, 1.0)?.divergent {
        return Err(LevyError::Unsupported(
            "the transition law has no density (characteristic function not integrable); use the Monte Carlo estimator".into(),
        ));
    }
    let mut notes = Vec::new();
    let small = small_time_integrability(triplet)?;
    if !small.finite {
        notes.push(format!("small-time bound not integrable (M(t) ~ t^-{:.3})", small.exponent));
    }
    let kernel = build_quasipotential(&assemble_truncated_generator(triplet, domain, cfg.n)?)?;
    if !kernel.regularity.pass {
        notes.push(format!("quasi-potential not regular (beta = {:.3})", kernel.regularity.beta));
    }
    let solver = PsiSolver::new(&kernel);
    let gs = GaverStehfest::new(cfg.m)?;
    let raw = t_grid
        .par_iter()
        .map(|&t| {
            let samples = gs.abscissas(t).into_iter().map(|s| solver.solve(s, x0).map(|p| p.laplace_mass)).collect::<Result<Vec<f64>>>()?;
            Ok(gs.combine(t, &samples))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut curve = SurvivalCurve::from_raw(t_grid.to_vec(), raw, SurvivalMethod::Laplace);
    curve.notes = notes;
    Ok(curve)
}

/// `P(|X_s| < a, s ≤ t)` for `X = √A·W` started at the centre of an
/// interval of half width `a`.
pub fn brownian_interval_survival(a_diffusion: f64, half_width: f64, t: f64) -> f64 {
    let tau = a_diffusion * t / (half_width * half_width);
    let mut sum = 0.0;
    for k in 0..200 {
        let m = (2 * k + 1) as f64;
        let term = (-m * m * std::f64::consts::PI.powi(2) * tau / 8.0).exp() / m;
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    4.0 / std::f64::consts::PI * sum
}

/// `∫_Δ ψ` for `B*` given as a matrix, by a dense solve; used to check the
/// Hessenberg solves.
pub fn psi_dense(kernel: &QuasiPotentialKernel, s: f64, x0: f64) -> Result<Vec<f64>> {
    let b = kernel.adjoint();
    let n = b.rows();
    let m = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + s * b[(i, j)]);
    let row = kernel.row_at(x0).ok_or_else(|| LevyError::Domain("x0 outside the domain".into()))?;
    let rhs: Vec<f64> = kernel.grid.interior.iter().map(|&i| row[i]).collect();
    Ok(crate::linalg::Lu::factor(&m)?.solve(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brownian_kernel(n: usize) -> QuasiPotentialKernel {
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        build_quasipotential(&assemble_truncated_generator(&LevyTriplet::brownian(1.0), &d, n).unwrap()).unwrap()
    }

    #[test]
    fn brownian_laplace_masses() {
        let k = brownian_kernel(401);
        for (s, mass) in survival_laplace(&k, &[0.5, 1.0, 2.0], 0.0).unwrap() {
            let want = (1.0 - 1.0 / (2.0 * s).sqrt().cosh()) / s;
            assert!((mass - want).abs() < 2e-3, "{s} {mass} {want}");
        }
    }

    #[test]
    fn psi_is_nonnegative_and_unique() {
        let k = brownian_kernel(201);
        let p = solve_psi(&k, 1.0, 0.0).unwrap();
        assert!(p.values.iter().all(|&v| v >= -1e-8));
        assert_eq!(p.values[0], 0.0);
        assert!(p.laplace_mass > 0.0 && p.laplace_mass <= 1.0);
        let dense = psi_dense(&k, 1.0, 0.0).unwrap();
        for (&i, d) in k.grid.interior.iter().zip(dense) {
            assert!((p.values[i] - d).abs() < 1e-10);
        }
        let out = solve_psi(&k, 1.0, 3.0).unwrap();
        assert!(out.outside && out.laplace_mass == 0.0);
    }

    #[test]
    fn small_s_recovers_the_kernel_row() {
        let k = brownian_kernel(201);
        let p = solve_psi(&k, 1e-9, 0.0).unwrap();
        let row = k.row_at(0.0).unwrap();
        assert!(p.values.iter().zip(&row).all(|(a, b)| (a - b).abs() < 1e-6));
    }

    #[test]
    fn stehfest_on_known_transforms() {
        let c = invert_laplace(|s| 1.0 / s, &[0.5, 1.0, 2.0], 7, SurvivalMethod::Laplace).unwrap();
        assert!(c.raw.iter().all(|v| (v - 1.0).abs() < 1e-8));
        // 14 terms leave 1e-5 at t = 2; 18 terms reach 1e-6
        let c = invert_laplace(|s| 1.0 / (s + 1.0), &[0.5, 1.0, 2.0], 9, SurvivalMethod::Laplace).unwrap();
        for (t, v) in c.t.iter().zip(&c.raw) {
            assert!((v - (-t).exp()).abs() < 1e-6, "{t} {v}");
        }
        let c = invert_laplace(|s| (1.0 - 1.0 / (2.0 * s).sqrt().cosh()) / s, &[1.0], 7, SurvivalMethod::Laplace).unwrap();
        assert!((c.p[0] - 0.37074).abs() < 1e-3, "{}", c.p[0]);
    }

    #[test]
    fn brownian_survival_end_to_end() {
        let d = DomainDelta::interval(-1.0, 1.0).unwrap();
        let c = survival_probability(&LevyTriplet::brownian(1.0), &d, 0.0, &[0.5, 1.0, 2.0], SurvivalConfig::default()).unwrap();
        for (t, p) in c.t.iter().zip(&c.p) {
            let want = brownian_interval_survival(1.0, 1.0, *t);
            assert!((p - want).abs() < 5e-3, "{t} {p} {want}");
        }
        assert!((brownian_interval_survival(1.0, 1.0, 1.0) - 0.370777).abs() < 1e-6);
    }
}
