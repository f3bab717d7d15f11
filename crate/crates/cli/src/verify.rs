//! Invariant suites run as a user-facing report.

use std::f64::consts::PI;

use levy_core::density::{chapman_kolmogorov_check, transition_density};
use levy_core::kernels::{apply_generator_conv, apply_generator_cp, apply_generator_direct, build_kernel};
use levy_core::mc::{simulate_exit_with, survival_estimate, McConfig};
use levy_core::models::{char_exponent, char_exponent_quadrature, validate_triplet};
use levy_core::potential::{default_family, verify_potential};
use levy_core::quasipotential::{
    assemble_truncated_generator, build_quasipotential, inverse_residual, sectorial_diagnostics, translation_covariance_check, DomainDelta,
};
use levy_core::survival::{brownian_interval_survival, penalized_iterates, survival_laplace, survival_probability, PenalizedConfig, SurvivalConfig};
use levy_core::{CompoundPoisson, GaverStehfest, GridFunction, LevyError, LevyMeasure, LevyTriplet, ModelConfig, Result};
use serde::Serialize;

pub const SUITES: [&str; 8] = ["models", "kernels", "density", "potential", "quasipotential", "sectorial", "survival", "mc"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub check: String,
    pub module: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Suite {
    module: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn new(module: &'static str) -> Self {
        Self { module, checks: Vec::new() }
    }

    fn push(&mut self, check: impl Into<String>, value: f64, tolerance: f64, pass: bool) {
        self.checks.push(Check { check: check.into(), module: self.module.into(), value, tolerance, pass });
    }

    /// `value ≤ tolerance`
    fn at_most(&mut self, check: impl Into<String>, value: f64, tolerance: f64) {
        self.push(check, value, tolerance, value <= tolerance);
    }

    /// `value ≥ tolerance`
    fn at_least(&mut self, check: impl Into<String>, value: f64, tolerance: f64) {
        self.push(check, value, tolerance, value >= tolerance);
    }
}

pub fn catalog() -> Vec<(&'static str, LevyTriplet)> {
    let m = |measure| LevyTriplet::new(0.0, 0.0, measure).expect("catalog model");
    vec![
        ("stable_0.5", LevyTriplet::stable(0.5, 1.0, 1.0)),
        ("stable_1", LevyTriplet::stable(1.0, 1.0, 1.0)),
        ("stable_1.5", LevyTriplet::stable(1.5, 1.0, 1.0)),
        ("variance_gamma", m(LevyMeasure::VarianceGamma { c1: 1.0, c2: 1.0, g: 2.0, m: 2.0 })),
        ("nig", m(LevyMeasure::Nig { c: 1.0, beta: 0.3 })),
        ("meixner", m(LevyMeasure::Meixner { c: 1.0, beta: 0.5 })),
    ]
}

fn unit() -> DomainDelta {
    DomainDelta::interval(-1.0, 1.0).expect("unit interval")
}

/// Sup-distance between the convolution and direct forms on `[-8, 8]`.
pub fn form_gap(t: &LevyTriplet, n: usize) -> Result<f64> {
    let f = GridFunction::from_fn(-8.0, 8.0, n, |x: f64| (-x * x).exp())?;
    Ok(apply_generator_conv(&build_kernel(t)?, &f)?.sup_distance(&apply_generator_direct(t, &f)?))
}

fn models() -> Result<Suite> {
    let mut s = Suite::new("models");
    let t = LevyTriplet::stable(1.5, 1.0, 0.5);
    let mut gap = 0.0f64;
    for z in [-2.0, 0.3, 1.0, 3.0] {
        gap = gap.max((char_exponent(&t, z)? - char_exponent_quadrature(&t, z)?).norm());
    }
    s.at_most("stable_exponent_closed_vs_quadrature", gap, 1e-8);
    let mut failures = 0.0;
    let mut mismatches = 0.0;
    for (_, t) in catalog() {
        if !validate_triplet(&t).passed() {
            failures += 1.0;
        }
        let back = ModelConfig::from_json(&serde_json::to_string(&ModelConfig::from_triplet(&t)?).expect("json"))?.to_triplet()?;
        if back.measure.name() != t.measure.name() || back.a != t.a || back.gamma != t.gamma {
            mismatches += 1.0;
        }
    }
    s.at_most("catalog_validation_failures", failures, 0.0);
    s.at_most("config_round_trip_mismatches", mismatches, 0.0);
    Ok(s)
}

/// Points where `k₀` has the wrong sign for `α` above or below 1.
pub fn sign_violations() -> Result<f64> {
    let mut bad = 0.0;
    for alpha in [0.3, 0.5, 0.8, 1.2, 1.5, 1.8] {
        let k = build_kernel(&LevyTriplet::stable(alpha, 1.0, 0.6))?;
        for i in 0..1000 {
            let y = -5.0 + 10.0 * (i as f64 + 0.5) / 1000.0;
            let v = k.k0(y);
            if (alpha > 1.0 && v < 0.0) || (alpha < 1.0 && v > 0.0) {
                bad += 1.0;
            }
        }
    }
    Ok(bad)
}

/// Sup-distance between the compound Poisson generator and the direct form.
pub fn compound_poisson_gap() -> Result<f64> {
    let cp = CompoundPoisson::laplace(1.0, 1.0);
    let f = GridFunction::from_fn(-8.0, 8.0, 1601, |x: f64| (-x * x).exp())?;
    Ok(apply_generator_cp(&cp, &f)?.sup_distance(&apply_generator_direct(&LevyTriplet::compound_poisson(cp), &f)?))
}

fn kernels() -> Result<Suite> {
    let mut s = Suite::new("kernels");
    s.at_most("stable_1.5_k0_at_1", (build_kernel(&LevyTriplet::stable(1.5, 1.0, 1.0))?.k0(1.0) - 4.0 / 3.0).abs(), 1e-12);
    s.at_most("stable_1_k0_at_half", (build_kernel(&LevyTriplet::stable(1.0, 1.0, 1.0))?.k0(0.5) - 2f64.ln()).abs(), 1e-12);
    s.at_most("stable_k0_sign_violations", sign_violations()?, 0.0);
    for (name, t) in catalog() {
        let (d1, d2) = (form_gap(&t, 801)?, form_gap(&t, 1601)?);
        s.at_most(format!("form_gap_{name}"), d2, 5e-3);
        s.at_least(format!("form_order_{name}"), (d1 / d2).log2(), 1.5);
    }
    s.at_most("compound_poisson_forms", compound_poisson_gap()?, 1e-6);
    Ok(s)
}

fn density() -> Result<Suite> {
    let mut s = Suite::new("density");
    let xs: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.25).collect();
    let g = transition_density(&LevyTriplet::brownian(1.0), 1.0, &xs)?;
    let ge = xs.iter().zip(&g.values).map(|(x, v)| (v - (-0.5 * x * x).exp() / (2.0 * PI).sqrt()).abs()).fold(0.0, f64::max);
    s.at_most("gaussian_density", ge, 1e-10);
    let c = transition_density(&LevyTriplet::cauchy(), 1.0, &xs)?;
    let ce = xs.iter().zip(&c.values).map(|(x, v)| (v - 1.0 / (PI * (1.0 + x * x))).abs()).fold(0.0, f64::max);
    s.at_most("cauchy_density", ce, 1e-6);
    let grid: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.05).collect();
    s.at_most("chapman_kolmogorov_stable_1.5", chapman_kolmogorov_check(&LevyTriplet::stable(1.5, 1.0, 1.0), 1.0, 0.5, &grid)?, 1e-6);
    Ok(s)
}

fn potential(model: Option<&ModelConfig>) -> Result<Suite> {
    let mut s = Suite::new("potential");
    let cp = match model.map(|m| m.to_triplet()).transpose()? {
        None => CompoundPoisson::laplace(1.0, 1.0),
        Some(LevyTriplet { measure: LevyMeasure::CompoundPoisson(cp), .. }) => cp,
        Some(t) => return Err(LevyError::Unsupported(format!("potential suite needs a compound Poisson model, got {}", t.measure.name()))),
    };
    let rep = verify_potential(&cp, &default_family(), &[0.1, 1.0], 10.0, 1001)?;
    s.push("k_bound", rep.k_sup_off_zero, rep.k_at_zero, rep.k_bound_holds);
    s.at_most("kernel_tail", rep.kernel_tail, 1e-8);
    for r in &rep.residuals {
        let tol = if r.variant == "resolvent" { 1e-6 } else { rep.tolerance };
        let name = match r.s {
            Some(sv) => format!("{}_{}_s{sv}", r.variant, r.function),
            None => format!("{}_{}", r.variant, r.function),
        };
        s.push(name, r.residual, tol, r.residual <= tol);
    }
    Ok(s)
}

/// Largest nodal error of the discrete Brownian Green's function on `[-1,1]`.
pub fn green_error(n: usize) -> Result<f64> {
    let k = build_quasipotential(&assemble_truncated_generator(&LevyTriplet::brownian(1.0), &unit(), n)?)?;
    let g = &k.grid;
    let green = |x: f64, y: f64| (x.min(y) + 1.0) * (1.0 - x.max(y));
    let mut e = 0.0f64;
    for &i in &g.interior {
        for &j in &g.interior {
            e = e.max((k.phi[(i, j)] - green(g.nodes[i], g.nodes[j])).abs());
        }
    }
    Ok(e)
}

fn quasipotential() -> Result<Suite> {
    let mut s = Suite::new("quasipotential");
    let k = build_quasipotential(&assemble_truncated_generator(&LevyTriplet::brownian(1.0), &unit(), 401)?)?;
    s.at_most("brownian_phi_00", (k.phi[(200, 200)] - 1.0).abs(), 1e-3);
    s.at_most("brownian_boundary_rows", k.boundary_max(), 0.0);
    s.at_most("brownian_negativity", (-k.relative_minimum()).max(0.0), 1e-8);
    s.at_most("brownian_green_nodal_error_81", green_error(81)?, 1e-10);
    let l = assemble_truncated_generator(&LevyTriplet::stable(1.5, 1.0, 1.0), &unit(), 101)?;
    let ks = build_quasipotential(&l)?;
    s.at_most("stable_1.5_inverse_residual", inverse_residual(&l, &ks), 1e-8);
    s.push("stable_1.5_regularity_beta", ks.regularity.beta, 1.0, ks.regularity.pass);
    s.at_most("stable_1.5_translation", translation_covariance_check(&LevyTriplet::stable(1.5, 1.0, 1.0), &unit(), 0.5, 101)?, 1e-8);
    Ok(s)
}

fn sectorial() -> Result<Suite> {
    let mut s = Suite::new("sectorial");
    let k = build_quasipotential(&assemble_truncated_generator(&LevyTriplet::brownian(1.0), &unit(), 101)?)?;
    let sg: Vec<f64> = (0..=10).map(|i| 10.0 * i as f64).collect();
    let r = sectorial_diagnostics(&k, &sg, 200, 42);
    s.at_most("brownian_max_arg", r.max_abs_arg, 1e-6);
    let excess = r.conditions.iter().map(|&(s, c)| c - (1.0 + s * r.norm)).fold(f64::NEG_INFINITY, f64::max);
    s.at_most("brownian_condition_bound_excess", excess, 1e-9);
    Ok(s)
}

/// Worst excess of `Qₙ` over `tⁿρ/n!` and of `Q(u₂)` over `Q(u₁)`, `u₁ < u₂`.
pub fn penalization_bounds(t: &LevyTriplet) -> Result<(f64, f64, f64)> {
    let cfg = PenalizedConfig::default();
    let lo = penalized_iterates(t, &unit(), 0.0, 1.0, 1.0, cfg)?;
    let hi = penalized_iterates(t, &unit(), 0.0, 3.0, 1.0, cfg)?;
    let (mut below, mut above, mut fact) = (0.0f64, 0.0f64, 1.0);
    for (n, q) in lo.iterates.iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        for (a, r) in q.iter().zip(&lo.rho) {
            below = below.max(-a);
            above = above.max(a - r / fact);
        }
    }
    let mono = lo.values.iter().zip(&hi.values).map(|(a, b)| b - a).fold(f64::NEG_INFINITY, f64::max);
    Ok((below, above, mono))
}

fn survival() -> Result<Suite> {
    let mut s = Suite::new("survival");
    let k = build_quasipotential(&assemble_truncated_generator(&LevyTriplet::brownian(1.0), &unit(), 401)?)?;
    for (sv, mass) in survival_laplace(&k, &[0.5, 1.0, 2.0], 0.0)? {
        let want = (1.0 - 1.0 / (2.0 * sv).sqrt().cosh()) / sv;
        s.at_most(format!("laplace_identity_s{sv}"), (mass - want).abs(), 2e-3);
    }
    let gs = GaverStehfest::new(9)?;
    let worst = [0.5, 1.0, 2.0].iter().map(|&t| gs.invert(|s| 1.0 / (s + 1.0), t).map(|v| (v - (-t).exp()).abs())).collect::<Result<Vec<f64>>>()?;
    s.at_most("stehfest_exponential", worst.into_iter().fold(0.0, f64::max), 1e-6);
    let c = survival_probability(&LevyTriplet::brownian(1.0), &unit(), 0.0, &[1.0], SurvivalConfig::default())?;
    s.at_most("brownian_survival_t1", (c.p[0] - brownian_interval_survival(1.0, 1.0, 1.0)).abs(), 5e-3);
    for (name, t) in [("brownian", LevyTriplet::brownian(1.0)), ("cauchy", LevyTriplet::cauchy())] {
        let (below, above, mono) = penalization_bounds(&t)?;
        s.at_most(format!("penalized_{name}_negativity"), below, 1e-8);
        s.at_most(format!("penalized_{name}_iterate_bound"), above, 1e-8);
        s.at_most(format!("penalized_{name}_monotone_in_u"), mono, 1e-8);
    }
    Ok(s)
}

fn mc() -> Result<Suite> {
    let mut s = Suite::new("mc");
    let t = LevyTriplet::brownian(1.0);
    let a = simulate_exit_with(&t, &unit(), 0.0, 1.0, 10_000, 42, McConfig::default())?;
    let c = survival_estimate(&a.samples, &[1.0])?;
    let z = (c.p[0] - brownian_interval_survival(1.0, 1.0, 1.0)).abs() / c.se.as_ref().expect("se")[0];
    s.at_most("brownian_survival_standard_errors", z, 3.0);
    let b = simulate_exit_with(&t, &unit(), 0.0, 1.0, 10_000, 42, McConfig::default())?;
    let diff = a.samples.iter().zip(&b.samples).filter(|(x, y)| x.time.to_bits() != y.time.to_bits()).count();
    s.at_most("seed_reproducibility_mismatches", diff as f64, 0.0);
    Ok(s)
}

/// Runs one suite or `all`. Errors inside a suite become a failed check.
pub fn run_suite(name: &str, model: Option<&ModelConfig>) -> Result<Vec<Check>> {
    let names: Vec<&str> = match name {
        "all" => SUITES.to_vec(),
        n if SUITES.contains(&n) => vec![n],
        other => return Err(LevyError::Parse(format!("unknown suite '{other}' (all | {})", SUITES.join(" | ")))),
    };
    let mut out = Vec::new();
    for n in names {
        let r = match n {
            "models" => models(),
            "kernels" => kernels(),
            "density" => density(),
            "potential" => potential(model),
            "quasipotential" => quasipotential(),
            "sectorial" => sectorial(),
            "survival" => survival(),
            _ => mc(),
        };
        match r {
            Ok(s) => out.extend(s.checks),
            Err(e) if e.is_numerical() => {
                out.push(Check { check: format!("{n}_suite"), module: n.into(), value: f64::NAN, tolerance: 0.0, pass: false })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
