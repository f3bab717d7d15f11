use levy_core::density::transition_density;
use levy_core::kernels::build_kernel;
use levy_core::mc::{feynman_kac_estimate, simulate_exit_with, survival_estimate, McConfig};
use levy_core::quasipotential::{assemble_truncated_generator, build_quasipotential, sectorial_diagnostics};
use levy_core::survival::{feynman_kac_rhs, penalized_survival, survival_probability, PenalizedConfig, SurvivalConfig};
use levy_core::{LevyError, Result};
use serde::Serialize;

use crate::config::{csv, Cell, RunConfig};

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi > lo) || n < 2 {
        return Err(LevyError::InvalidGrid(format!("need lo < hi and at least 2 points, got [{lo}, {hi}] with {n}")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

pub fn density(cfg: &RunConfig) -> Result<String> {
    let t = cfg.triplet()?;
    let x = grid(cfg.xmin.unwrap_or(-5.0), cfg.xmax.unwrap_or(5.0), cfg.nx.unwrap_or(1001))?;
    let d = transition_density(&t, cfg.t.unwrap_or(1.0), &x)?;
    Ok(csv(&["x", "rho"], d.nodes.iter().zip(&d.values).map(|(&x, &r)| vec![Cell::Num(x), Cell::Num(r)])))
}

pub fn kernel(cfg: &RunConfig) -> Result<String> {
    let k = build_kernel(&cfg.triplet()?)?;
    let y = grid(cfg.ymin.unwrap_or(-5.0), cfg.ymax.unwrap_or(5.0), cfg.n.unwrap_or(2001))?;
    Ok(csv(
        &["y", "k0", "k", "signpart"],
        y.into_iter().map(|y| vec![Cell::Num(y), Cell::Num(k.k0(y)), Cell::Num(k.k(y)), Cell::Num(0.5 * k.sign_coeff * sign(y))]),
    ))
}

fn sign(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else if y < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn greens(cfg: &RunConfig) -> Result<String> {
    let l = assemble_truncated_generator(&cfg.triplet()?, &cfg.domain()?, cfg.n.unwrap_or(401))?;
    let k = build_quasipotential(&l)?;
    let x = &k.grid.nodes;
    let n = x.len();
    Ok(csv(&["x", "y", "phi"], (0..n * n).map(|p| vec![Cell::Num(x[p / n]), Cell::Num(x[p % n]), Cell::Num(k.phi[(p / n, p % n)])])))
}

#[derive(Serialize)]
struct SectorialOutput {
    n: usize,
    max_abs_arg: f64,
    beta: f64,
    norm: f64,
    min_real_part: f64,
    /// `(s, cond₂(I + sB), 1 + s‖B‖)`
    conditions: Vec<(f64, f64, f64)>,
    bound_holds: bool,
    samples: Vec<(f64, f64)>,
}

pub fn sectorial(cfg: &RunConfig) -> Result<String> {
    let l = assemble_truncated_generator(&cfg.triplet()?, &cfg.domain()?, cfg.n.unwrap_or(201))?;
    let k = build_quasipotential(&l)?;
    let smax = cfg.smax.unwrap_or(100.0);
    let ns = cfg.ns.unwrap_or(11).max(2);
    let s: Vec<f64> = (0..ns).map(|i| smax * i as f64 / (ns - 1) as f64).collect();
    let r = sectorial_diagnostics(&k, &s, cfg.trials.unwrap_or(200), cfg.seed.unwrap_or(42));
    let conditions: Vec<(f64, f64, f64)> = r.conditions.iter().map(|&(s, c)| (s, c, 1.0 + s * r.norm)).collect();
    let bound_holds = conditions.iter().all(|&(_, c, b)| c <= b * (1.0 + 1e-9));
    Ok(json(&SectorialOutput {
        n: l.grid.len(),
        max_abs_arg: r.max_abs_arg,
        beta: r.beta,
        norm: r.norm,
        min_real_part: r.min_real_part,
        conditions,
        bound_holds,
        samples: r.samples,
    }))
}

pub fn survive(cfg: &RunConfig) -> Result<String> {
    let t = cfg.triplet()?;
    let d = cfg.domain()?;
    let x0 = cfg.x0.unwrap_or(0.0);
    let tg = cfg.time_grid(5.0, 50)?;
    let curve = match cfg.method.as_deref().unwrap_or("laplace") {
        "laplace" => {
            let sc = SurvivalConfig { n: cfg.n.unwrap_or(401), m: cfg.m.unwrap_or(7) };
            survival_probability(&t, &d, x0, &tg, sc)?
        }
        "penalized" => penalized_survival(&t, &d, x0, cfg.u.unwrap_or(50.0), &tg, PenalizedConfig::default())?,
        other => return Err(LevyError::Parse(format!("unknown method '{other}' (laplace | penalized)"))),
    };
    let name = curve.method.name();
    Ok(csv(&["t", "p", "method"], curve.t.iter().zip(&curve.p).map(|(&t, &p)| vec![Cell::Num(t), Cell::Num(p), Cell::Text(name)])))
}

#[derive(Serialize)]
struct FkOutput {
    u: f64,
    t: f64,
    x0: f64,
    c1: f64,
    c2: f64,
    penalized: f64,
    mc: f64,
    se: f64,
    paths: usize,
    seed: u64,
    /// `|penalized − mc| ≤ 3 se`
    pass: bool,
}

pub fn fk(cfg: &RunConfig) -> Result<String> {
    let tr = cfg.triplet()?;
    let d = cfg.domain()?;
    let (a, b) = d.hull();
    let (x0, u, t) = (cfg.x0.unwrap_or(0.0), cfg.u.unwrap_or(10.0), cfg.t.unwrap_or(1.0));
    let (c1, c2) = (cfg.c1.unwrap_or(a), cfg.c2.unwrap_or(b));
    let paths = cfg.paths.unwrap_or(100_000);
    let seed = cfg.seed.unwrap_or(42);
    let pen = feynman_kac_rhs(&tr, &d, x0, u, t, c1, c2)?;
    let mc_cfg = McConfig { dt: cfg.dt.unwrap_or(1e-3), ..Default::default() };
    let (mc, se) = feynman_kac_estimate(&tr, &d, x0, u, t, (c1, c2), paths, seed, mc_cfg)?;
    Ok(json(&FkOutput { u, t, x0, c1, c2, penalized: pen, mc, se, paths, seed, pass: (pen - mc).abs() <= 3.0 * se }))
}

pub fn mc(cfg: &RunConfig) -> Result<String> {
    let t = cfg.triplet()?;
    let d = cfg.domain()?;
    let tg = cfg.time_grid(5.0, 50)?;
    let horizon = *tg.last().unwrap();
    let mc_cfg = McConfig { dt: cfg.dt.unwrap_or(1e-3), ..Default::default() };
    let run = simulate_exit_with(&t, &d, cfg.x0.unwrap_or(0.0), horizon, cfg.paths.unwrap_or(100_000), cfg.seed.unwrap_or(42), mc_cfg)?;
    if let Some(s2) = run.small_jump_variance {
        eprintln!("mc: scheme {} small-jump variance {}", run.scheme.name(), crate::config::fmt12(s2));
    }
    let c = survival_estimate(&run.samples, &tg)?;
    let se = c.se.clone().unwrap_or_default();
    Ok(csv(&["t", "p", "se"], c.t.iter().zip(&c.p).zip(&se).map(|((&t, &p), &s)| vec![Cell::Num(t), Cell::Num(p), Cell::Num(s)])))
}
