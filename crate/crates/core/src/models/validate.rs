//! Admissibility report for a triplet: integrability of the Lévy measure
//! and the small-jump limits that the convolution form relies on.

use serde::Serialize;

use super::tables::SideTable;
use super::{LevyMeasure, LevyTriplet, Side, Tail};
use crate::quad::{adaptive, Tolerance};

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationEntry {
    pub name: String,
    pub pass: bool,
    pub witness: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationReport {
    pub model: String,
    /// `diffusion`, `finite_mass`, `uncompensated` (index below 1) or
    /// `compensated` (index in `[1, 2)`).
    pub branch: String,
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&ValidationEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn entry(name: &str, pass: bool, witness: f64, detail: impl Into<String>) -> ValidationEntry {
    ValidationEntry { name: name.to_string(), pass, witness, detail: detail.into() }
}

/// Decay exponent of `g` at the origin from samples at 1e-4 and 1e-8.
fn decay(g: impl Fn(f64) -> f64) -> (f64, f64) {
    let a = g(1e-4).abs();
    let b = g(1e-8).abs();
    let p = if b == 0.0 { f64::INFINITY } else { (a / b).ln() / 1e4f64.ln() };
    (b, p)
}

/// `∫ x²/(1+x²) ν'(x) dx` over one half-line.
fn integrability(measure: &LevyMeasure, side: Side) -> f64 {
    let tol = Tolerance::new(1e-14, 1e-10);
    let f = |r: f64| r * r / (1.0 + r * r) * measure.side_density(side, r);
    let mut total = 0.0;
    let mut hi = 1.0;
    for _ in 0..80 {
        let lo = 0.5 * hi;
        total += adaptive(f, lo, hi, tol).map(|e| e.value).unwrap_or(f64::INFINITY);
        hi = lo;
    }
    let (end, rest) = match measure.tail(side) {
        Tail::Cutoff(x) => (x.max(1.0), 0.0),
        Tail::Power { coef, exponent, .. } => {
            let x: f64 = 1e6;
            (x, coef * x.powf(1.0 - exponent) / (exponent - 1.0))
        }
    };
    let mut lo = 1.0;
    while lo < end {
        let hi = (2.0 * lo).min(end);
        total += adaptive(f, lo, hi, tol).map(|e| e.value).unwrap_or(f64::INFINITY);
        lo = hi;
    }
    total + rest
}

/// `k₀` on one side without building a kernel: the uncompensated form for
/// index below 1, the tail form otherwise.
fn side_kernel(table: &SideTable, r: f64) -> f64 {
    let t = table.tail_mass(r);
    if let Some(m1) = table.inner_first_moment(r) {
        -(r * t + m1)
    } else if let Some(u1) = table.outer_first_moment(r) {
        u1 - r * t
    } else {
        table.tail_mass(1.0) - r * t - table.first_moment_from_one(r)
    }
}

pub fn validate_triplet(triplet: &LevyTriplet) -> ValidationReport {
    let model = triplet.measure.name().to_string();
    let mut entries = Vec::new();
    match triplet.check() {
        Ok(()) => entries.push(entry("parameters", true, 0.0, "parameters admissible")),
        Err(e) => {
            entries.push(entry("parameters", false, f64::NAN, e.to_string()));
            return ValidationReport { model, branch: "invalid".into(), entries };
        }
    }
    let measure = &triplet.measure;
    if let LevyMeasure::PureDiffusion = measure {
        return ValidationReport { model, branch: "diffusion".into(), entries };
    }
    if let LevyMeasure::CompoundPoisson(cp) = measure {
        let m = cp.mass();
        entries.push(entry("finite_mass", m.is_finite() && m > 0.0, m, "total jump intensity"));
        return ValidationReport { model, branch: "finite_mass".into(), entries };
    }

    let alpha = measure.singularity_index().unwrap_or(0.0);
    let integ = integrability(measure, Side::Left) + integrability(measure, Side::Right);
    entries.push(entry("levy_integrability", integ.is_finite(), integ, "integral of x^2/(1+x^2) nu'(x)"));

    let in_range = (0.0..2.0).contains(&alpha);
    entries.push(entry("singularity_index", in_range, alpha, "declared small-jump index must lie in [0,2)"));
    if let LevyMeasure::Custom(cm) = measure {
        let in_open = cm.alpha > 0.0 && cm.alpha < 2.0;
        let mut worst: f64 = 0.0;
        for k in 0..400 {
            let r = 10f64.powf(-8.0 + 10.0 * k as f64 / 399.0);
            if r > cm.cutoff {
                break;
            }
            for side in Side::BOTH {
                let v = measure.side_density(side, r) * r.powf(cm.alpha + 1.0);
                worst = worst.max(v);
            }
        }
        entries.push(entry(
            "envelope",
            in_open && worst <= cm.envelope * (1.0 + 1e-12),
            worst,
            format!("sup nu'(y)|y|^(alpha+1) against declared constant {}", cm.envelope),
        ));
    }
    if !in_range {
        return ValidationReport { model, branch: "invalid".into(), entries };
    }

    let tables = match (SideTable::build(measure, Side::Left), SideTable::build(measure, Side::Right)) {
        (Ok(l), Ok(r)) => [l, r],
        (Err(e), _) | (_, Err(e)) => {
            entries.push(entry("tables", false, f64::NAN, e.to_string()));
            return ValidationReport { model, branch: "invalid".into(), entries };
        }
    };
    let branch = if alpha < 1.0 { "uncompensated" } else { "compensated" };
    for (side, table) in Side::BOTH.iter().zip(tables.iter()) {
        let tag = if *side == Side::Left { "left" } else { "right" };
        if alpha < 1.0 {
            let (v, p) = decay(|r| r * table.tail_mass(r));
            entries.push(entry(&format!("x_nu_limit_{tag}"), p > 1e-3, v, format!("x nu(x) -> 0, decay exponent {p:.4}")));
            let m1 = table.inner_first_moment(1.0).unwrap_or(f64::INFINITY);
            entries.push(entry(&format!("first_moment_{tag}"), m1.is_finite(), m1, "integral of |x| nu'(x) near 0"));
        } else {
            let (v, p) = decay(|r| r * side_kernel(table, r));
            entries.push(entry(&format!("x_k_limit_{tag}"), p > 1e-3, v, format!("x k(x) -> 0, decay exponent {p:.4}")));
            let (v, p) = decay(|r| r * r * table.tail_mass(r));
            entries.push(entry(&format!("x2_nu_limit_{tag}"), p > 1e-3, v, format!("x^2 nu(x) -> 0, decay exponent {p:.4}")));
        }
    }
    ValidationReport { model, branch: branch.into(), entries }
}
