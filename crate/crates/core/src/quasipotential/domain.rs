use std::str::FromStr;

use crate::error::{LevyError, Result};

/// Finite union of closed intervals `[a₁,b₁] ∪ … ∪ [aₙ,bₙ]`,
/// `a₁ < b₁ < a₂ < … < bₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainDelta {
    intervals: Vec<(f64, f64)>,
}

impl DomainDelta {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(LevyError::InvalidDomain("domain needs at least one interval".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite()) {
                return Err(LevyError::InvalidDomain(format!("interval [{a},{b}] is not finite")));
            }
            if !(a > prev && b > a) {
                return Err(LevyError::InvalidDomain(format!("intervals must satisfy a1<b1<a2<...<bn, got [{a},{b}] after {prev}")));
            }
            prev = b;
        }
        Ok(Self { intervals })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Closed-domain membership.
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Open-domain membership.
    pub fn contains_interior(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < x && x < b)
    }

    pub fn indicator(&self, x: f64) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }

    /// Penalty potential `V = 1 − 1_Δ`.
    pub fn complement(&self, x: f64) -> f64 {
        1.0 - self.indicator(x)
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.intervals[0].0, self.intervals[self.intervals.len() - 1].1)
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self { intervals: self.intervals.iter().map(|&(a, b)| (a + delta, b + delta)).collect() }
    }
}

impl FromStr for DomainDelta {
    type Err = LevyError;

    /// `"a,b;c,d"`
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let ends: Vec<&str> = part.split(',').map(str::trim).collect();
            if ends.len() != 2 {
                return Err(LevyError::InvalidDomain(format!("expected \"a,b\", got \"{part}\"")));
            }
            let parse = |t: &str| t.parse::<f64>().map_err(|e| LevyError::InvalidDomain(format!("bad endpoint \"{t}\": {e}")));
            out.push((parse(ends[0])?, parse(ends[1])?));
        }
        Self::new(out)
    }
}

#[derive(Clone, Debug)]
pub struct IntervalGrid {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    /// Global index of the node at `a`.
    pub first: usize,
    pub cells: usize,
}

/// Uniform nodes on each interval, endpoints included, with trapezoid
/// weights.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub domain: DomainDelta,
    pub pieces: Vec<IntervalGrid>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Index into `nodes` of each interior node, in order.
    pub interior: Vec<usize>,
}

impl QuadratureGrid {
    /// A single interval gets exactly `n` nodes; longer or shorter intervals
    /// get a proportional number of cells at about the same spacing.
    pub fn new(domain: &DomainDelta, n: usize) -> Result<Self> {
        let k = domain.intervals().len();
        if n < 9 {
            return Err(LevyError::GridTooSmall { need: 9, got: n });
        }
        let target = domain.total_length() / (n - 1) as f64 * k as f64;
        let counts: Vec<usize> = domain.intervals().iter().map(|&(a, b)| ((b - a) / target).round().max(1.0) as usize).collect();
        Self::with_cells(domain, &counts)
    }

    pub fn with_cells(domain: &DomainDelta, cells: &[usize]) -> Result<Self> {
        if cells.len() != domain.intervals().len() {
            return Err(LevyError::InvalidDomain("one cell count per interval required".into()));
        }
        if let Some(&c) = cells.iter().find(|&&c| c < 8) {
            return Err(LevyError::GridTooSmall { need: 9, got: c + 1 });
        }
        let mut pieces = Vec::new();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut interior = Vec::new();
        for (&(a, b), &m) in domain.intervals().iter().zip(cells) {
            let h = (b - a) / m as f64;
            let first = nodes.len();
            for j in 0..=m {
                nodes.push(if j == m { b } else { a + j as f64 * h });
                weights.push(if j == 0 || j == m { 0.5 * h } else { h });
                if j > 0 && j < m {
                    interior.push(first + j);
                }
            }
            pieces.push(IntervalGrid { a, b, h, first, cells: m });
        }
        Ok(Self { domain: domain.clone(), pieces, nodes, weights, interior })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same cell counts on the translated domain.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        let cells: Vec<usize> = self.pieces.iter().map(|p| p.cells).collect();
        Self::with_cells(&self.domain.shifted(delta), &cells)
    }

    /// `Σ wᵢ f(xᵢ)`
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Linear interpolation weights `(index, weight)` of `x` on the grid;
    /// `None` outside the domain.
    pub fn locate(&self, x: f64) -> Option<[(usize, f64); 2]> {
        let p = self.pieces.iter().find(|p| p.a <= x && x <= p.b)?;
        let t = (x - p.a) / p.h;
        let j = (t.floor() as usize).min(p.cells - 1);
        let f = t - j as f64;
        Some([(p.first + j, 1.0 - f), (p.first + j + 1, f)])
    }
}
