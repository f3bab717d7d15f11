use crate::error::{LevyError, Result};
use crate::scalar::Real;

/// Samples of a function on strictly increasing nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    nodes: Vec<T>,
    values: Vec<T>,
    spacing: T,
}

impl<T: Real> GridFunction<T> {
    pub fn new(nodes: Vec<T>, values: Vec<T>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(LevyError::InvalidGrid(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.len() < 2 {
            return Err(LevyError::GridTooSmall { need: 2, got: nodes.len() });
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LevyError::InvalidGrid("nodes must be strictly increasing".into()));
        }
        let n = nodes.len();
        let spacing = (nodes[n - 1] - nodes[0]) / T::from_usize_lossy(n - 1);
        Ok(Self { nodes, values, spacing })
    }

    /// `n` equispaced nodes on `[a, b]` sampled from `f`.
    pub fn from_fn<F: FnMut(T) -> T>(a: T, b: T, n: usize, mut f: F) -> Result<Self> {
        if n < 2 {
            return Err(LevyError::GridTooSmall { need: 2, got: n });
        }
        if !(b > a) {
            return Err(LevyError::InvalidGrid(format!("empty range [{a}, {b}]")));
        }
        let h = (b - a) / T::from_usize_lossy(n - 1);
        let nodes: Vec<T> = (0..n)
            .map(|i| if i + 1 == n { b } else { a + h * T::from_usize_lossy(i) })
            .collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Ok(Self { nodes, values, spacing: h })
    }

    pub fn zeros(a: T, b: T, n: usize) -> Result<Self> {
        Self::from_fn(a, b, n, |_| T::zero())
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

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Same nodes, new values.
    pub fn with_values(&self, values: Vec<T>) -> Self {
        assert_eq!(values.len(), self.nodes.len());
        Self { nodes: self.nodes.clone(), values, spacing: self.spacing }
    }

    /// True when node spacing deviates from the nominal step by at most `rel_tol`.
    pub fn is_uniform(&self, rel_tol: T) -> bool {
        self.nodes.windows(2).all(|w| ((w[1] - w[0]) - self.spacing).abs() <= rel_tol * self.spacing)
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Sup-norm of the difference with another function on the same nodes.
    pub fn sup_distance(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len());
        self.values.iter().zip(&other.values).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// Trapezoid rule over the nodes.
    pub fn integrate(&self) -> T {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| (x[1] - x[0]) * (v[0] + v[1]) * T::lit(0.5))
            .sum()
    }

    /// Piecewise-linear interpolation, zero outside the node range.
    pub fn interpolate(&self, x: T) -> T {
        let n = self.len();
        if x < self.nodes[0] || x > self.nodes[n - 1] {
            return T::zero();
        }
        let idx = match self.nodes.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.nodes[idx - 1], self.nodes[idx]);
        let t = (x - x0) / (x1 - x0);
        self.values[idx - 1] * (T::one() - t) + self.values[idx] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(GridFunction::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(GridFunction::<f64>::from_fn(1.0, 0.0, 5, |x| x).is_err());
    }

    #[test]
    fn trapezoid_and_interpolation() {
        let f = GridFunction::from_fn(0.0f64, 1.0, 101, |x| x * x).unwrap();
        assert!((f.integrate() - 1.0 / 3.0).abs() < 2e-5);
        assert!((f.interpolate(0.505) - 0.505f64.powi(2)).abs() < 1e-4);
        assert_eq!(f.interpolate(2.0), 0.0);
        assert!(f.is_uniform(1e-9));
    }
}
