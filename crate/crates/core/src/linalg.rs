//! Small dense linear algebra: LU with partial pivoting, Householder
//! Hessenberg reduction with fast shifted solves, and 2-norm estimates.

use std::ops::{Index, IndexMut};

use crate::error::{LevyError, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ x`
    pub fn matvec_transposed(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (yj, &a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
        y
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `PA = LU` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    norm_1: T,
}

impl<T: Real> Lu<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows();
        let norm_1 = a.norm_1();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return Err(LevyError::Singular { condition: f64::INFINITY });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
            }
            let pivot = lu[(k, k)];
            let (upper, lower) = lu.data.split_at_mut((k + 1) * n);
            let krow = &upper[k * n..(k + 1) * n];
            for i in 0..n - k - 1 {
                let row = &mut lower[i * n..(i + 1) * n];
                let m = row[k] / pivot;
                row[k] = m;
                if m != T::zero() {
                    for j in k + 1..n {
                        row[j] -= m * krow[j];
                    }
                }
            }
        }
        Ok(Self { lu, perm, norm_1 })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transposed(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // Uᵀ z = b
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * z[j];
            }
            z[i] = s / self.lu[(i, i)];
        }
        // Lᵀ w = z
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)] * z[j];
            }
            z[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.solve(&e);
            e[j] = T::zero();
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }

    /// 1-norm condition number computed from an explicit inverse.
    pub fn condition_1(&self) -> T {
        self.norm_1 * self.inverse().norm_1()
    }
}

/// Inverse with a condition check: fails when `cond₁(A) > max_condition`.
pub fn checked_inverse<T: Real>(a: &Matrix<T>, max_condition: T) -> Result<(Matrix<T>, T)> {
    let lu = Lu::factor(a)?;
    let inv = lu.inverse();
    let cond = a.norm_1() * inv.norm_1();
    if !cond.is_finite() || cond > max_condition {
        return Err(LevyError::Singular { condition: cond.as_f64() });
    }
    Ok((inv, cond))
}

/// Householder reduction `M = Q H Qᵀ` with `H` upper Hessenberg. Solves of
/// `(I + sM) x = b` then cost O(n²) per shift.
#[derive(Clone, Debug)]
pub struct Hessenberg<T> {
    h: Matrix<T>,
    q: Matrix<T>,
}

impl<T: Real> Hessenberg<T> {
    pub fn reduce(m: &Matrix<T>) -> Self {
        assert!(m.is_square());
        let n = m.rows();
        let mut h = m.clone();
        let mut q = Matrix::identity(n);
        let mut v = vec![T::zero(); n];
        for k in 0..n.saturating_sub(2) {
            let alpha_sq: T = (k + 1..n).map(|i| h[(i, k)] * h[(i, k)]).sum();
            if alpha_sq == T::zero() {
                continue;
            }
            let x0 = h[(k + 1, k)];
            let alpha = if x0 >= T::zero() { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
            for i in 0..n {
                v[i] = T::zero();
            }
            v[k + 1] = x0 - alpha;
            for i in k + 2..n {
                v[i] = h[(i, k)];
            }
            let vnorm_sq: T = (k + 1..n).map(|i| v[i] * v[i]).sum();
            if vnorm_sq == T::zero() {
                continue;
            }
            let beta = T::lit(2.0) / vnorm_sq;
            // H <- (I - beta v vᵀ) H
            for j in 0..n {
                let s: T = (k + 1..n).map(|i| v[i] * h[(i, j)]).sum();
                let s = s * beta;
                for i in k + 1..n {
                    h[(i, j)] -= s * v[i];
                }
            }
            // H <- H (I - beta v vᵀ); Q <- Q (I - beta v vᵀ)
            for i in 0..n {
                let s: T = (k + 1..n).map(|j| h[(i, j)] * v[j]).sum::<T>() * beta;
                for j in k + 1..n {
                    h[(i, j)] -= s * v[j];
                }
                let s: T = (k + 1..n).map(|j| q[(i, j)] * v[j]).sum::<T>() * beta;
                for j in k + 1..n {
                    q[(i, j)] -= s * v[j];
                }
            }
            for i in k + 2..n {
                h[(i, k)] = T::zero();
            }
        }
        Self { h, q }
    }

    pub fn h(&self) -> &Matrix<T> {
        &self.h
    }

    pub fn q(&self) -> &Matrix<T> {
        &self.q
    }

    /// Solves `(I + s M) x = b`.
    pub fn solve_shifted(&self, s: T, b: &[T]) -> Result<Vec<T>> {
        let n = self.h.rows();
        let rhs = self.q.matvec_transposed(b);
        let mut a = Matrix::from_fn(n, n, |i, j| {
            let d = if i == j { T::one() } else { T::zero() };
            if j + 1 >= i {
                d + s * self.h[(i, j)]
            } else {
                T::zero()
            }
        });
        let mut y = rhs;
        // Gaussian elimination on an upper Hessenberg matrix: only the
        // subdiagonal needs eliminating, pivoting between adjacent rows.
        for k in 0..n {
            if k + 1 < n && a[(k + 1, k)].abs() > a[(k, k)].abs() {
                for j in k..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(k + 1, j)];
                    a[(k + 1, j)] = t;
                }
                y.swap(k, k + 1);
            }
            let p = a[(k, k)];
            if p == T::zero() || !p.is_finite() {
                return Err(LevyError::Singular { condition: f64::INFINITY });
            }
            if k + 1 < n {
                let m = a[(k + 1, k)] / p;
                if m != T::zero() {
                    for j in k..n {
                        let v = a[(k, j)];
                        a[(k + 1, j)] -= m * v;
                    }
                    let yk = y[k];
                    y[k + 1] -= m * yk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= a[(i, j)] * y[j];
            }
            y[i] = acc / a[(i, i)];
        }
        Ok(self.q.matvec(&y))
    }
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn spectral_norm<T: Real>(m: &Matrix<T>, iterations: usize) -> T {
    let n = m.cols();
    if n == 0 {
        return T::zero();
    }
    let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(0.01) * T::from_usize_lossy(i % 7)).collect();
    let mut sigma = T::zero();
    for _ in 0..iterations {
        let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        for v in x.iter_mut() {
            *v /= norm;
        }
        let y = m.matvec(&x);
        let z = m.matvec_transposed(&y);
        let next = z.iter().map(|v| *v * *v).sum::<T>().sqrt().sqrt();
        let converged = (next - sigma).abs() <= T::lit(1e-12) * next;
        sigma = next;
        x = z;
        if converged {
            break;
        }
    }
    sigma
}

/// 2-norm condition number `σ_max / σ_min` by power and inverse power
/// iteration.
pub fn condition_2<T: Real>(m: &Matrix<T>, iterations: usize) -> Result<T> {
    let lu = Lu::factor(m)?;
    let n = m.cols();
    let smax = spectral_norm(m, iterations);
    let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(0.01) * T::from_usize_lossy(i % 5)).collect();
    let mut inv_norm = T::zero();
    for _ in 0..iterations {
        let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
        for v in x.iter_mut() {
            *v /= norm;
        }
        let y = lu.solve(&x);
        let z = lu.solve_transposed(&y);
        let next = z.iter().map(|v| *v * *v).sum::<T>().sqrt().sqrt();
        let converged = (next - inv_norm).abs() <= T::lit(1e-12) * next;
        inv_norm = next;
        x = z;
        if converged {
            break;
        }
    }
    Ok(smax * inv_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| {
            let d = (i as f64 - j as f64).abs();
            if i == j {
                4.0 + i as f64 * 0.1
            } else {
                1.0 / (1.0 + d) * if j > i { 1.0 } else { -0.5 }
            }
        })
    }

    #[test]
    fn lu_inverse_round_trip() {
        let a = test_matrix(12);
        let lu = Lu::factor(&a).unwrap();
        let inv = lu.inverse();
        let prod = a.matmul(&inv);
        let err = prod.add(&Matrix::identity(12).scale(-1.0)).max_abs();
        assert!(err < 1e-13, "{err}");
        let b: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let x = lu.solve_transposed(&b);
        let r = a.matvec_transposed(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Matrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(checked_inverse(&a, 1e12), Err(LevyError::Singular { .. })));
    }

    #[test]
    fn hessenberg_shifted_solve_matches_lu() {
        let m = test_matrix(15);
        let hess = Hessenberg::reduce(&m);
        let back = hess.q().matmul(hess.h()).matmul(&hess.q().transpose());
        assert!(back.add(&m.scale(-1.0)).max_abs() < 1e-12);
        let b: Vec<f64> = (0..15).map(|i| 1.0 + i as f64).collect();
        for &s in &[0.0, 0.3, 7.0] {
            let x = hess.solve_shifted(s, &b).unwrap();
            let a = Matrix::identity(15).add(&m.scale(s));
            let y = Lu::factor(&a).unwrap().solve(&b);
            for (u, v) in x.iter().zip(&y) {
                assert!((u - v).abs() < 1e-11 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn condition_of_diagonal() {
        let m = Matrix::from_fn(4, 4, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let c = condition_2(&m, 500).unwrap();
        assert!((c - 4.0).abs() < 1e-6, "{c}");
    }
}
