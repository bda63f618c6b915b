//! Dense symmetric helpers: Cholesky with pivot diagnostics, triangular
//! solves, and symmetric eigen-decompositions (via nalgebra).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix given by `entry(i, j)` for `j <= i`.
    pub fn factor(n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let (row_i, row_j) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let v = entry(i, j) - dot;
                if i == j {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: v });
                    }
                    l[i * n + i] = v.sqrt();
                } else {
                    l[i * n + j] = v / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    /// Factors a dense row-major symmetric matrix.
    pub fn from_dense(n: usize, a: &[f64]) -> Result<Self> {
        Self::factor(n, |i, j| a[i * n + j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// `ln det A = 2 Σ ln L_ii`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// `out = L z`.
    pub fn mul_lower(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = self.l[i * n..i * n + i + 1]
                .iter()
                .zip(z)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let dot: f64 = self.l[i * n..i * n + i]
                .iter()
                .zip(&b[..i])
                .map(|(a, x)| a * x)
                .sum();
            b[i] = (b[i] - dot) / self.l[i * n + i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for (k, bk) in b.iter().enumerate().skip(i + 1) {
                s -= self.l[k * n + i] * bk;
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// Quadratic form `bᵀ A⁻¹ b = ‖L⁻¹ b‖²`.
    pub fn inverse_quadratic_form(&self, b: &[f64]) -> f64 {
        let mut y = b.to_vec();
        self.solve_lower_in_place(&mut y);
        y.iter().map(|v| v * v).sum()
    }
}

/// Ascending eigenvalues of a dense row-major symmetric matrix.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, a);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Principal square root of a symmetric positive semidefinite matrix.
/// Eigenvalues below `-tolerance` are reported as indefinite; tiny negative
/// ones are rounded to zero.
pub fn symmetric_sqrt(n: usize, a: &[f64], tolerance: f64) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, a));
    if let Some(v) = eig.eigenvalues.iter().find(|v| **v < -tolerance) {
        return Err(Error::IndefiniteCovariance(*v));
    }
    let q = &eig.eigenvectors;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n)
                .map(|k| q[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt() * q[(j, k)])
                .sum();
        }
    }
    Ok(out)
}

pub fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}
