//! Small dense linear algebra used by the least-squares fits.
//!
//! Everything here is sized for the problems in this crate: normal equations
//! of at most a few dozen unknowns. Storage is row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self * x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cholesky factor `L` of a symmetric positive definite matrix, `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors `a`. Fails when a pivot is not positive or when the condition
    /// estimate (squared ratio of the extreme pivots) exceeds `1e14`.
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::precondition("Cholesky needs a square matrix"));
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::numerical(
                    format!("matrix is not positive definite (pivot {j} = {d:.3e})"),
                    f64::INFINITY,
                ));
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        let chol = Self { l };
        let cond = chol.condition_estimate();
        if cond > 1e14 {
            return Err(Error::numerical("normal equations are singular", cond));
        }
        Ok(chol)
    }

    /// Cheap condition estimate: `(max pivot / min pivot)²`.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.l.rows();
        if n == 0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = self.l[(i, i)];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (hi / lo).powi(2)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }
}

/// Accumulates `AᵀA` and `Aᵀb` one design row at a time.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    ata: Matrix,
    atb: Matrix,
}

impl NormalEquations {
    pub fn new(unknowns: usize, rhs: usize) -> Self {
        Self {
            ata: Matrix::zeros(unknowns, unknowns),
            atb: Matrix::zeros(unknowns, rhs),
        }
    }

    pub fn add_row(&mut self, row: &[f64], target: &[f64], weight: f64) {
        let n = self.ata.rows();
        for i in 0..n {
            let wi = weight * row[i];
            if wi == 0.0 {
                continue;
            }
            for j in i..n {
                self.ata[(i, j)] += wi * row[j];
            }
            for (k, t) in target.iter().enumerate() {
                self.atb[(i, k)] += wi * t;
            }
        }
    }

    /// Solves with a ridge of `ridge_scale · trace(AᵀA)/n` on the diagonal.
    /// Column `k` of the result is the solution for right-hand side `k`.
    pub fn solve(&self, ridge_scale: f64) -> Result<Matrix> {
        let n = self.ata.rows();
        let mut a = self.ata.clone();
        for i in 0..n {
            for j in 0..i {
                a[(i, j)] = a[(j, i)];
            }
        }
        let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
        let ridge = ridge_scale * trace / n.max(1) as f64;
        for i in 0..n {
            a[(i, i)] += ridge;
        }
        let chol = Cholesky::new(&a)?;
        let mut out = Matrix::zeros(n, self.atb.cols());
        for k in 0..self.atb.cols() {
            let b: Vec<f64> = (0..n).map(|i| self.atb[(i, k)]).collect();
            for (i, v) in chol.solve(&b).into_iter().enumerate() {
                out[(i, k)] = v;
            }
        }
        Ok(out)
    }
}

/// Least-squares solution of `A x ≈ b` by Householder QR.
///
/// Better conditioned than the normal equations when the columns of `A` are
/// nearly dependent. Fails when the condition estimate `max|r_ii| / min|r_ii|`
/// exceeds `1e12`.
pub fn least_squares_qr(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n || b.len() != m {
        return Err(Error::precondition("least squares needs rows >= cols and a matching rhs"));
    }
    let mut r = a.clone();
    let mut y = b.to_vec();
    for j in 0..n {
        let norm = (j..m).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::numerical("design matrix has a zero column", f64::INFINITY));
        }
        let alpha = if r[(j, j)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| r[(i, j)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for k in j..n {
                let s: f64 = (j..m).map(|i| v[i - j] * r[(i, k)]).sum::<f64>() * 2.0 / vnorm2;
                for i in j..m {
                    r[(i, k)] -= s * v[i - j];
                }
            }
            let s: f64 = (j..m).map(|i| v[i - j] * y[i]).sum::<f64>() * 2.0 / vnorm2;
            for i in j..m {
                y[i] -= s * v[i - j];
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| r[(i, i)].abs()).collect();
    let hi = diag.iter().cloned().fold(0.0, f64::max);
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond <= 1e12) {
        return Err(Error::numerical("least-squares design is singular", cond));
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| r[(i, k)] * x[k]).sum();
        x[i] = (y[i] - s) / r[(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Matrix::from_rows(&[
            vec![4.0, 2.0, 0.6],
            vec![2.0, 5.0, 1.0],
            vec![0.6, 1.0, 3.0],
        ]);
        let x = vec![1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let got = Cholesky::new(&a).unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn qr_recovers_overdetermined_fit() {
        let a = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 3.0],
        ]);
        let b = [1.0, 3.0, 5.0, 7.0];
        let x = least_squares_qr(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(Cholesky::new(&a), Err(Error::Numerical { .. })));
    }
}
