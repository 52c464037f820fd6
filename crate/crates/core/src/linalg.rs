//! Small dense linear algebra over any [`Scalar`], plus a few `nalgebra`
//! helpers for the floating-point paths.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    /// Bilinear form uᵀ·M·v.
    pub fn bilinear(&self, u: &[S], v: &[S]) -> S {
        let mv = self.mul_vec(v);
        u.iter()
            .zip(&mv)
            .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    /// Solves M·x = b by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        if self.rows != self.cols || b.len() != self.rows {
            return Err(Error::InvalidArgument("solve needs a square system".into()));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[i * n + col]
                        .magnitude()
                        .partial_cmp(&a[j * n + col].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("non-empty range");
            if a[pivot * n + col].is_zero() || a[pivot * n + col].magnitude() < 1e-300 {
                return Err(Error::Numerical(format!("singular system at column {col}")));
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                rhs.swap(pivot, col);
            }
            let p = a[col * n + col].clone();
            for i in col + 1..n {
                let factor = a[i * n + col].clone() / p.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j].clone();
                    a[i * n + j] = a[i * n + j].clone() - factor.clone() * v;
                }
                let r = rhs[col].clone();
                rhs[i] = rhs[i].clone() - factor * r;
            }
        }
        let mut x = vec![S::zero(); n];
        for i in (0..n).rev() {
            let mut acc = rhs[i].clone();
            for j in i + 1..n {
                acc = acc - a[i * n + j].clone() * x[j].clone();
            }
            x[i] = acc / a[i * n + i].clone();
        }
        Ok(x)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_float())
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of the symmetric part of `m`, eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0.first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0.last().copied().unwrap_or(0.0)
}

/// Projection onto the PSD cone in Frobenius norm by clipping eigenvalues.
pub fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (k, &lambda) in values.iter().enumerate() {
        if lambda > 0.0 {
            let v = vectors.column(k);
            out += lambda * v * v.transpose();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, Rational};

    #[test]
    fn exact_solve() {
        let m = Matrix::from_fn(3, 3, |i, j| rational(((i + 1) * (j + 2) + usize::from(i == j) * 5) as i64, 1));
        let x_true = vec![rational(1, 3), rational(-2, 7), rational(5, 1)];
        let b = m.mul_vec(&x_true);
        assert_eq!(m.solve(&b).unwrap(), x_true);
    }

    #[test]
    fn singular_is_reported() {
        let m: Matrix<Rational> = Matrix::from_fn(2, 2, |_, _| rational(1, 1));
        assert!(m.solve(&[rational(1, 1), rational(2, 1)]).is_err());
    }

    #[test]
    fn psd_projection_clips() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -2.0]);
        let p = project_psd(&m);
        assert!((p[(0, 0)] - 1.0).abs() < 1e-14 && p[(1, 1)].abs() < 1e-14);
    }
}
