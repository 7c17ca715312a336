//! Dense real linear algebra at desk scale: a cyclic Jacobi eigensolver and
//! the PSD-cone operations built on it.

use std::ops::Mul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    NonConvergence { sweeps: usize, off: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix must have at least one row")]
    Empty,
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(NumError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, NumError> {
        if self.cols != other.rows {
            return Err(NumError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(&self.mul_vec(v), v)
    }

    pub fn add_scaled(&mut self, other: &Matrix, s: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shape");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    /// Panics on a shape mismatch.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("matrix shape mismatch")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Dense symmetric matrix; every write updates both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    inner: Matrix,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        Self { inner: Matrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Matrix::identity(n) }
    }

    pub fn diag(values: &[f64]) -> Self {
        Self { inner: Matrix::diag(values) }
    }

    /// Requires exact symmetry.
    pub fn from_matrix(m: Matrix) -> Result<Self, NumError> {
        if !m.is_square() {
            return Err(NumError::DimensionMismatch("symmetric matrix must be square".into()));
        }
        if !m.is_symmetric() {
            return Err(NumError::NotSymmetric);
        }
        Ok(Self { inner: m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumError> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetrize(m: &Matrix) -> Self {
        assert!(m.is_square(), "symmetrize needs a square matrix");
        let n = m.rows();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, 0.5 * (m.get(i, j) + m.get(j, i)));
            }
        }
        Self { inner: out }
    }

    /// Symmetrizes `m` after checking `|m_ij - m_ji| <= tol * max(1, max|m|)`.
    pub fn from_nearly_symmetric(m: &Matrix, tol: f64) -> Result<Self, NumError> {
        if !m.is_square() {
            return Err(NumError::DimensionMismatch("symmetric matrix must be square".into()));
        }
        let scale = m.as_slice().iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let n = m.rows();
        for i in 0..n {
            for j in 0..i {
                if (m.get(i, j) - m.get(j, i)).abs() > tol * scale {
                    return Err(NumError::NotSymmetric);
                }
            }
        }
        Ok(Self::symmetrize(m))
    }

    pub fn n(&self) -> usize {
        self.inner.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.inner.set(i, j, v);
        self.inner.set(j, i, v);
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        let x = self.get(i, j) + v;
        self.set(i, j, x);
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix {
        self.inner
    }

    pub fn frobenius(&self) -> f64 {
        self.inner.frobenius()
    }

    pub fn sub(&self, other: &SymMat) -> SymMat {
        SymMat { inner: self.inner.sub(&other.inner) }
    }

    pub fn add(&self, other: &SymMat) -> SymMat {
        let mut inner = self.inner.clone();
        inner.add_scaled(&other.inner, 1.0);
        SymMat { inner }
    }
}

/// Eigenvalues in descending order with the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

impl SymEigen {
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    /// `Q diag(λ) Qᵀ` with `λ` replaced by `f(λ)`.
    pub fn recompose(&self, f: impl Fn(f64) -> f64) -> SymMat {
        let n = self.values.len();
        let mut out = SymMat::zeros(n);
        let lam: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for (k, l) in lam.iter().enumerate() {
                    if *l != 0.0 {
                        s += self.vectors.get(i, k) * l * self.vectors.get(j, k);
                    }
                }
                out.set(i, j, s);
            }
        }
        out
    }
}

/// Cyclic Jacobi; stops once every off-diagonal entry is at most
/// `tol * ‖S‖_F`.
pub fn sym_eigen(s: &SymMat, tol: f64) -> Result<SymEigen, NumError> {
    let n = s.n();
    if n == 0 {
        return Err(NumError::Empty);
    }
    if !s.as_matrix().is_finite() {
        return Err(NumError::NonFinite);
    }
    let mut a = s.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let threshold = tol * s.frobenius();

    let max_off = |a: &Matrix| {
        let mut m = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                m = m.max(a.get(i, j).abs());
            }
        }
        m
    };

    let mut sweeps = 0;
    loop {
        let off = max_off(&a);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(NumError::NonConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn, t * apq);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let values = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, dst, v.get(i, src));
        }
    }
    Ok(SymEigen { values, vectors, sweeps })
}

/// Applies the rotation `Jᵀ A J` in the `(p, q)` plane, zeroing `a[p][q]`,
/// and accumulates `V J`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64, shift: f64) {
    let n = a.rows();
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    a.set(p, p, app - shift);
    a.set(q, q, aqq + shift);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        a.set(k, p, np);
        a.set(p, k, np);
        a.set(k, q, nq);
        a.set(q, k, nq);
    }
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
pub fn psd_project(s: &SymMat) -> Result<SymMat, NumError> {
    psd_project_with_eigen(s).map(|(p, _)| p)
}

/// Like [`psd_project`] but also returns the decomposition of the input.
pub fn psd_project_with_eigen(s: &SymMat) -> Result<(SymMat, SymEigen), NumError> {
    let e = sym_eigen(s, DEFAULT_EIGEN_TOL)?;
    let projected = if e.min() >= 0.0 { s.clone() } else { e.recompose(|l| l.max(0.0)) };
    Ok((projected, e))
}

/// Spectral norm, `sqrt(λ_max(MᵀM))`.
pub fn opnorm2(m: &Matrix) -> Result<f64, NumError> {
    if !m.is_finite() {
        return Err(NumError::NonFinite);
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    let gram = SymMat::symmetrize(&(&m.transpose() * m));
    let e = sym_eigen(&gram, DEFAULT_EIGEN_TOL)?;
    Ok(e.max().max(0.0).sqrt())
}

/// `L` with columns `sqrt(λ_i) q_i` over eigenvalues above `tol`, so that
/// `S ≈ L Lᵀ`.
pub fn factor_psd(s: &SymMat, tol: f64) -> Result<Matrix, NumError> {
    let e = sym_eigen(s, DEFAULT_EIGEN_TOL)?;
    if e.min() < -tol {
        return Err(NumError::NotPsd { min_eigenvalue: e.min() });
    }
    let n = s.n();
    let keep: Vec<usize> = (0..n).filter(|&k| e.values[k] > tol).collect();
    let mut l = Matrix::zeros(n, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        let r = e.values[k].sqrt();
        for i in 0..n {
            l.set(i, col, r * e.vectors.get(i, k));
        }
    }
    Ok(l)
}
