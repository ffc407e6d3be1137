//! Dense complex hermitian linear algebra.

use crate::error::{Error, Result};
use crate::rng::Stream;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::ops::Index;

pub const TOL_PSD: f64 = 1e-9;
pub const TOL_CHOL: f64 = 1e-10;
pub const TOL_EIG: f64 = 1e-9;

const EIGEN_MAX_SWEEPS: usize = 10_000;

pub type CMatrix = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// An exactly hermitian, numerically positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: CMatrix,
}

impl HermitianMatrix {
    /// Admits `raw` with [`TOL_PSD`].
    pub fn admit(raw: CMatrix) -> Result<Self> {
        admit_hermitian_psd(raw, TOL_PSD)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, rows.first().map_or(0, |r| r.len()));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m.ncols() {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = c(x);
            }
        }
        Self::admit(m)
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix { data: CMatrix::identity(n, n) }
    }

    pub fn all_ones(n: usize) -> Self {
        HermitianMatrix { data: CMatrix::from_element(n, n, c(1.0)) }
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = c(x);
        }
        Self::admit(m)
    }

    /// Rank-one matrix `v v†`.
    pub fn outer(v: &ComplexVector) -> Self {
        let n = v.dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
            m[(i, i)] = c(v[i].norm_sqr());
        }
        HermitianMatrix { data: m }
    }

    /// Wraps a matrix known to be PSD up to roundoff, forcing exact hermiticity.
    pub(crate) fn from_psd_unchecked(mut m: CMatrix) -> Self {
        force_hermitian(&mut m);
        HermitianMatrix { data: m }
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn max_norm(&self) -> f64 {
        max_norm(&self.data)
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.data[idx]
    }
}

fn force_hermitian(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = c(m[(i, i)].re);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Validates `raw` as hermitian PSD and returns its exact symmetrization.
pub fn admit_hermitian_psd(raw: CMatrix, tol_psd: f64) -> Result<HermitianMatrix> {
    let (rows, cols) = raw.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::Empty);
    }
    for i in 0..rows {
        for j in 0..cols {
            let z = raw[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    let allowed = tol_psd * max_norm(&raw).max(1.0);
    let mut worst = (0, 0, 0.0f64);
    for i in 0..rows {
        for j in i..cols {
            let asym = (raw[(i, j)] - raw[(j, i)].conj()).norm();
            if asym > worst.2 {
                worst = (i, j, asym);
            }
        }
    }
    if worst.2 > allowed {
        return Err(Error::NotHermitian { row: worst.0, col: worst.1, asymmetry: worst.2 });
    }
    let mut m = raw;
    force_hermitian(&mut m);

    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure)?;
    let (k_min, &lam_min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let lam_abs_max = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    if lam_min < -tol_psd * (1.0 + lam_abs_max) {
        let col = eig.eigenvectors.column(k_min);
        let index = (0..rows)
            .max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm()))
            .unwrap_or(0);
        return Err(Error::NotPsd { min_eigenvalue: lam_min, index });
    }
    for i in 0..rows {
        if m[(i, i)].re < -tol_psd {
            return Err(Error::NotPsd { min_eigenvalue: m[(i, i)].re, index: i });
        }
    }
    Ok(HermitianMatrix { data: m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(pub Vec<Complex64>);

impl ComplexVector {
    pub fn new(coords: Vec<Complex64>) -> Self {
        ComplexVector(coords)
    }

    pub fn from_real(coords: &[f64]) -> Self {
        ComplexVector(coords.iter().map(|&x| c(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// Pivoted factor `A = V†V` with `V` of shape `d × n`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub v: CMatrix,
    /// Row order in which pivots were chosen.
    pub pivots: Vec<usize>,
}

impl CholeskyFactor {
    pub fn rank(&self) -> usize {
        self.v.nrows()
    }

    pub fn n(&self) -> usize {
        self.v.ncols()
    }

    pub fn gram(&self) -> CMatrix {
        self.v.adjoint() * &self.v
    }
}

/// Outer-product Cholesky with diagonal pivoting; stops once every remaining
/// residual pivot is at most `tol_chol` times the largest diagonal entry.
pub fn cholesky_factor(a: &HermitianMatrix, tol_chol: f64) -> CholeskyFactor {
    let n = a.n();
    let mut r = a.as_matrix().clone();
    let first = a.diag().into_iter().fold(0.0f64, f64::max);
    let threshold = tol_chol * first;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    let mut pivots = Vec::new();
    let mut used = vec![false; n];
    while rows.len() < n {
        let (p, piv) = (0..n)
            .filter(|&i| !used[i])
            .map(|i| (i, r[(i, i)].re))
            .fold((usize::MAX, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if p == usize::MAX || piv <= threshold || piv <= 0.0 {
            break;
        }
        let s = piv.sqrt();
        let row: Vec<Complex64> = (0..n).map(|j| if used[j] { c(0.0) } else { r[(p, j)] / s }).collect();
        for i in 0..n {
            if used[i] || row[i] == c(0.0) {
                continue;
            }
            let ci = row[i].conj();
            for j in 0..n {
                if !used[j] {
                    r[(i, j)] -= ci * row[j];
                }
            }
        }
        used[p] = true;
        pivots.push(p);
        let mut row = row;
        row[p] = c(s);
        rows.push(row);
    }
    let d = rows.len();
    let v = CMatrix::from_fn(d, n, |k, j| rows[k][j]);
    CholeskyFactor { v, pivots }
}

/// Cholesky factor `M = L L†` of a hermitian positive definite matrix.
pub(crate) struct HpdCholesky {
    l: CMatrix,
}

impl HpdCholesky {
    /// `None` unless every pivot is strictly positive.
    pub(crate) fn new(m: &CMatrix) -> Option<Self> {
        let n = m.nrows();
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut pivot = m[(j, j)].re;
            for k in 0..j {
                pivot -= l[(j, k)].norm_sqr();
            }
            if !(pivot > 0.0 && pivot.is_finite()) {
                return None;
            }
            let root = pivot.sqrt();
            l[(j, j)] = c(root);
            for i in (j + 1)..n {
                let mut z = m[(i, j)];
                for k in 0..j {
                    z -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = z / root;
            }
        }
        Some(HpdCholesky { l })
    }

    pub(crate) fn log_det(&self) -> f64 {
        (0..self.l.nrows()).map(|k| 2.0 * self.l[(k, k)].re.ln()).sum()
    }

    /// `M^{-1} B`.
    pub(crate) fn solve(&self, b: &CMatrix) -> CMatrix {
        let n = self.l.nrows();
        let mut y = b.clone();
        for col in 0..y.ncols() {
            for i in 0..n {
                let mut z = y[(i, col)];
                for k in 0..i {
                    z -= self.l[(i, k)] * y[(k, col)];
                }
                y[(i, col)] = z / self.l[(i, i)].re;
            }
            for i in (0..n).rev() {
                let mut z = y[(i, col)];
                for k in (i + 1)..n {
                    z -= self.l[(k, i)].conj() * y[(k, col)];
                }
                y[(i, col)] = z / self.l[(i, i)].re;
            }
        }
        y
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn eigenvector(&self, k: usize) -> ComplexVector {
        ComplexVector(self.eigenvectors.column(k).iter().copied().collect())
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }
}

fn phase_normalize(col: &mut [Complex64]) {
    let scale = col.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if let Some(lead) = col.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let rot = lead.conj() / lead.norm();
        for z in col.iter_mut() {
            *z *= rot;
        }
    }
}

fn lexicographic_desc(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Eigendecomposition of a hermitian matrix with deterministic ordering.
pub fn eigh_matrix(m: &CMatrix) -> Result<Spectrum> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut cols: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&k| {
            let mut col: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
            phase_normalize(&mut col);
            col
        })
        .collect();

    // Tie-break inside clusters of numerically equal eigenvalues.
    let scale = values.iter().fold(1.0f64, |a, l| a.max(l.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= TOL_EIG * scale {
            end += 1;
        }
        if end - start > 1 {
            cols[start..end].sort_by(|a, b| lexicographic_desc(a, b));
        }
        start = end;
    }
    let eigenvectors = CMatrix::from_fn(n, n, |i, k| cols[k][i]);
    Ok(Spectrum { eigenvalues: values, eigenvectors })
}

pub fn eigh(a: &HermitianMatrix) -> Result<Spectrum> {
    eigh_matrix(a.as_matrix())
}

fn eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_SWEEPS).ok_or(Error::ConvergenceFailure)?;
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// Smallest eigenvalue of a hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(eigenvalues(m)?.into_iter().fold(f64::INFINITY, f64::min))
}

pub fn max_eigenvalue(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    Ok(eigenvalues(m)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Tests `A ⪰ B`; the margin is the smallest eigenvalue of `A − B`.
pub fn loewner_geq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<(bool, f64)> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: b.n() });
    }
    let mut diff = a.as_matrix() - b.as_matrix();
    force_hermitian(&mut diff);
    let margin = min_eigenvalue(&diff)?;
    let ok = margin >= -tol * (1.0 + a.max_norm() + b.max_norm());
    Ok((ok, margin))
}

/// `diag(λ) M diag(λ)`.
pub fn diag_congruence(m: &HermitianMatrix, lambda: &[f64]) -> Result<HermitianMatrix> {
    if lambda.len() != m.n() {
        return Err(Error::DimensionMismatch { left: m.n(), right: lambda.len() });
    }
    if let Some((index, &value)) = lambda.iter().enumerate().find(|(_, &l)| !(l > 0.0 && l.is_finite())) {
        return Err(Error::NonPositiveScale { index, value });
    }
    let n = m.n();
    let data = CMatrix::from_fn(n, n, |i, j| m[(i, j)] * (lambda[i] * lambda[j]));
    Ok(HermitianMatrix::from_psd_unchecked(data))
}

pub fn sample_cnormal(dim: usize, rng: &mut Stream) -> ComplexVector {
    ComplexVector(rng.cnormal_vec(dim))
}

/// `M† M` for an `rank × n` complex Gaussian `M`.
pub fn random_psd(n: usize, rank: usize, rng: &mut Stream) -> HermitianMatrix {
    let m = CMatrix::from_fn(rank, n, |_, _| rng.cnormal());
    HermitianMatrix::from_psd_unchecked(m.adjoint() * m)
}
