//! Lower bounds and estimators for PSD permanents.
//!
//! A rank-one certificate is a vector `w` with `A ⪰ w w†`; monotonicity of the
//! permanent on the Loewner order then gives `per(A) ≥ n! ∏ |w_i|²`. The
//! certificate is searched in the eigenvalue-one eigenspace of the rescaled
//! matrix `diag(√x*) A diag(√x*)`, where `x*` solves the relaxation.

use crate::error::{Error, Result};
use crate::matrix::{eigh, loewner_geq, CMatrix, CholeskyFactor, ComplexVector, HermitianMatrix, TOL_EIG};
use crate::permanent::{ln_factorial, per_rank1, LogNonneg};
use crate::relax::RelaxationSolution;
use crate::rng::Stream;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const TOL_CERT: f64 = 1e-7;

/// `(∏ A_ii, n! ∏ A_ii)`.
pub fn marcus_bounds(a: &HermitianMatrix) -> (LogNonneg, LogNonneg) {
    let diag = a.diag();
    if diag.iter().any(|&d| d <= 0.0) {
        return (LogNonneg::ZERO, LogNonneg::ZERO);
    }
    let lo: f64 = diag.iter().map(|d| d.ln()).sum();
    (LogNonneg::from_log(lo), LogNonneg::from_log(lo + ln_factorial(a.n())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    pub eig_tol: f64,
    pub n_samples: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { eig_tol: 1e-6, n_samples: 512, ascent_steps: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Certificate {
    /// Direction in the original coordinates.
    pub w: ComplexVector,
    pub log_lower: LogNonneg,
    /// Smallest eigenvalue of `A - w w†`.
    pub loewner_margin: f64,
    pub eig_tol_used: f64,
    /// Dimension of the eigenvalue-one eigenspace that was searched.
    pub eigenspace_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub margin: f64,
    pub log_lower: LogNonneg,
    pub passed: bool,
}

pub fn verify_rank1(a: &HermitianMatrix, w: &ComplexVector, tol_cert: f64) -> Result<Verification> {
    if w.dim() != a.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: w.dim() });
    }
    let (_, margin) = loewner_geq(a, &HermitianMatrix::outer(w), 0.0)?;
    let passed = margin >= -tol_cert * (1.0 + a.max_norm());
    Ok(Verification { margin, log_lower: per_rank1(w), passed })
}

/// Maximizes `mean_i ln|z_i|² - ln mean_i |z_i|²` over `z = M y`.
///
/// Seeds with `n_samples` complex-normal draws, then refines the best by
/// gradient ascent on the unit sphere.
struct RatioSearch<'a> {
    m: &'a CMatrix,
}

impl RatioSearch<'_> {
    fn objective(&self, y: &[Complex64]) -> f64 {
        let z = self.image(y);
        ratio_objective(&z)
    }

    fn image(&self, y: &[Complex64]) -> Vec<Complex64> {
        (0..self.m.nrows())
            .map(|i| (0..self.m.ncols()).map(|k| self.m[(i, k)] * y[k]).sum())
            .collect()
    }

    /// Wirtinger gradient `∂φ/∂ȳ` (scaled by 2 it is the real gradient).
    fn gradient(&self, y: &[Complex64]) -> Vec<Complex64> {
        let z = self.image(y);
        let n = z.len() as f64;
        let total: f64 = z.iter().map(|zi| zi.norm_sqr()).sum();
        (0..self.m.ncols())
            .map(|k| {
                (0..self.m.nrows())
                    .map(|i| {
                        let mik = self.m[(i, k)].conj();
                        mik * (z[i] / z[i].norm_sqr() / n - z[i] / total)
                    })
                    .sum()
            })
            .collect()
    }

    fn run(&self, n_samples: usize, steps: usize, rng: &mut Stream) -> Option<(Vec<Complex64>, f64)> {
        let k = self.m.ncols();
        let mut best: Option<(Vec<Complex64>, f64)> = None;
        for _ in 0..n_samples.max(1) {
            let y = rng.cnormal_vec(k);
            let phi = self.objective(&y);
            if phi.is_finite() && best.as_ref().is_none_or(|b| phi > b.1) {
                best = Some((y, phi));
            }
        }
        let (mut y, mut phi) = best?;
        normalize(&mut y);
        let mut step = 0.1;
        for _ in 0..steps {
            let g = self.gradient(&y);
            let mut trial: Vec<Complex64> = y.iter().zip(&g).map(|(yi, gi)| yi + gi * (2.0 * step)).collect();
            normalize(&mut trial);
            let next = self.objective(&trial);
            if next > phi {
                y = trial;
                phi = next;
            } else {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        Some((y, phi))
    }
}

fn normalize(y: &mut [Complex64]) {
    let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in y.iter_mut() {
            *z /= norm;
        }
    }
}

/// `ln( geometric mean |z|² / arithmetic mean |z|² )`, `-inf` on a zero coordinate.
fn ratio_objective(z: &[Complex64]) -> f64 {
    let n = z.len() as f64;
    let mut log_sum = 0.0;
    let mut sum = 0.0;
    for zi in z {
        let s = zi.norm_sqr();
        if s == 0.0 {
            return f64::NEG_INFINITY;
        }
        log_sum += s.ln();
        sum += s;
    }
    log_sum / n - (sum / n).ln()
}

/// Rank-one certificate from an optimal relaxation solution.
pub fn extract_rank1(a: &HermitianMatrix, sol: &RelaxationSolution, opts: &ExtractOptions) -> Result<Rank1Certificate> {
    let n = a.n();
    if sol.x.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: sol.x.len() });
    }
    if sol.is_degenerate() {
        // rel(A) = 0 forces per(A) = 0; the zero vector certifies that.
        let w = ComplexVector::new(vec![Complex64::new(0.0, 0.0); n]);
        let check = verify_rank1(a, &w, TOL_CERT)?;
        return Ok(Rank1Certificate {
            w,
            log_lower: LogNonneg::ZERO,
            loewner_margin: check.margin,
            eig_tol_used: opts.eig_tol,
            eigenspace_dim: 0,
        });
    }
    let scale: Vec<f64> = sol.x.iter().map(|x| x.sqrt()).collect();
    let rescaled = crate::matrix::diag_congruence(a, &scale)?;
    let spectrum = eigh(&rescaled)?;
    let band_lo = 1.0 - opts.eig_tol;
    let band_hi = 1.0 + 10.0 * TOL_EIG;
    let members: Vec<usize> = (0..n)
        .filter(|&k| spectrum.eigenvalues[k] >= band_lo && spectrum.eigenvalues[k] <= band_hi)
        .collect();
    if members.is_empty() {
        return Err(Error::EmptyEigenspace { eig_tol: opts.eig_tol });
    }
    let basis = CMatrix::from_fn(n, members.len(), |i, c| spectrum.eigenvectors[(i, members[c])]);
    // Ã ⪰ floor · P_W ⪰ floor · v v† for every unit v in the eigenspace.
    let floor = members.iter().map(|&k| spectrum.eigenvalues[k]).fold(f64::INFINITY, f64::min);

    let mut rng = Stream::derive(opts.seed, 0);
    let search = RatioSearch { m: &basis };
    let (y, _) = search.run(opts.n_samples, opts.ascent_steps, &mut rng).ok_or(Error::DegenerateSamples)?;
    let mut v = search.image(&y);
    normalize(&mut v);
    let shrink = floor.sqrt();
    let w = ComplexVector::new(v.iter().zip(&scale).map(|(vi, s)| vi * (shrink / s)).collect());
    let check = verify_rank1(a, &w, TOL_CERT)?;
    Ok(Rank1Certificate {
        w,
        log_lower: check.log_lower,
        loewner_margin: check.margin,
        eig_tol_used: opts.eig_tol,
        eigenspace_dim: members.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Natural log of the sample mean.
    pub mean_log: f64,
    pub std_err_rel: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Streaming log-domain sums of `s` and `s²`, mergeable across workers.
#[derive(Debug, Clone, Copy)]
struct LogMoments {
    max: f64,
    sum: f64,
    sum_sq: f64,
    count: u64,
}

impl LogMoments {
    fn new() -> Self {
        LogMoments { max: f64::NEG_INFINITY, sum: 0.0, sum_sq: 0.0, count: 0 }
    }

    fn push(&mut self, log_s: f64) {
        self.count += 1;
        if log_s == f64::NEG_INFINITY {
            return;
        }
        if log_s > self.max {
            let r = (self.max - log_s).exp();
            self.sum *= r;
            self.sum_sq *= r * r;
            self.max = log_s;
        }
        let e = (log_s - self.max).exp();
        self.sum += e;
        self.sum_sq += e * e;
    }

    fn merge(mut self, other: LogMoments) -> LogMoments {
        if other.max > self.max {
            return other.merge(self);
        }
        self.count += other.count;
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        let r = (other.max - self.max).exp();
        self.sum += other.sum * r;
        self.sum_sq += other.sum_sq * r * r;
        self
    }

    fn finish(&self, seed: u64) -> McEstimate {
        let n = self.count as f64;
        if self.sum == 0.0 {
            return McEstimate { mean_log: f64::NEG_INFINITY, std_err_rel: 0.0, samples: self.count, seed };
        }
        let mean_log = self.max + (self.sum / n).ln();
        // N Σs² / (Σs)² - 1 is the sample variance over the squared mean, times (N-1)/N.
        let ratio = n * self.sum_sq / (self.sum * self.sum);
        let var_rel = ((ratio - 1.0) / (n - 1.0)).max(0.0);
        McEstimate { mean_log, std_err_rel: var_rel.sqrt(), samples: self.count, seed }
    }
}

fn log_product_sample(v: &CMatrix, x: &[Complex64]) -> f64 {
    (0..v.ncols())
        .map(|i| {
            let zi: Complex64 = (0..v.nrows()).map(|k| v[(k, i)].conj() * x[k]).sum();
            zi.norm_sqr().ln()
        })
        .sum()
}

/// Unbiased estimate of `per(V†V)` as the mean of `∏_i |(V† x)_i|²`, `x ~ CN(0, I)`.
pub fn gurvits_estimate(factor: &CholeskyFactor, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("estimator needs at least 2 samples".into()));
    }
    let mut rng = Stream::derive(seed, 0);
    let mut acc = LogMoments::new();
    let d = factor.rank();
    for _ in 0..samples {
        let x = rng.cnormal_vec(d);
        acc.push(log_product_sample(&factor.v, &x));
    }
    Ok(acc.finish(seed))
}

/// Parallel variant: worker `k` draws from stream `(seed, k + 1)`.
///
/// Results depend on `workers` and differ from [`gurvits_estimate`] in the
/// sample stream; the merge is order-insensitive up to 1-ulp noise.
pub fn gurvits_estimate_par(factor: &CholeskyFactor, samples: u64, seed: u64, workers: usize) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("estimator needs at least 2 samples".into()));
    }
    let workers = workers.max(1) as u64;
    let d = factor.rank();
    let acc = (0..workers)
        .into_par_iter()
        .map(|k| {
            let quota = samples / workers + u64::from(k < samples % workers);
            let mut rng = Stream::derive(seed, k + 1);
            let mut acc = LogMoments::new();
            for _ in 0..quota {
                let x = rng.cnormal_vec(d);
                acc.push(log_product_sample(&factor.v, &x));
            }
            acc
        })
        .reduce(LogMoments::new, LogMoments::merge);
    Ok(acc.finish(seed))
}

/// `n` unit vectors in `C^d`, stored as the columns of a `d × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEnsemble {
    columns: CMatrix,
}

impl VectorEnsemble {
    pub fn new(columns: CMatrix) -> Result<Self> {
        for (j, col) in columns.column_iter().enumerate() {
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("column {j} has norm {norm}")));
            }
        }
        Ok(VectorEnsemble { columns })
    }

    /// Normalizes each nonzero column.
    pub fn normalized(mut columns: CMatrix) -> Result<Self> {
        for (j, mut col) in columns.column_iter_mut().enumerate() {
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::InvalidArgument(format!("column {j} cannot be normalized")));
            }
            col /= Complex64::new(norm, 0.0);
        }
        Ok(VectorEnsemble { columns })
    }

    pub fn standard_basis(d: usize) -> Self {
        VectorEnsemble { columns: CMatrix::identity(d, d) }
    }

    pub fn d(&self) -> usize {
        self.columns.nrows()
    }

    pub fn n(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &CMatrix {
        &self.columns
    }
}

/// Geometric over arithmetic mean of `|u_i† x|²`.
pub fn f_ratio(u: &VectorEnsemble, x: &ComplexVector) -> Result<f64> {
    if x.dim() != u.d() {
        return Err(Error::DimensionMismatch { left: u.d(), right: x.dim() });
    }
    let ut = u.columns().adjoint();
    let z = RatioSearch { m: &ut }.image(x.coords());
    if z.iter().all(|zi| zi.norm_sqr() == 0.0) {
        return Err(Error::ZeroDenominator);
    }
    Ok(ratio_objective(&z).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FSupOptions {
    pub n_samples: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for FSupOptions {
    fn default() -> Self {
        FSupOptions { n_samples: 1024, ascent_steps: 200, seed: 0 }
    }
}

/// Lower estimate of `f(U) = sup_x f_ratio(U, x)`.
pub fn f_sup_estimate(u: &VectorEnsemble, opts: &FSupOptions) -> f64 {
    let ut = u.columns().adjoint();
    let mut rng = Stream::derive(opts.seed, 0);
    match (RatioSearch { m: &ut }).run(opts.n_samples, opts.ascent_steps, &mut rng) {
        Some((_, phi)) => phi.exp().min(1.0),
        None => 0.0,
    }
}
