//! Instances on which the relaxation is as loose as the sandwich allows.
//!
//! From unit vectors `u_1..u_n` spanning `C^d`, the projection
//! `A = U†(UU†)^{-1}U` has `rel(A) = 1`, while `per(A)` shrinks like
//! `(n!/n^n) f(U)^n` up to a binomial factor. Repeating the columns `k` times
//! keeps `f(U)` fixed while the matrix grows.

use crate::bounds::{f_sup_estimate, gurvits_estimate, FSupOptions, VectorEnsemble};
use crate::error::{Error, Result};
use crate::matrix::{cholesky_factor, eigh_matrix, CMatrix, HermitianMatrix, TOL_CHOL};
use crate::permanent::{ln_factorial, per_psd_log, RYSER_MAX_N};
use crate::relax::{rel_solve, SolverOptions};
use crate::rng::Stream;
use crate::EULER_GAMMA;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const SPAN_FLOOR: f64 = 1e-12;

/// `e^{γ+1}`, the limiting worst-case per-coordinate ratio.
pub fn worst_case_constant() -> f64 {
    (EULER_GAMMA + 1.0).exp()
}

fn spans(u: &CMatrix) -> Result<bool> {
    let gram = u * u.adjoint();
    let spectrum = eigh_matrix(&gram)?;
    Ok(spectrum.min() > SPAN_FLOOR * spectrum.max())
}

/// `n` independent uniformly random unit vectors in `C^d`.
pub fn sphere_ensemble(d: usize, n: usize, seed: u64) -> Result<VectorEnsemble> {
    if d == 0 || n < d {
        return Err(Error::InvalidArgument(format!("sphere ensemble needs n >= d >= 1, got d={d} n={n}")));
    }
    for attempt in 0..2 {
        let mut rng = Stream::derive(seed, attempt);
        let g = CMatrix::from_fn(d, n, |_, _| rng.cnormal());
        let u = VectorEnsemble::normalized(g)?;
        if spans(u.columns())? {
            return Ok(u);
        }
    }
    Err(Error::RankDeficient { d })
}

/// Repeats each column `k` times in place: `u1 × k, u2 × k, ...`.
pub fn duplicate_ensemble(u: &VectorEnsemble, k: usize) -> Result<VectorEnsemble> {
    if k == 0 {
        return Err(Error::InvalidArgument("duplication factor must be at least 1".into()));
    }
    let cols = u.columns();
    let dup = CMatrix::from_fn(u.d(), u.n() * k, |i, j| cols[(i, j / k)]);
    VectorEnsemble::new(dup)
}

#[derive(Debug, Clone)]
pub struct TightInstance {
    pub ensemble: VectorEnsemble,
    pub a: HermitianMatrix,
    pub f_hat: f64,
    pub seed: u64,
}

/// Builds `A = U†(UU†)^{-1}U` and attaches a lower estimate of `f(U)`.
pub fn tight_instance(u: &VectorEnsemble, seed: u64) -> Result<TightInstance> {
    let cols = u.columns();
    let spectrum = eigh_matrix(&(cols * cols.adjoint()))?;
    // Also catches NaN eigenvalues.
    if spectrum.min().partial_cmp(&(SPAN_FLOOR * spectrum.max())) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::SpanFailure { d: u.d() });
    }
    let d = u.d();
    let q = &spectrum.eigenvectors;
    let inv = CMatrix::from_fn(d, d, |i, j| {
        (0..d).map(|k| q[(i, k)] * q[(j, k)].conj() / spectrum.eigenvalues[k]).sum::<Complex64>()
    });
    let a = HermitianMatrix::from_psd_unchecked(cols.adjoint() * inv * cols);
    let f_hat = f_sup_estimate(u, &FSupOptions { seed, ..Default::default() });
    Ok(TightInstance { ensemble: u.clone(), a, f_hat, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds_with_fhat: bool,
    pub per_method: PerMethod,
}

/// `ln C(n+d-1, d-1)`.
fn ln_binomial(top: usize, bottom: usize) -> f64 {
    ln_factorial(top) - ln_factorial(bottom) - ln_factorial(top - bottom)
}

/// Compares `ln per(A)` with `ln(n!/n^n) + ln C(n+d-1, d-1) + n ln f_hat`.
///
/// Since `f_hat` underestimates `f(U)`, a `false` result is inconclusive.
/// Above the exact-permanent size limit, `mc_samples` must be given.
pub fn perbound_check(inst: &TightInstance, mc_samples: Option<u64>) -> Result<PerBoundCheck> {
    let n = inst.a.n();
    let d = inst.ensemble.d();
    let (lhs, per_method) = if n <= RYSER_MAX_N {
        (per_psd_log(&inst.a)?.ln(), PerMethod::Ryser)
    } else {
        let samples = mc_samples.ok_or(Error::TooLarge { n, max: RYSER_MAX_N, method: "ryser" })?;
        let factor = cholesky_factor(&inst.a, TOL_CHOL);
        (gurvits_estimate(&factor, samples, inst.seed)?.mean_log, PerMethod::Mc)
    };
    let nf = n as f64;
    let rhs = ln_factorial(n) - nf * nf.ln() + ln_binomial(n + d - 1, d - 1) + nf * inst.f_hat.ln();
    // Equality is attained (d = 1), so allow roundoff.
    let holds_with_fhat = lhs <= rhs + 1e-9 * (1.0 + rhs.abs());
    Ok(PerBoundCheck { lhs, rhs, holds_with_fhat, per_method })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerMethod {
    Ryser,
    Mc,
}

impl PerMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            PerMethod::Ryser => "ryser",
            PerMethod::Mc => "mc",
        }
    }
}

/// One instance of the ratio experiment. `n` is the ensemble size before
/// duplication; the matrix has dimension `n·k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub seed: u64,
    pub log_rel: f64,
    pub log_per: f64,
    pub per_method: PerMethod,
    /// `exp((log_rel - log_per) / (n·k))`.
    pub ratio_root: f64,
    /// Relative standard error of the Monte-Carlo permanent, absent for exact rows.
    pub std_err_rel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioConfig {
    pub d_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub seeds: Vec<u64>,
    pub samples_mc: u64,
    pub per_cutoff_n: usize,
    /// Worker threads; 1 runs sequentially.
    pub parallel: usize,
}

impl Default for RatioConfig {
    fn default() -> Self {
        RatioConfig {
            d_list: vec![1, 2, 4, 8],
            n_list: vec![12],
            k_list: vec![1],
            seeds: (0..10).collect(),
            samples_mc: 100_000,
            per_cutoff_n: 14,
            parallel: 1,
        }
    }
}

impl RatioConfig {
    /// Grid points in output order.
    pub fn grid(&self) -> Vec<(usize, usize, usize, u64)> {
        let mut out = Vec::new();
        for &d in &self.d_list {
            for &n in &self.n_list {
                for &k in &self.k_list {
                    for &seed in &self.seeds {
                        out.push((d, n, k, seed));
                    }
                }
            }
        }
        out
    }
}

pub fn ratio_row(d: usize, n: usize, k: usize, seed: u64, config: &RatioConfig) -> Result<RatioRow> {
    let base = sphere_ensemble(d, n, seed)?;
    let u = duplicate_ensemble(&base, k)?;
    let inst = tight_instance(&u, seed)?;
    let sol = rel_solve(&inst.a, &SolverOptions::default())?;
    let size = n * k;
    let (log_per, per_method, std_err_rel) = if size <= config.per_cutoff_n.min(RYSER_MAX_N) {
        (per_psd_log(&inst.a)?.ln(), PerMethod::Ryser, None)
    } else {
        let factor = cholesky_factor(&inst.a, TOL_CHOL);
        let est = gurvits_estimate(&factor, config.samples_mc, seed)?;
        (est.mean_log, PerMethod::Mc, Some(est.std_err_rel))
    };
    let ratio_root = ((sol.log_rel - log_per) / size as f64).exp();
    Ok(RatioRow { n, d, k, seed, log_rel: sol.log_rel, log_per, per_method, ratio_root, std_err_rel })
}

/// Runs every grid point; rows come back in grid order regardless of `parallel`.
pub fn ratio_experiment(config: &RatioConfig) -> Result<Vec<RatioRow>> {
    let grid = config.grid();
    if config.parallel <= 1 {
        return grid.iter().map(|&(d, n, k, s)| ratio_row(d, n, k, s, config)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallel)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| grid.par_iter().map(|&(d, n, k, s)| ratio_row(d, n, k, s, config)).collect())
}
