//! The diagonal relaxation `rel(A) = inf { ∏ D_ii : D diagonal, D ⪰ A }`.
//!
//! With `A = V†V` and `x = diag(D)^{-1}` the problem becomes
//!
//! ```text
//! minimize  -Σ ln x_i   subject to  I - V diag(x) V† ⪰ 0
//! ```
//!
//! which is solved by damped Newton steps on the barrier function
//! `F_μ(x) = -Σ ln x_i - μ ln det(I - V diag(x) V†)` along a geometric
//! schedule of `μ`. The log-det term is a `d`-self-concordant barrier, so a
//! centred iterate is within `d·μ` of the optimum in log domain.

use crate::error::{Error, Result};
use crate::matrix::{
    cholesky_factor, max_eigenvalue, min_eigenvalue, CMatrix, CholeskyFactor, HermitianMatrix, HpdCholesky,
    TOL_CHOL,
};
use crate::permanent::LogNonneg;
use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol_opt: f64,
    pub tol_feas: f64,
    pub mu0: f64,
    pub mu_shrink: f64,
    pub max_newton: usize,
    pub max_stages: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol_opt: 1e-8, tol_feas: 1e-9, mu0: 1.0, mu_shrink: 0.25, max_newton: 60, max_stages: 80 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.tol_opt, self.tol_feas, self.mu0].iter().all(|&v| v > 0.0 && v.is_finite());
        if !positive || self.max_newton == 0 || self.max_stages == 0 {
            return Err(Error::InvalidArgument("solver options must be positive".into()));
        }
        if !(self.mu_shrink > 0.0 && self.mu_shrink < 1.0) {
            return Err(Error::InvalidArgument(format!("mu_shrink {} not in (0, 1)", self.mu_shrink)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub mu: f64,
    pub newton_steps: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationSolution {
    /// `x_i = 1 / D*_ii`; infinite where the relaxation degenerates.
    pub x: Vec<f64>,
    /// `-Σ ln x_i`, or `-inf` when `rel(A) = 0`.
    pub log_rel: f64,
    /// Smallest eigenvalue of `I - V diag(x) V†`.
    pub feas_margin: f64,
    /// `d · μ` at termination.
    pub gap_bound: f64,
    pub rank: usize,
    pub stages: Vec<StageRecord>,
}

impl RelaxationSolution {
    pub fn rel(&self) -> LogNonneg {
        LogNonneg::from_log(self.log_rel)
    }

    pub fn is_degenerate(&self) -> bool {
        self.log_rel == f64::NEG_INFINITY
    }

    pub fn newton_steps(&self) -> usize {
        self.stages.iter().map(|s| s.newton_steps).sum()
    }
}

/// `I - V diag(x) V†`.
fn slack_matrix(x: &[f64], v: &CMatrix) -> CMatrix {
    let d = v.nrows();
    let mut vx = v.clone();
    for (j, mut col) in vx.column_iter_mut().enumerate() {
        col *= Complex64::new(x[j], 0.0);
    }
    let mut m = CMatrix::identity(d, d) - vx * v.adjoint();
    for i in 0..d {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..d {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    m
}

struct Local {
    value: f64,
    grad: DVector<f64>,
    /// `V† M^{-1} V`.
    w: CMatrix,
}

fn evaluate(x: &[f64], v: &CMatrix, mu: f64, want_w: bool) -> Result<Local> {
    if x.iter().any(|&xi| !(xi > 0.0 && xi.is_finite())) {
        return Err(Error::Infeasible { margin: f64::NAN });
    }
    let m = slack_matrix(x, v);
    let chol = HpdCholesky::new(&m).ok_or_else(|| Error::Infeasible {
        margin: min_eigenvalue(&m).unwrap_or(f64::NAN),
    })?;
    let logdet = chol.log_det();
    if !logdet.is_finite() {
        return Err(Error::Infeasible { margin: 0.0 });
    }
    let value = -x.iter().map(|xi| xi.ln()).sum::<f64>() - mu * logdet;
    let n = x.len();
    let w = if want_w || mu > 0.0 { v.adjoint() * chol.solve(v) } else { CMatrix::zeros(n, n) };
    let grad = DVector::from_fn(n, |i, _| -1.0 / x[i] + mu * w[(i, i)].re);
    Ok(Local { value, grad, w })
}

/// Barrier value and gradient at a strictly feasible `x`.
pub fn barrier_value_grad(x: &[f64], factor: &CholeskyFactor, mu: f64) -> Result<(f64, Vec<f64>)> {
    if x.len() != factor.n() {
        return Err(Error::DimensionMismatch { left: factor.n(), right: x.len() });
    }
    let local = evaluate(x, &factor.v, mu, false)?;
    Ok((local.value, local.grad.iter().copied().collect()))
}

/// `x0 = 1 / (2 λ_max(A))`, which puts the slack matrix's smallest eigenvalue at ½.
pub fn feasible_start(a: &HermitianMatrix, factor: &CholeskyFactor) -> Result<Vec<f64>> {
    if let Some(index) = a.diag().iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDiagonal { index });
    }
    let lam = max_eigenvalue(&(&factor.v * factor.v.adjoint()))?;
    Ok(vec![1.0 / (2.0 * lam); a.n()])
}

/// Box containing the optimal `x`.
pub fn x_bounds(a: &HermitianMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let diag = a.diag();
    if let Some(index) = diag.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDiagonal { index });
    }
    let lam = max_eigenvalue(a.as_matrix())? * (1.0 + 1e-9);
    let n = diag.len() as f64;
    let log_prod: f64 = diag.iter().map(|d| d.ln()).sum();
    let lo = diag.iter().map(|d| (log_prod - n * lam.ln() - d.ln()).exp()).collect();
    let hi = diag.iter().map(|d| 1.0 / d).collect();
    Ok((lo, hi))
}

fn degenerate_solution(a: &HermitianMatrix) -> Result<RelaxationSolution> {
    let lam = max_eigenvalue(a.as_matrix())?.max(f64::MIN_POSITIVE) * (1.0 + 1e-9);
    let x = a.diag().iter().map(|&d| if d <= 0.0 { f64::INFINITY } else { 1.0 / lam }).collect();
    Ok(RelaxationSolution {
        x,
        log_rel: f64::NEG_INFINITY,
        feas_margin: f64::NAN,
        gap_bound: 0.0,
        rank: 0,
        stages: Vec::new(),
    })
}

pub fn rel_solve(a: &HermitianMatrix, opts: &SolverOptions) -> Result<RelaxationSolution> {
    opts.validate()?;
    if a.diag().iter().any(|&d| d <= 0.0) {
        return degenerate_solution(a);
    }
    let factor = cholesky_factor(a, TOL_CHOL);
    let x0 = feasible_start(a, &factor)?;
    path_follow(&factor, x0, opts)
}

/// Same as [`rel_solve`] from a caller-chosen strictly feasible start.
pub fn rel_solve_from(a: &HermitianMatrix, opts: &SolverOptions, x0: Vec<f64>) -> Result<RelaxationSolution> {
    opts.validate()?;
    if a.diag().iter().any(|&d| d <= 0.0) {
        return degenerate_solution(a);
    }
    if x0.len() != a.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: x0.len() });
    }
    let factor = cholesky_factor(a, TOL_CHOL);
    path_follow(&factor, x0, opts)
}

fn newton_direction(local: &Local, x: &[f64], mu: f64) -> Option<DVector<f64>> {
    let n = x.len();
    let h = DMatrix::from_fn(n, n, |i, j| {
        let barrier = mu * local.w[(i, j)].norm_sqr();
        if i == j {
            barrier + 1.0 / (x[i] * x[i])
        } else {
            barrier
        }
    });
    let chol = Cholesky::new(h)?;
    Some(-chol.solve(&local.grad))
}

const CENTERING: f64 = 1e-2;

fn path_follow(factor: &CholeskyFactor, x0: Vec<f64>, opts: &SolverOptions) -> Result<RelaxationSolution> {
    let v = &factor.v;
    let d = factor.rank();
    let mut x = x0;
    let mut mu = opts.mu0;
    evaluate(&x, v, mu, false)?;
    let mut stages = Vec::new();

    for stage in 0..opts.max_stages {
        let guard = opts.tol_feas * mu;
        let mut steps = 0;
        let mut decrement_sq = f64::INFINITY;
        for _ in 0..opts.max_newton {
            let local = evaluate(&x, v, mu, true)?;
            let dir = newton_direction(&local, &x, mu).ok_or(Error::NewtonFailure { stage })?;
            let slope = local.grad.dot(&dir);
            decrement_sq = -slope;
            // Centre well inside the target; off-centre error adds to d·μ.
            if decrement_sq / 2.0 <= CENTERING * opts.tol_opt {
                break;
            }
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_HALVINGS {
                let trial: Vec<f64> = x.iter().zip(dir.iter()).map(|(xi, di)| xi + t * di).collect();
                if trial.iter().all(|&xi| xi > 0.0) {
                    if let Ok(next) = evaluate(&trial, v, mu, false) {
                        let margin = min_eigenvalue(&slack_matrix(&trial, v))?;
                        if margin >= guard && next.value <= local.value + ARMIJO * t * slope {
                            x = trial;
                            accepted = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                // Converged to roundoff: the decrement cannot shrink any further.
                if decrement_sq < 1e3 * f64::EPSILON * (x.len() as f64) {
                    break;
                }
                return Err(Error::NewtonFailure { stage });
            }
            steps += 1;
        }
        let objective = -x.iter().map(|xi| xi.ln()).sum::<f64>();
        stages.push(StageRecord { mu, newton_steps: steps, objective });
        let gap_bound = d as f64 * mu + decrement_sq.max(0.0);
        if gap_bound <= opts.tol_opt {
            let feas_margin = min_eigenvalue(&slack_matrix(&x, v))?;
            return Ok(RelaxationSolution {
                x,
                log_rel: objective,
                feas_margin,
                gap_bound,
                rank: d,
                stages,
            });
        }
        mu *= opts.mu_shrink;
    }
    Err(Error::StageLimit { stages: opts.max_stages, gap: d as f64 * mu / opts.mu_shrink })
}
