//! Exact permanents at desk scale and closed forms, reported in log domain
//! whenever the matrix is positive semidefinite.

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, ComplexVector, HermitianMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const NAIVE_MAX_N: usize = 9;
pub const RYSER_MAX_N: usize = 24;
pub const TENSOR_MAX_N: usize = 4;

/// A nonnegative real stored as its natural logarithm, with an explicit zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNonneg {
    pub is_zero: bool,
    pub log_value: f64,
}

impl LogNonneg {
    pub const ZERO: LogNonneg = LogNonneg { is_zero: true, log_value: 0.0 };
    pub const ONE: LogNonneg = LogNonneg { is_zero: false, log_value: 0.0 };

    pub fn from_log(log_value: f64) -> Self {
        if log_value == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogNonneg { is_zero: false, log_value }
        }
    }

    pub fn from_linear(x: f64) -> Self {
        assert!(x >= 0.0, "LogNonneg::from_linear({x})");
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_log(x.ln())
        }
    }

    /// Natural log, `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.is_zero {
            f64::NEG_INFINITY
        } else {
            self.log_value
        }
    }

    pub fn to_linear(&self) -> f64 {
        self.ln().exp()
    }

    /// Human-readable linear value, `≈ 5.000e+00`, when it fits a double.
    pub fn approx_string(&self) -> Option<String> {
        if self.is_zero {
            return Some("≈ 0".to_string());
        }
        let x = self.to_linear();
        if !(x.is_finite() && x > 0.0) {
            return None;
        }
        let s = format!("{x:.3e}");
        let (mantissa, exp) = s.split_once('e')?;
        let exp: i32 = exp.parse().ok()?;
        let sign = if exp < 0 { '-' } else { '+' };
        Some(format!("≈ {mantissa}e{sign}{:02}", exp.abs()))
    }
}

impl std::ops::Mul for LogNonneg {
    type Output = LogNonneg;

    fn mul(self, other: LogNonneg) -> LogNonneg {
        if self.is_zero || other.is_zero {
            Self::ZERO
        } else {
            Self::from_log(self.log_value + other.log_value)
        }
    }
}

/// `ln n!` by summed logs.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn check_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

/// Sum over all permutations (Heap's algorithm order).
pub fn per_naive(a: &CMatrix) -> Result<Complex64> {
    let n = check_square(a)?;
    if n > NAIVE_MAX_N {
        return Err(Error::TooLarge { n, max: NAIVE_MAX_N, method: "naive" });
    }
    let mut sigma: Vec<usize> = (0..n).collect();
    let term = |s: &[usize]| s.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (i, &j)| acc * a[(i, j)]);
    let mut total = term(&sigma);
    let mut counters = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(counters[i], i);
            }
            total += term(&sigma);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

/// Ryser's formula over column subsets in binary-reflected Gray-code order.
///
/// Returns the permanent and the sum of the absolute values of all
/// inclusion–exclusion terms, which bounds the roundoff.
pub fn ryser_with_scale(a: &CMatrix) -> Result<(Complex64, f64)> {
    let n = check_square(a)?;
    if n > RYSER_MAX_N {
        return Err(Error::TooLarge { n, max: RYSER_MAX_N, method: "ryser" });
    }
    if n == 0 {
        return Ok((Complex64::new(1.0, 0.0), 1.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut in_set = vec![false; n];
    let mut size = 0usize;
    let mut total = Complex64::new(0.0, 0.0);
    let mut abs_total = 0.0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        if in_set[j] {
            in_set[j] = false;
            size -= 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, j)];
            }
        } else {
            in_set[j] = true;
            size += 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, j)];
            }
        }
        let prod = row_sums.iter().fold(Complex64::new(1.0, 0.0), |acc, &s| acc * s);
        abs_total += prod.norm();
        if (n - size).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok((total, abs_total))
}

pub fn per_ryser(a: &CMatrix) -> Result<Complex64> {
    ryser_with_scale(a).map(|(p, _)| p)
}

/// Permanent of a PSD matrix via Ryser on its unit-diagonal rescaling.
pub fn per_psd_log(a: &HermitianMatrix) -> Result<LogNonneg> {
    let n = a.n();
    if n > RYSER_MAX_N {
        return Err(Error::TooLarge { n, max: RYSER_MAX_N, method: "ryser" });
    }
    let diag = a.diag();
    if diag.iter().any(|&d| d <= 0.0) {
        return Ok(LogNonneg::ZERO);
    }
    let inv_sqrt: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
    let corr = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            a[(i, j)] * (inv_sqrt[i] * inv_sqrt[j])
        }
    });
    let (value, scale) = ryser_with_scale(&corr)?;
    let log_diag: f64 = diag.iter().map(|d| d.ln()).sum();
    let roundoff = 1e-9 * scale.max(1.0);
    if value.re < -roundoff {
        return Err(Error::NegativeResult { value: value.re });
    }
    if value.re <= 0.0 {
        return Ok(LogNonneg::ZERO);
    }
    Ok(LogNonneg::from_log(value.re.ln() + log_diag))
}

/// `per(v v†) = n! ∏ |v_i|²`.
pub fn per_rank1(v: &ComplexVector) -> LogNonneg {
    if v.coords().iter().any(|z| z.norm_sqr() == 0.0) {
        return LogNonneg::ZERO;
    }
    let s: f64 = v.coords().iter().map(|z| z.norm_sqr().ln()).sum();
    LogNonneg::from_log(ln_factorial(v.dim()) + s)
}

pub fn per_diagonal(d: &[f64]) -> Result<LogNonneg> {
    if let Some((index, &value)) = d.iter().enumerate().find(|(_, &x)| x < 0.0 || x.is_nan()) {
        return Err(Error::NegativeEntry { index, value });
    }
    if d.contains(&0.0) {
        return Ok(LogNonneg::ZERO);
    }
    Ok(LogNonneg::from_log(d.iter().map(|x| x.ln()).sum()))
}

/// `(1/n!) 1† M^{⊗n} 1` with `1` the indicator of permutations in `[n]^n`.
pub fn per_tensor(a: &CMatrix) -> Result<Complex64> {
    let n = check_square(a)?;
    if n > TENSOR_MAX_N {
        return Err(Error::TooLarge { n, max: TENSOR_MAX_N, method: "tensor" });
    }
    let mut power = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for _ in 0..n {
        power = power.kronecker(a);
    }
    let dim = n.pow(n as u32);
    // A multi-index in [n]^n is a permutation iff its base-n digits are distinct.
    let indicator: Vec<bool> = (0..dim)
        .map(|t| {
            let mut seen = 0u32;
            let mut rest = t;
            for _ in 0..n {
                let digit = rest % n;
                rest /= n;
                if seen & (1 << digit) != 0 {
                    return false;
                }
                seen |= 1 << digit;
            }
            true
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for s in (0..dim).filter(|&s| indicator[s]) {
        for t in (0..dim).filter(|&t| indicator[t]) {
            total += power[(s, t)];
        }
    }
    Ok(total / ln_factorial(n).exp().round())
}
