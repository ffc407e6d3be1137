use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not hermitian: entries ({row}, {col}) and ({col}, {row}) differ by {asymmetry:.3e}")]
    NotHermitian { row: usize, col: usize, asymmetry: f64 },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.6e} (eigenvector peaks at index {index})")]
    NotPsd { min_eigenvalue: f64, index: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("scale factor {index} is not positive: {value}")]
    NonPositiveScale { index: usize, value: f64 },
    #[error("eigensolver did not converge")]
    ConvergenceFailure,
    #[error("size {n} exceeds the limit {max} for {method}")]
    TooLarge { n: usize, max: usize, method: &'static str },
    #[error("permanent evaluated to {value:.6e}, below roundoff of a PSD matrix")]
    NegativeResult { value: f64 },
    #[error("diagonal entry {index} is negative: {value}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("diagonal entry {index} is zero")]
    ZeroDiagonal { index: usize },
    #[error("point is outside the barrier domain (margin {margin:.3e})")]
    Infeasible { margin: f64 },
    #[error("barrier path following stopped after {stages} stages with gap bound {gap:.3e}")]
    StageLimit { stages: usize, gap: f64 },
    #[error("newton line search failed at stage {stage}")]
    NewtonFailure { stage: usize },
    #[error("no eigenvalue within {eig_tol:.1e} of one; relaxation solution is not optimal")]
    EmptyEigenspace { eig_tol: f64 },
    #[error("every sampled direction has a zero coordinate")]
    DegenerateSamples,
    #[error("vector is orthogonal to every ensemble column")]
    ZeroDenominator,
    #[error("sampled vectors do not span C^{d}")]
    RankDeficient { d: usize },
    #[error("ensemble columns do not span C^{d}")]
    SpanFailure { d: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TooLarge { .. } => 3,
            Error::ConvergenceFailure
            | Error::StageLimit { .. }
            | Error::NewtonFailure { .. }
            | Error::Infeasible { .. }
            | Error::EmptyEigenspace { .. }
            | Error::DegenerateSamples => 4,
            _ => 2,
        }
    }
}
