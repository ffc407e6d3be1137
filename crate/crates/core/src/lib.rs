pub mod bounds;
pub mod cli;
pub mod error;
pub mod matrix;
pub mod permanent;
pub mod relax;
pub mod rng;
pub mod tight;

pub use error::{Error, Result};
pub use matrix::{CholeskyFactor, ComplexVector, HermitianMatrix, Spectrum};
pub use permanent::LogNonneg;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
