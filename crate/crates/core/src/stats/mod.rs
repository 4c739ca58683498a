//! PCA, OLS with diagnostics, and the special functions behind the p-values.

pub mod linalg;
pub mod ols;
pub mod pca;
pub mod special;

pub use linalg::Matrix;
pub use ols::{ols_fit, ols_summary, ols_summary_with, InfoCriterion, OlsFit, RegressionSummary, SummaryOptions};
pub use pca::{cumulative_variance, pca, PcaResult};
pub use special::{chi2_sf, student_t_sf, student_t_two_sided};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("{n} observations; at least {required} needed")]
    TooFewObservations { n: usize, required: usize },
    /// `column` indexes the design matrix, where 0 is the intercept.
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
}
