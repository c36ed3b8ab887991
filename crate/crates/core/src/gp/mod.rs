//! ARD squared-exponential GP: covariance construction, Cholesky-based
//! likelihood and predictive distributions.

mod cov;
mod dataset;
mod hyper;
mod kernel;
mod predict;

pub use cov::{cholesky_factor, CovMatrix};
pub use dataset::{Dataset, Standardizer};
pub use hyper::HyperparamVector;
pub(crate) use kernel::with_diagonal;
pub use kernel::{ard_se_kernel, build_kernel_matrix, cross_kernel, kernel_matrix};
pub use predict::{
    gp_log_likelihood, gp_predict, mixture_moments, mixture_predictive, PredictivePoint, PredictiveSummary, Z_95,
};

/// Diagonal jitter added to every factorised matrix unless configured otherwise.
pub const DEFAULT_JITTER: f64 = 1e-8;
