//! Marginal hyperparameter priors, the look-back scale matrix, and the
//! Wishart log-density on kernel-induced covariance matrices.

mod lookback;
mod marginal;
mod wishart;

pub use lookback::{assemble_scale_matrix, exact_sum, lookback_mean, LookbackBuffer, ESCALATED_JITTER};
pub use marginal::{log_marginal_prior, PriorKind, PriorSettings, PriorSpec};
pub use wishart::{log_det_coefficient, log_multivariate_gamma, wishart_log_density};
