use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::{build_kernel_matrix, cross_kernel};
use super::{CovMatrix, Dataset, HyperparamVector};
use crate::error::{Error, Result};

/// Two-sided 95% standard-normal quantile.
pub const Z_95: f64 = 1.959964;

/// Multivariate-normal log-density `log N(y | 0, Σ)` via the Cholesky factor.
pub fn gp_log_likelihood(y: &DVector<f64>, sigma: &CovMatrix) -> Result<f64> {
    let p = sigma.dim();
    if y.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: y.len(),
        });
    }
    let sigma = sigma.factored()?;
    let alpha = sigma.solve_lower(y);
    let quad = alpha.norm_squared();
    let log_det = sigma.log_det().expect("factored");
    Ok(-0.5 * quad - 0.5 * log_det - 0.5 * p as f64 * (2.0 * PI).ln())
}

/// Zero-mean GP conditional at `test_x`, on the standardised scale.
///
/// Variances are for a new noisy observation (`k** + σ_n² − k*ᵀ K⁻¹ k*`) and
/// are floored at `jitter` (or the smallest positive double when the jitter
/// is zero).
pub fn gp_predict(
    train: &Dataset,
    test_x: &DMatrix<f64>,
    theta: &HyperparamVector,
    jitter: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if theta.dim() != train.dim() {
        return Err(Error::DimensionMismatch {
            expected: train.dim(),
            got: theta.dim(),
        });
    }
    let mut k = build_kernel_matrix(&train.x, theta, true, jitter)?;
    k.factor()?;
    let cross = cross_kernel(&train.x, test_x, &theta.log_lengthscales)?;
    let alpha = k.solve(&train.y);
    let means = cross.tr_mul(&alpha);
    let v = k.solve_lower_columns(&cross);
    let prior_var = 1.0 + theta.noise_variance();
    let floor = if jitter > 0.0 { jitter } else { f64::MIN_POSITIVE };
    let vars = v
        .column_iter()
        .map(|c| (prior_var - c.norm_squared()).max(floor))
        .collect();
    Ok((means.iter().copied().collect(), vars))
}

/// Posterior-averaged Gaussian summary at one test point, in original units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictivePoint {
    pub mean: f64,
    pub sd: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictiveSummary {
    pub points: Vec<PredictivePoint>,
}

impl PredictiveSummary {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }
}

/// Per-point `(mean, variance)` of an equal-weight mixture of Gaussians,
/// given `(means, variances)` for each component.
///
/// The mixture variance is the mean within-sample variance plus the
/// between-sample variance of the means, which equals the second moment
/// minus the squared mean.
pub fn mixture_moments(components: &[(Vec<f64>, Vec<f64>)]) -> Vec<(f64, f64)> {
    let Some(first) = components.first() else {
        return Vec::new();
    };
    let s = components.len() as f64;
    (0..first.0.len())
        .map(|j| {
            let mean = components.iter().map(|(m, _)| m[j]).sum::<f64>() / s;
            let within = components.iter().map(|(_, v)| v[j]).sum::<f64>() / s;
            let between = components
                .iter()
                .map(|(m, _)| (m[j] - mean) * (m[j] - mean))
                .sum::<f64>()
                / s;
            (mean, within + between)
        })
        .collect()
}

/// Posterior-averaged prediction: the mixture of [`gp_predict`] over the
/// samples, mapped back to original response units with a Gaussian 95%
/// interval.
pub fn mixture_predictive(
    train: &Dataset,
    test_x: &DMatrix<f64>,
    posterior_samples: &[HyperparamVector],
    jitter: f64,
) -> Result<PredictiveSummary> {
    if posterior_samples.is_empty() {
        return Err(Error::config("mixture prediction needs at least one posterior sample"));
    }
    let mut per_sample = Vec::with_capacity(posterior_samples.len());
    for theta in posterior_samples {
        per_sample.push(gp_predict(train, test_x, theta, jitter)?);
    }
    let points = mixture_moments(&per_sample)
        .into_iter()
        .map(|(mean, var)| {
            let sd = train.y_sd * var.sqrt();
            let mean = train.destandardise(mean);
            PredictivePoint {
                mean,
                sd,
                lo: mean - Z_95 * sd,
                hi: mean + Z_95 * sd,
            }
        })
        .collect();
    Ok(PredictiveSummary { points })
}
