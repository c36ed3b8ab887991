use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel hyperparameters in log coordinates.
///
/// The sampled coordinate vector is `[log ℓ_1, …, log ℓ_d]` followed by
/// `log σ_n` when the noise level is learnt, so `m = d + 1` with learnt noise
/// and `m = d` when it is pinned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperparamVector {
    pub log_lengthscales: Vec<f64>,
    pub log_noise_sd: f64,
}

impl HyperparamVector {
    pub fn new(log_lengthscales: Vec<f64>, log_noise_sd: f64) -> Result<Self> {
        if log_lengthscales.is_empty() {
            return Err(Error::config("at least one lengthscale is required"));
        }
        if !log_noise_sd.is_finite() || log_lengthscales.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("hyperparameters must be finite"));
        }
        Ok(Self {
            log_lengthscales,
            log_noise_sd,
        })
    }

    /// All lengthscales set to `lengthscale`.
    pub fn isotropic(dim: usize, lengthscale: f64, noise_sd: f64) -> Self {
        Self {
            log_lengthscales: vec![lengthscale.ln(); dim],
            log_noise_sd: noise_sd.ln(),
        }
    }

    pub fn dim(&self) -> usize {
        self.log_lengthscales.len()
    }

    pub fn lengthscales(&self) -> Vec<f64> {
        self.log_lengthscales.iter().map(|v| v.exp()).collect()
    }

    pub fn noise_sd(&self) -> f64 {
        self.log_noise_sd.exp()
    }

    pub fn noise_variance(&self) -> f64 {
        (2.0 * self.log_noise_sd).exp()
    }

    pub fn is_finite(&self) -> bool {
        self.log_noise_sd.is_finite() && self.log_lengthscales.iter().all(|v| v.is_finite())
    }

    /// Number of sampled coordinates.
    pub fn n_coords(dim: usize, learn_noise: bool) -> usize {
        dim + usize::from(learn_noise)
    }

    pub fn coords(&self, learn_noise: bool) -> Vec<f64> {
        let mut out = self.log_lengthscales.clone();
        if learn_noise {
            out.push(self.log_noise_sd);
        }
        out
    }

    /// Inverse of [`coords`](Self::coords). With `learn_noise == false` the
    /// noise level is taken from `fixed_log_noise_sd`.
    pub fn from_coords(coords: &[f64], dim: usize, learn_noise: bool, fixed_log_noise_sd: f64) -> Result<Self> {
        let m = Self::n_coords(dim, learn_noise);
        if coords.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: coords.len(),
            });
        }
        let log_noise_sd = if learn_noise { coords[dim] } else { fixed_log_noise_sd };
        Self::new(coords[..dim].to_vec(), log_noise_sd)
    }

    /// Column names for the sampled coordinates, as used in trace files.
    pub fn coord_names(dim: usize, learn_noise: bool) -> Vec<String> {
        let mut names: Vec<String> = (1..=dim).map(|q| format!("log_ell_{q}")).collect();
        if learn_noise {
            names.push("log_noise_sd".to_string());
        }
        names
    }
}
