use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three prior specifications.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    /// Independent Normal priors on the log-hyperparameters.
    #[serde(alias = "normal")]
    NormalOnly,
    /// Flat box priors on the log-hyperparameters plus the Wishart factor.
    #[serde(alias = "wishart")]
    WishartOnly,
    /// Normal priors plus the Wishart factor.
    #[serde(alias = "wishart_normal")]
    WishartPlusNormal,
}

impl PriorKind {
    pub const ALL: [PriorKind; 3] = [
        PriorKind::NormalOnly,
        PriorKind::WishartOnly,
        PriorKind::WishartPlusNormal,
    ];

    pub fn has_wishart(self) -> bool {
        !matches!(self, PriorKind::NormalOnly)
    }

    pub fn has_normal(self) -> bool {
        !matches!(self, PriorKind::WishartOnly)
    }

    /// Short name used for output directories and table rows.
    pub fn name(self) -> &'static str {
        match self {
            PriorKind::NormalOnly => "normal",
            PriorKind::WishartOnly => "wishart",
            PriorKind::WishartPlusNormal => "wishart_normal",
        }
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" | "normal_only" => Ok(PriorKind::NormalOnly),
            "wishart" | "wishart_only" => Ok(PriorKind::WishartOnly),
            "wishart_normal" | "wishart_plus_normal" => Ok(PriorKind::WishartPlusNormal),
            other => Err(Error::config(format!("unknown prior specification '{other}'"))),
        }
    }
}

/// Marginal prior parameters over the `m` sampled log-coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub normal_mean: Vec<f64>,
    pub normal_sd: Vec<f64>,
    pub uniform_lo: Vec<f64>,
    pub uniform_hi: Vec<f64>,
}

impl PriorSpec {
    pub fn n_coords(&self) -> usize {
        self.normal_mean.len()
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        for (name, v) in [
            ("normal_mean", &self.normal_mean),
            ("normal_sd", &self.normal_sd),
            ("uniform_lo", &self.uniform_lo),
            ("uniform_hi", &self.uniform_hi),
        ] {
            if v.len() != m {
                return Err(Error::config(format!("{name} has length {}, expected {m}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::config(format!("{name} must be finite")));
            }
        }
        if self.normal_sd.iter().any(|&s| s <= 0.0) {
            return Err(Error::config("normal_sd entries must be positive"));
        }
        if self.uniform_lo.iter().zip(&self.uniform_hi).any(|(lo, hi)| lo >= hi) {
            return Err(Error::config("uniform bounds must satisfy lo < hi"));
        }
        Ok(())
    }
}

/// Config-level prior settings, expanded to a [`PriorSpec`] once the input
/// dimension is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSettings {
    pub normal_mean: f64,
    pub normal_sd: f64,
    /// Box on each log-lengthscale for the Wishart-only specification.
    pub lengthscale_bounds: [f64; 2],
    /// Box on the log noise sd for the Wishart-only specification.
    pub noise_bounds: [f64; 2],
}

impl Default for PriorSettings {
    fn default() -> Self {
        Self {
            normal_mean: 0.0,
            normal_sd: 1.5,
            lengthscale_bounds: [-6.0, 8.0],
            noise_bounds: [-7.0, 1.0],
        }
    }
}

impl PriorSettings {
    pub fn spec(&self, kind: PriorKind, dim: usize, learn_noise: bool) -> PriorSpec {
        let m = dim + usize::from(learn_noise);
        let mut uniform_lo = vec![self.lengthscale_bounds[0]; dim];
        let mut uniform_hi = vec![self.lengthscale_bounds[1]; dim];
        if learn_noise {
            uniform_lo.push(self.noise_bounds[0]);
            uniform_hi.push(self.noise_bounds[1]);
        }
        PriorSpec {
            kind,
            normal_mean: vec![self.normal_mean; m],
            normal_sd: vec![self.normal_sd; m],
            uniform_lo,
            uniform_hi,
        }
    }
}

/// Sum of the independent marginal log-priors at the coordinates `theta`.
///
/// Normal specifications use the Normal log-density; the Wishart-only
/// specification returns 0 inside the box (the constant is dropped) and
/// `-inf` outside.
pub fn log_marginal_prior(theta: &[f64], spec: &PriorSpec) -> f64 {
    debug_assert_eq!(theta.len(), spec.n_coords());
    if spec.kind.has_normal() {
        let half_log_2pi = 0.5 * (2.0 * PI).ln();
        theta
            .iter()
            .zip(spec.normal_mean.iter().zip(&spec.normal_sd))
            .map(|(&x, (&mu, &sd))| {
                let z = (x - mu) / sd;
                -0.5 * z * z - sd.ln() - half_log_2pi
            })
            .sum()
    } else {
        let inside = theta
            .iter()
            .zip(spec.uniform_lo.iter().zip(&spec.uniform_hi))
            .all(|(&x, (&lo, &hi))| x >= lo && x <= hi);
        if inside {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }
}
