use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{HyperparamVector, DEFAULT_JITTER};
use crate::priors::PriorKind;

/// Chain settings as written in a configuration file. Optional fields are
/// filled in by [`SamplerConfig::resolve`] once the training-set size is
/// known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub n_iter: usize,
    /// Defaults to `max(N₀ + n, n_iter / 2)`.
    pub burn_in: Option<usize>,
    /// First iteration with the Wishart factor (N₀). Defaults to `n + 1`.
    pub wishart_switch_on: Option<usize>,
    /// Look-back window length, which is also the Wishart degrees of
    /// freedom. Defaults to `p + 2`.
    pub window_n: Option<usize>,
    /// Random-walk step sd applied to every log-coordinate.
    pub step_sd: f64,
    /// Per-coordinate step sds; overrides `step_sd` when present.
    pub step_sds: Option<Vec<f64>>,
    pub thin: usize,
    pub seed: u64,
    pub jitter: f64,
    /// Pins the observation-noise sd, on the standardised response scale,
    /// instead of learning it.
    pub fixed_noise_sd: Option<f64>,
    pub init: InitStrategy,
}

/// How the starting point of a chain is drawn.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitStrategy {
    /// From the specification's own marginal prior: Normal for the Normal
    /// specifications, uniform on the box for the Wishart-only one.
    #[default]
    Prior,
    /// From Normal(mean, sd) on every log-coordinate, clamped into the box,
    /// whatever the specification. All specifications then share the start.
    Normal { mean: f64, sd: f64 },
    /// A fixed starting point (log-lengthscale shared by all inputs).
    Fixed { log_lengthscale: f64, log_noise_sd: f64 },
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_iter: 10_000,
            burn_in: None,
            wishart_switch_on: None,
            window_n: None,
            step_sd: 0.08,
            step_sds: None,
            thin: 10,
            seed: 0,
            jitter: DEFAULT_JITTER,
            fixed_noise_sd: None,
            init: InitStrategy::default(),
        }
    }
}

/// Fully specified chain settings for one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedSampler {
    pub n_iter: usize,
    pub burn_in: usize,
    pub switch_on: usize,
    pub window_n: usize,
    pub step_sds: Vec<f64>,
    pub thin: usize,
    pub seed: u64,
    pub jitter: f64,
    pub learn_noise: bool,
    pub fixed_log_noise_sd: f64,
    pub init: InitStrategy,
}

impl SamplerConfig {
    /// Resolves defaults for `p` training points in `d` dimensions and
    /// checks the chain invariants.
    pub fn resolve(&self, p: usize, d: usize, kind: PriorKind) -> Result<ResolvedSampler> {
        if self.n_iter == 0 {
            return Err(Error::config("n_iter must be positive"));
        }
        if self.thin == 0 {
            return Err(Error::config("thin must be positive"));
        }
        if !(self.jitter >= 0.0) || !self.jitter.is_finite() {
            return Err(Error::config("jitter must be finite and non-negative"));
        }
        match self.init {
            InitStrategy::Normal { mean, sd } if !(sd > 0.0) || !mean.is_finite() || !sd.is_finite() => {
                return Err(Error::config("normal init needs a finite mean and positive sd"))
            }
            InitStrategy::Fixed {
                log_lengthscale,
                log_noise_sd,
            } if !log_lengthscale.is_finite() || !log_noise_sd.is_finite() => {
                return Err(Error::config("fixed init must be finite"))
            }
            _ => {}
        }
        let learn_noise = self.fixed_noise_sd.is_none();
        let fixed_log_noise_sd = match self.fixed_noise_sd {
            Some(sd) if sd > 0.0 && sd.is_finite() => sd.ln(),
            Some(_) => return Err(Error::config("fixed_noise_sd must be positive")),
            None => 0.0,
        };
        let window_n = self.window_n.unwrap_or(p + 2);
        let switch_on = self.wishart_switch_on.unwrap_or(window_n + 1);
        if kind.has_wishart() {
            if window_n <= p {
                return Err(Error::config(format!(
                    "window_n = {window_n} must exceed the training-set size p = {p}"
                )));
            }
            if switch_on <= window_n {
                return Err(Error::config(format!(
                    "wishart_switch_on = {switch_on} must exceed window_n = {window_n}"
                )));
            }
        }
        let burn_in = self
            .burn_in
            .unwrap_or_else(|| (switch_on + window_n).max(self.n_iter / 2));
        if burn_in == 0 || burn_in >= self.n_iter {
            return Err(Error::config(format!(
                "burn_in = {burn_in} must be positive and below n_iter = {}",
                self.n_iter
            )));
        }
        let m = HyperparamVector::n_coords(d, learn_noise);
        let step_sds = match &self.step_sds {
            Some(v) if v.len() != m => {
                return Err(Error::config(format!("step_sds has length {}, expected {m}", v.len())))
            }
            Some(v) => v.clone(),
            None => vec![self.step_sd; m],
        };
        if step_sds.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::config("step sds must be positive"));
        }
        Ok(ResolvedSampler {
            n_iter: self.n_iter,
            burn_in,
            switch_on,
            window_n,
            step_sds,
            thin: self.thin,
            seed: self.seed,
            jitter: self.jitter,
            learn_noise,
            fixed_log_noise_sd,
            init: self.init.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_training_size() {
        let r = SamplerConfig::default()
            .resolve(150, 15, PriorKind::WishartOnly)
            .unwrap();
        assert_eq!(r.window_n, 152);
        assert_eq!(r.switch_on, 153);
        assert_eq!(r.burn_in, 5000);
        assert_eq!(r.step_sds, vec![0.08; 16]);
        assert!(r.learn_noise);

        let cfg = SamplerConfig {
            n_iter: 400,
            ..Default::default()
        };
        let r = cfg.resolve(150, 15, PriorKind::NormalOnly).unwrap();
        assert_eq!(r.burn_in, 305);
    }

    #[test]
    fn window_constraints() {
        let cfg = SamplerConfig {
            window_n: Some(150),
            ..Default::default()
        };
        assert!(cfg.resolve(150, 2, PriorKind::WishartOnly).is_err());
        // Only enforced when the Wishart factor is used.
        assert!(cfg.resolve(150, 2, PriorKind::NormalOnly).is_ok());

        let cfg = SamplerConfig {
            window_n: Some(10),
            wishart_switch_on: Some(10),
            ..Default::default()
        };
        assert!(cfg.resolve(5, 2, PriorKind::WishartPlusNormal).is_err());
    }

    #[test]
    fn burn_in_and_steps_validated() {
        let cfg = SamplerConfig {
            n_iter: 100,
            burn_in: Some(100),
            ..Default::default()
        };
        assert!(cfg.resolve(5, 1, PriorKind::NormalOnly).is_err());
        let cfg = SamplerConfig {
            step_sds: Some(vec![0.1]),
            ..Default::default()
        };
        assert!(cfg.resolve(5, 1, PriorKind::NormalOnly).is_err());
        let cfg = SamplerConfig {
            step_sds: Some(vec![0.1]),
            fixed_noise_sd: Some(0.05),
            ..Default::default()
        };
        let r = cfg.resolve(5, 1, PriorKind::NormalOnly).unwrap();
        assert!(!r.learn_noise);
        assert_eq!(r.fixed_log_noise_sd, 0.05f64.ln());
        let cfg = SamplerConfig {
            step_sd: 0.0,
            ..Default::default()
        };
        assert!(cfg.resolve(5, 1, PriorKind::NormalOnly).is_err());
    }
}
