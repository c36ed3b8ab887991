//! Point-prediction errors, interval coverage and the relevance ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::PredictiveSummary;
use crate::sampler::ChainTrace;

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    if a == 0 {
        return Err(Error::config("metrics need at least one test point"));
    }
    Ok(())
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let ss: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((ss / pred.len() as f64).sqrt())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let s: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum();
    Ok(s / pred.len() as f64)
}

/// Fraction of `truth` inside the 95% intervals (inclusive).
pub fn interval_coverage(summary: &PredictiveSummary, truth: &[f64]) -> Result<f64> {
    check_lengths(summary.len(), truth.len())?;
    let hits = summary
        .points
        .iter()
        .zip(truth)
        .filter(|(p, &t)| t >= p.lo && t <= p.hi)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Fraction of `truth` within `mean ± k·sd` (inclusive).
pub fn sigma_coverage(summary: &PredictiveSummary, truth: &[f64], k: f64) -> Result<f64> {
    check_lengths(summary.len(), truth.len())?;
    let hits = summary
        .points
        .iter()
        .zip(truth)
        .filter(|(p, &t)| (t - p.mean).abs() <= k * p.sd)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Posterior-mean lengthscale per input (mean of `exp(log ℓ_q)` over the
/// post-burn-in iterations).
pub fn posterior_mean_lengthscales(trace: &ChainTrace, burn_in: usize) -> Vec<f64> {
    let kept = trace.post_burn_in(burn_in);
    let n = kept.len() as f64;
    (0..trace.dim)
        .map(|q| kept.iter().map(|r| r.theta.log_lengthscales[q].exp()).sum::<f64>() / n)
        .collect()
}

/// Mean posterior lengthscale over the relevant inputs divided by the mean
/// over the irrelevant ones. `None` unless `relevant` (zero-based) is a
/// non-empty strict subset of the inputs.
pub fn relevance_ratio_from_means(lengthscales: &[f64], relevant: &[usize]) -> Option<f64> {
    let d = lengthscales.len();
    let mut is_rel = vec![false; d];
    for &q in relevant {
        *is_rel.get_mut(q)? = true;
    }
    let (mut rel_sum, mut rel_n, mut irr_sum, mut irr_n) = (0.0, 0usize, 0.0, 0usize);
    for (q, &l) in lengthscales.iter().enumerate() {
        if is_rel[q] {
            rel_sum += l;
            rel_n += 1;
        } else {
            irr_sum += l;
            irr_n += 1;
        }
    }
    if rel_n == 0 || irr_n == 0 {
        return None;
    }
    Some((rel_sum / rel_n as f64) / (irr_sum / irr_n as f64))
}

pub fn relevance_ratio(trace: &ChainTrace, burn_in: usize, relevant: &[usize]) -> Option<f64> {
    if trace.post_burn_in(burn_in).is_empty() {
        return None;
    }
    relevance_ratio_from_means(&posterior_mean_lengthscales(trace, burn_in), relevant)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rmse: f64,
    pub mae: f64,
    pub coverage95: f64,
    pub cov_1sigma: f64,
    pub cov_2sigma: f64,
    pub relevance_ratio: Option<f64>,
    /// Post-burn-in acceptance rate of the chain.
    pub acceptance_rate: f64,
}

impl MetricsReport {
    pub fn evaluate(
        summary: &PredictiveSummary,
        truth: &[f64],
        trace: &ChainTrace,
        burn_in: usize,
        relevant: Option<&[usize]>,
    ) -> Result<Self> {
        let means = summary.means();
        Ok(Self {
            rmse: rmse(&means, truth)?,
            mae: mae(&means, truth)?,
            coverage95: interval_coverage(summary, truth)?,
            cov_1sigma: sigma_coverage(summary, truth, 1.0)?,
            cov_2sigma: sigma_coverage(summary, truth, 2.0)?,
            relevance_ratio: relevant.and_then(|r| relevance_ratio(trace, burn_in, r)),
            acceptance_rate: trace.acceptance_rate(burn_in),
        })
    }

    /// `(name, value)` pairs in a fixed order; absent values are empty.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("rmse", self.rmse.to_string()),
            ("mae", self.mae.to_string()),
            ("coverage95", self.coverage95.to_string()),
            ("cov_1sigma", self.cov_1sigma.to_string()),
            ("cov_2sigma", self.cov_2sigma.to_string()),
            (
                "relevance_ratio",
                self.relevance_ratio.map(|v| v.to_string()).unwrap_or_default(),
            ),
            ("acceptance_rate", self.acceptance_rate.to_string()),
        ]
    }

    /// Flat `key=value` lines.
    pub fn to_key_value(&self) -> String {
        self.fields().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{HyperparamVector, PredictivePoint};
    use crate::priors::PriorKind;
    use crate::sampler::IterationRecord;
    use approx::assert_abs_diff_eq;

    fn summary(means: &[f64], sd: f64) -> PredictiveSummary {
        PredictiveSummary {
            points: means
                .iter()
                .map(|&m| PredictivePoint {
                    mean: m,
                    sd,
                    lo: m - 1.959964 * sd,
                    hi: m + 1.959964 * sd,
                })
                .collect(),
        }
    }

    fn constant_trace(ls: &[f64], len: usize) -> ChainTrace {
        let theta = HyperparamVector::new(ls.iter().map(|l| l.ln()).collect(), -2.0).unwrap();
        let rec = IterationRecord {
            iteration: 0,
            theta: theta.clone(),
            accepted: false,
            log_lik: 0.0,
            log_prior: 0.0,
            log_wishart: None,
            alpha: 0.0,
            log_target_proposal: 0.0,
            log_target_current: 0.0,
            scale_drift: None,
        };
        ChainTrace {
            kind: PriorKind::NormalOnly,
            dim: ls.len(),
            learn_noise: true,
            switch_on: None,
            window_n: 3,
            burn_in: 1,
            thin: 1,
            initial: theta,
            records: (1..=len)
                .map(|t| IterationRecord {
                    iteration: t,
                    ..rec.clone()
                })
                .collect(),
        }
    }

    #[test]
    fn error_metrics() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(mae(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 3.5);
        assert!(rmse(&[0.0], &[0.0, 1.0]).is_err());
        assert!(mae(&[], &[]).is_err());
    }

    #[test]
    fn translation_invariance() {
        let p = [0.3, -1.2, 4.0];
        let t = [0.1, -1.0, 3.5];
        let c = 0.25; // exactly representable shifts keep the differences exact
        let ps: Vec<f64> = p.iter().map(|v| v + c).collect();
        let ts: Vec<f64> = t.iter().map(|v| v + c).collect();
        assert_abs_diff_eq!(rmse(&p, &t).unwrap(), rmse(&ps, &ts).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(mae(&p, &t).unwrap(), mae(&ps, &ts).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn coverage_examples() {
        let s = summary(&[1.0, 2.0, 3.0], 0.5);
        let at_mean = [1.0, 2.0, 3.0];
        assert_eq!(interval_coverage(&s, &at_mean).unwrap(), 1.0);
        assert_eq!(sigma_coverage(&s, &at_mean, 1.0).unwrap(), 1.0);
        assert_eq!(sigma_coverage(&s, &at_mean, 2.0).unwrap(), 1.0);

        let off: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|m| m + 1.5 * 0.5).collect();
        assert_eq!(sigma_coverage(&s, &off, 1.0).unwrap(), 0.0);
        assert_eq!(sigma_coverage(&s, &off, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn relevance_ratio_examples() {
        let tr = constant_trace(&[0.5, 5.0, 0.5, 5.0], 10);
        assert_abs_diff_eq!(relevance_ratio(&tr, 2, &[0, 2]).unwrap(), 0.1, epsilon = 1e-12);
        let tr = constant_trace(&[2.0, 2.0, 2.0], 10);
        assert_abs_diff_eq!(relevance_ratio(&tr, 2, &[1]).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(relevance_ratio(&tr, 2, &[0, 1, 2]), None);
        assert_eq!(relevance_ratio(&tr, 2, &[]), None);
        assert_eq!(relevance_ratio(&tr, 2, &[7]), None);
    }

    #[test]
    fn key_value_record() {
        let r = MetricsReport {
            rmse: 0.5,
            mae: 0.25,
            coverage95: 1.0,
            cov_1sigma: 0.75,
            cov_2sigma: 1.0,
            relevance_ratio: None,
            acceptance_rate: 0.3,
        };
        let kv = r.to_key_value();
        assert!(kv.starts_with("rmse=0.5\nmae=0.25\n"));
        assert!(kv.contains("relevance_ratio=\n"));
    }
}
