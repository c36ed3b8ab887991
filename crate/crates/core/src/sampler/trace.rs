use std::io::Write;

use crate::error::Result;
use crate::gp::HyperparamVector;
use crate::priors::PriorKind;

/// One chain iteration. The log-parts describe the post-step state, with
/// the Wishart term scored against this iteration's scale matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index `t`.
    pub iteration: usize,
    pub theta: HyperparamVector,
    pub accepted: bool,
    pub log_lik: f64,
    pub log_prior: f64,
    /// `None` before switch-on, and when the scale matrix could not be
    /// factorised.
    pub log_wishart: Option<f64>,
    pub alpha: f64,
    pub log_target_proposal: f64,
    pub log_target_current: f64,
    /// Frobenius norm of `V_t − V_{t−1}`, for `t > N₀` when both exist.
    pub scale_drift: Option<f64>,
}

/// Full record of a chain run.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace {
    pub kind: PriorKind,
    pub dim: usize,
    pub learn_noise: bool,
    /// Switch-on iteration, when the Wishart factor is used.
    pub switch_on: Option<usize>,
    pub window_n: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub initial: HyperparamVector,
    pub records: Vec<IterationRecord>,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records with `iteration > burn_in`.
    pub fn post_burn_in(&self, burn_in: usize) -> &[IterationRecord] {
        &self.records[burn_in.min(self.records.len())..]
    }

    pub fn acceptance_rate(&self, burn_in: usize) -> f64 {
        let kept = self.post_burn_in(burn_in);
        if kept.is_empty() {
            return 0.0;
        }
        kept.iter().filter(|r| r.accepted).count() as f64 / kept.len() as f64
    }

    /// Every `thin`-th post-burn-in state, ending at the final iteration.
    pub fn posterior_samples(&self, burn_in: usize, thin: usize) -> Vec<HyperparamVector> {
        let kept = self.post_burn_in(burn_in);
        let thin = thin.max(1);
        kept.iter()
            .rev()
            .step_by(thin)
            .map(|r| r.theta.clone())
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect()
    }

    pub fn coord_names(&self) -> Vec<String> {
        HyperparamVector::coord_names(self.dim, self.learn_noise)
    }

    /// Writes the trace as CSV: an optional `#` comment line, one header
    /// line, then one row per iteration. Absent values are empty fields.
    pub fn write_csv<W: Write>(&self, mut out: W, comment: Option<&str>) -> Result<()> {
        write_csv_inner(self, &mut out, comment).map_err(|e| crate::Error::io("<trace>", e))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_csv_inner<W: Write>(trace: &ChainTrace, out: &mut W, comment: Option<&str>) -> std::io::Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    let mut header = vec!["iteration".to_string(), "accepted".to_string()];
    header.extend(trace.coord_names());
    header.extend(
        [
            "log_lik",
            "log_prior",
            "log_wishart",
            "alpha",
            "scale_drift",
            "log_target_proposal",
            "log_target_current",
        ]
        .map(String::from),
    );
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for r in &trace.records {
        line.clear();
        line.push_str(&format!("{},{}", r.iteration, u8::from(r.accepted)));
        for c in r.theta.coords(trace.learn_noise) {
            line.push_str(&format!(",{c}"));
        }
        line.push_str(&format!(
            ",{},{},{},{},{},{},{}",
            r.log_lik,
            r.log_prior,
            opt(r.log_wishart),
            r.alpha,
            opt(r.scale_drift),
            r.log_target_proposal,
            r.log_target_current
        ));
        writeln!(out, "{line}")?;
    }
    Ok(())
}
