use std::f64::consts::{LN_2, PI};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gp::CovMatrix;

/// `log Γ_p(a) = p(p−1)/4 · log π + Σ_{j=1..p} log Γ(a + (1 − j)/2)`.
pub fn log_multivariate_gamma(p: usize, a: f64) -> f64 {
    let pf = p as f64;
    pf * (pf - 1.0) / 4.0 * PI.ln() + (1..=p).map(|j| ln_gamma(a + (1.0 - j as f64) / 2.0)).sum::<f64>()
}

/// Exponent `(n − p − 1)/2` on `|Σ|`; zero at `n = p + 1`.
pub fn log_det_coefficient(n: usize, p: usize) -> f64 {
    (n as f64 - p as f64 - 1.0) / 2.0
}

/// Wishart log-density of `sigma` with scale `v` and `n` degrees of freedom:
///
/// `((n−p−1)/2)·log|Σ| − (n/2)·log|V| − ½·tr(V⁻¹Σ)`
///
/// and, when `normalised`, minus `(np/2)·log 2 + log Γ_p(n/2)`. Both
/// matrices are factorised if they are not already; the trace is taken from
/// triangular solves against the factor of `v`.
pub fn wishart_log_density(sigma: &CovMatrix, v: &CovMatrix, n: usize, normalised: bool) -> Result<f64> {
    let p = sigma.dim();
    if v.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: v.dim(),
        });
    }
    if n <= p {
        return Err(Error::config(format!(
            "Wishart degrees of freedom must exceed the dimension (n = {n}, p = {p})"
        )));
    }
    let sigma = sigma.factored()?;
    let v = v.factored()?;
    let trace = v.trace_inv_times(&sigma);
    let log_det_sigma = sigma.log_det().expect("factored");
    let log_det_v = v.log_det().expect("factored");
    let nf = n as f64;
    let mut out = log_det_coefficient(n, p) * log_det_sigma - 0.5 * nf * log_det_v - 0.5 * trace;
    if normalised {
        out -= 0.5 * nf * p as f64 * LN_2 + log_multivariate_gamma(p, 0.5 * nf);
    }
    Ok(out)
}
