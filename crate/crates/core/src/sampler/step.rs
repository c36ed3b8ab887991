use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gp::{gp_log_likelihood, kernel_matrix, with_diagonal, CovMatrix, Dataset, HyperparamVector};
use crate::priors::{assemble_scale_matrix, log_marginal_prior, wishart_log_density, LookbackBuffer, PriorSpec};

use super::trace::IterationRecord;

/// Componentwise Normal random walk in log coordinates. The number of step
/// sds decides whether the noise coordinate moves (`d + 1`) or stays put
/// (`d`).
pub fn propose<R: Rng + ?Sized>(current: &HyperparamVector, step_sds: &[f64], rng: &mut R) -> Result<HyperparamVector> {
    let d = current.dim();
    let learn_noise = match step_sds.len() {
        m if m == d + 1 => true,
        m if m == d => false,
        m => {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                got: m,
            })
        }
    };
    let mut coords = current.coords(learn_noise);
    for (c, sd) in coords.iter_mut().zip(step_sds) {
        let z: f64 = rng.sample(StandardNormal);
        *c += sd * z;
    }
    HyperparamVector::from_coords(&coords, d, learn_noise, current.log_noise_sd)
}

/// Everything the target density needs besides the hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct TargetContext<'a> {
    pub data: &'a Dataset,
    pub spec: &'a PriorSpec,
    pub learn_noise: bool,
    pub jitter: f64,
    /// Wishart degrees of freedom (the look-back window length).
    pub window_n: usize,
}

/// Noise-free kernel matrix plus jitter of a state, factorised on demand.
#[derive(Clone, Debug, Default)]
pub(crate) enum FreeCov {
    #[default]
    Unknown,
    Failed,
    Ready(CovMatrix),
}

impl FreeCov {
    fn from_kernel(k: nalgebra::DMatrix<f64>, jitter: f64) -> Self {
        let mut c = with_diagonal(k, None, jitter);
        match c.factor() {
            Ok(()) => FreeCov::Ready(c),
            Err(_) => FreeCov::Failed,
        }
    }
}

/// Log-target of one hyperparameter vector, split into its parts.
#[derive(Clone, Debug)]
pub struct TargetEval {
    pub total: f64,
    pub log_lik: f64,
    pub log_prior: f64,
    pub log_wishart: Option<f64>,
    pub(crate) free_cov: FreeCov,
}

/// `log L(θ) + Σ log π₀(θ_k) [+ log π_W(Σ_θ | V)]`, with the Wishart term
/// present iff `scale` is given. Any failed factorisation or out-of-support
/// prior gives a total of `-inf`.
pub fn log_target(theta: &HyperparamVector, ctx: &TargetContext<'_>, scale: Option<&CovMatrix>) -> Result<TargetEval> {
    let coords = theta.coords(ctx.learn_noise);
    if coords.len() != ctx.spec.n_coords() {
        return Err(Error::DimensionMismatch {
            expected: ctx.spec.n_coords(),
            got: coords.len(),
        });
    }
    let log_prior = log_marginal_prior(&coords, ctx.spec);
    let fail = |log_lik: f64, log_wishart: Option<f64>, free_cov: FreeCov| TargetEval {
        total: f64::NEG_INFINITY,
        log_lik,
        log_prior,
        log_wishart,
        free_cov,
    };
    if log_prior == f64::NEG_INFINITY {
        return Ok(fail(f64::NEG_INFINITY, None, FreeCov::Unknown));
    }
    let k = kernel_matrix(&ctx.data.x, &theta.log_lengthscales)?;
    let lik_cov = with_diagonal(k.clone(), Some(theta.noise_variance()), ctx.jitter);
    let log_lik = match gp_log_likelihood(&ctx.data.y, &lik_cov) {
        Ok(v) => v,
        Err(Error::NotPositiveDefinite { .. }) => return Ok(fail(f64::NEG_INFINITY, None, FreeCov::Unknown)),
        Err(e) => return Err(e),
    };
    let Some(v) = scale else {
        return Ok(TargetEval {
            total: log_lik + log_prior,
            log_lik,
            log_prior,
            log_wishart: None,
            free_cov: FreeCov::Unknown,
        });
    };
    let free_cov = FreeCov::from_kernel(k, ctx.jitter);
    let FreeCov::Ready(sigma) = &free_cov else {
        return Ok(fail(log_lik, Some(f64::NEG_INFINITY), free_cov));
    };
    let log_wishart = wishart_log_density(sigma, v, ctx.window_n, false)?;
    Ok(TargetEval {
        total: log_lik + log_prior + log_wishart,
        log_lik,
        log_prior,
        log_wishart: Some(log_wishart),
        free_cov,
    })
}

/// `min(1, exp(proposal − current))`, with `-inf` proposals never accepted
/// and a `-inf` current state always left for a finite proposal.
pub fn acceptance_probability(log_target_proposal: f64, log_target_current: f64) -> f64 {
    if log_target_proposal.is_nan() || log_target_proposal == f64::NEG_INFINITY {
        0.0
    } else if log_target_current == f64::NEG_INFINITY {
        1.0
    } else {
        (log_target_proposal - log_target_current).exp().min(1.0)
    }
}

/// Current chain state with its cached target parts.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub theta: HyperparamVector,
    pub log_lik: f64,
    pub log_prior: f64,
    free_cov: FreeCov,
}

impl ChainState {
    /// Evaluates `theta` without the Wishart factor.
    pub fn new(theta: HyperparamVector, ctx: &TargetContext<'_>) -> Result<Self> {
        let eval = log_target(&theta, ctx, None)?;
        Ok(Self::from_eval(theta, eval))
    }

    fn from_eval(theta: HyperparamVector, eval: TargetEval) -> Self {
        Self {
            theta,
            log_lik: eval.log_lik,
            log_prior: eval.log_prior,
            free_cov: eval.free_cov,
        }
    }

    pub fn log_target_without_wishart(&self) -> f64 {
        self.log_lik + self.log_prior
    }

    /// Wishart term of this state's noise-free covariance against `scale`.
    fn log_wishart(&mut self, scale: &CovMatrix, ctx: &TargetContext<'_>) -> Result<f64> {
        if matches!(self.free_cov, FreeCov::Unknown) {
            let k = kernel_matrix(&ctx.data.x, &self.theta.log_lengthscales)?;
            self.free_cov = FreeCov::from_kernel(k, ctx.jitter);
        }
        match &self.free_cov {
            FreeCov::Ready(sigma) => wishart_log_density(sigma, scale, ctx.window_n, false),
            _ => Ok(f64::NEG_INFINITY),
        }
    }
}

/// Result of one Metropolis–Hastings iteration.
#[derive(Debug)]
pub struct StepOutcome {
    pub state: ChainState,
    pub record: IterationRecord,
    /// The scale matrix `V_t`, when the Wishart factor was active and it
    /// could be factorised.
    pub scale: Option<CovMatrix>,
}

/// One Metropolis–Hastings iteration at iteration index `t`.
///
/// With the Wishart factor active, `V_t` is assembled from the buffered
/// states and the proposal, and both the proposal and the current state are
/// scored against that same `V_t`. The proposal is accepted iff `u < α`.
/// The post-step state (the proposal on acceptance, the retained state on
/// rejection) is pushed into `buffer`.
pub fn mh_step(
    ctx: &TargetContext<'_>,
    mut current: ChainState,
    proposal: HyperparamVector,
    t: usize,
    wishart_active: bool,
    buffer: &mut LookbackBuffer,
    u: f64,
) -> Result<StepOutcome> {
    let mut scale = None;
    let (prop_eval, current_total, current_wishart) = if wishart_active {
        match assemble_scale_matrix(buffer, &proposal, &ctx.data.x, ctx.jitter) {
            Ok(v) => {
                let prop = log_target(&proposal, ctx, Some(&v))?;
                let cw = current.log_wishart(&v, ctx)?;
                let total = current.log_target_without_wishart() + cw;
                scale = Some(v);
                (Some(prop), total, Some(cw))
            }
            Err(Error::NotPositiveDefinite { .. }) => (None, current.log_target_without_wishart(), None),
            Err(e) => return Err(e),
        }
    } else {
        let prop = log_target(&proposal, ctx, None)?;
        (Some(prop), current.log_target_without_wishart(), None)
    };

    let proposal_total = prop_eval.as_ref().map_or(f64::NEG_INFINITY, |e| e.total);
    let alpha = acceptance_probability(proposal_total, current_total);
    let accepted = u < alpha;

    let (state, log_wishart) = match prop_eval {
        Some(eval) if accepted => {
            let lw = eval.log_wishart;
            (ChainState::from_eval(proposal, eval), lw)
        }
        _ => (current, current_wishart),
    };
    buffer.push(state.theta.clone());
    let record = IterationRecord {
        iteration: t,
        theta: state.theta.clone(),
        accepted,
        log_lik: state.log_lik,
        log_prior: state.log_prior,
        log_wishart,
        alpha,
        log_target_proposal: proposal_total,
        log_target_current: current_total,
        scale_drift: None,
    };
    Ok(StepOutcome { state, record, scale })
}
