//! Random-walk Metropolis–Hastings over the log-hyperparameters, with the
//! self-assembled Wishart factor switched on at iteration `N₀`.
//!
//! Iterations are numbered `t = 1..=n_iter`. Every post-step state is pushed
//! into a look-back buffer of `n − 1` states (repeating the retained state on
//! rejection), so from `t = N₀` on the window `{θ_{t−n+1}, …, θ_{t−1}, θ*_t}`
//! is always available.

mod config;
mod step;
mod trace;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{InitStrategy, ResolvedSampler, SamplerConfig};
pub use step::{
    acceptance_probability, log_target, mh_step, propose, ChainState, StepOutcome, TargetContext, TargetEval,
};
pub use trace::{ChainTrace, IterationRecord};

use crate::error::{Error, Result};
use crate::gp::{Dataset, HyperparamVector};
use crate::priors::{LookbackBuffer, PriorSpec};

const MAX_INIT_ATTEMPTS: usize = 1000;

/// Draws starting coordinates according to `init`.
pub fn draw_initial<R: Rng + ?Sized>(
    spec: &PriorSpec,
    init: &InitStrategy,
    learn_noise: bool,
    rng: &mut R,
) -> Vec<f64> {
    let m = spec.n_coords();
    match *init {
        InitStrategy::Prior => (0..m)
            .map(|k| {
                if spec.kind.has_normal() {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    spec.normal_mean[k] + spec.normal_sd[k] * z
                } else {
                    rng.random_range(spec.uniform_lo[k]..spec.uniform_hi[k])
                }
            })
            .collect(),
        InitStrategy::Normal { mean, sd } => (0..m)
            .map(|k| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                (mean + sd * z).clamp(spec.uniform_lo[k], spec.uniform_hi[k])
            })
            .collect(),
        InitStrategy::Fixed {
            log_lengthscale,
            log_noise_sd,
        } => {
            let mut c = vec![log_lengthscale; m];
            if learn_noise {
                c[m - 1] = log_noise_sd;
            }
            c
        }
    }
}

/// Runs a full chain. Deterministic given `config.seed`.
pub fn run_chain(data: &Dataset, spec: &PriorSpec, config: &SamplerConfig) -> Result<ChainTrace> {
    let r = config.resolve(data.len(), data.dim(), spec.kind)?;
    run_resolved(data, spec, &r)
}

pub fn run_resolved(data: &Dataset, spec: &PriorSpec, r: &ResolvedSampler) -> Result<ChainTrace> {
    let m = HyperparamVector::n_coords(data.dim(), r.learn_noise);
    spec.validate(m)?;
    let ctx = TargetContext {
        data,
        spec,
        learn_noise: r.learn_noise,
        jitter: r.jitter,
        window_n: r.window_n,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);

    let mut state = None;
    for _ in 0..MAX_INIT_ATTEMPTS {
        let coords = draw_initial(spec, &r.init, r.learn_noise, &mut rng);
        let theta = HyperparamVector::from_coords(&coords, data.dim(), r.learn_noise, r.fixed_log_noise_sd)?;
        let s = ChainState::new(theta, &ctx)?;
        if s.log_target_without_wishart().is_finite() {
            state = Some(s);
            break;
        }
    }
    let mut state = state.ok_or_else(|| Error::Data("no finite-target starting point found".into()))?;
    let initial = state.theta.clone();

    let wishart = spec.kind.has_wishart();
    let mut buffer = LookbackBuffer::new(r.window_n)?;
    let mut records = Vec::with_capacity(r.n_iter);
    let mut previous_scale: Option<nalgebra::DMatrix<f64>> = None;
    for t in 1..=r.n_iter {
        let proposal = propose(&state.theta, &r.step_sds, &mut rng)?;
        let u: f64 = rng.random();
        let active = wishart && t >= r.switch_on;
        let outcome = mh_step(&ctx, state, proposal, t, active, &mut buffer, u)?;
        let mut record = outcome.record;
        let scale = outcome.scale.map(|v| v.into_entries());
        if let (Some(now), Some(prev)) = (&scale, &previous_scale) {
            record.scale_drift = Some((now - prev).norm());
        }
        previous_scale = scale;
        records.push(record);
        state = outcome.state;
    }

    Ok(ChainTrace {
        kind: spec.kind,
        dim: data.dim(),
        learn_noise: r.learn_noise,
        switch_on: wishart.then_some(r.switch_on),
        window_n: r.window_n,
        burn_in: r.burn_in,
        thin: r.thin,
        initial,
        records,
    })
}
