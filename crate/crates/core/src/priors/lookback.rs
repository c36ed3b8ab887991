use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gp::{kernel_matrix, with_diagonal, CovMatrix, HyperparamVector};

/// Jitter used for the single retry when the scale matrix fails to factor.
pub const ESCALATED_JITTER: f64 = 1e-6;

/// The `n - 1` most recent chain states, oldest first.
#[derive(Clone, Debug)]
pub struct LookbackBuffer {
    capacity: usize,
    entries: VecDeque<HyperparamVector>,
}

impl LookbackBuffer {
    /// Buffer for a look-back window of `window_n` states (`window_n - 1`
    /// buffered plus the current proposal).
    pub fn new(window_n: usize) -> Result<Self> {
        if window_n < 2 {
            return Err(Error::config("look-back window must have length at least 2"));
        }
        Ok(Self {
            capacity: window_n - 1,
            entries: VecDeque::with_capacity(window_n - 1),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn window_n(&self) -> usize {
        self.capacity + 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Appends `theta`, evicting the oldest entry once full.
    pub fn push(&mut self, theta: HyperparamVector) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(theta);
    }

    pub fn iter(&self) -> impl Iterator<Item = &HyperparamVector> {
        self.entries.iter()
    }
}

/// Correctly rounded floating-point sum (Shewchuk's exact partials), so the
/// result does not depend on summation order.
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Round the partials (increasing magnitude, non-overlapping) to one value.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        n -= 1;
        let x = hi;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

fn check_ready(buffer: &LookbackBuffer, proposal: &HyperparamVector) -> Result<()> {
    if !buffer.is_full() {
        return Err(Error::WindowNotReady {
            have: buffer.len(),
            need: buffer.capacity(),
        });
    }
    if let Some(bad) = buffer.iter().find(|h| h.dim() != proposal.dim()) {
        return Err(Error::DimensionMismatch {
            expected: proposal.dim(),
            got: bad.dim(),
        });
    }
    Ok(())
}

/// Window mean `(proposal + Σ buffered) / n`, componentwise in log
/// coordinates. Order-invariant exactly.
pub fn lookback_mean(buffer: &LookbackBuffer, proposal: &HyperparamVector) -> Result<HyperparamVector> {
    check_ready(buffer, proposal)?;
    let n = buffer.window_n() as f64;
    let log_lengthscales = (0..proposal.dim())
        .map(|q| {
            let window =
                std::iter::once(proposal.log_lengthscales[q]).chain(buffer.iter().map(|h| h.log_lengthscales[q]));
            exact_sum(window) / n
        })
        .collect();
    let log_noise_sd =
        exact_sum(std::iter::once(proposal.log_noise_sd).chain(buffer.iter().map(|h| h.log_noise_sd))) / n;
    Ok(HyperparamVector {
        log_lengthscales,
        log_noise_sd,
    })
}

/// Noise-free kernel matrix at the window mean over the design points `x`,
/// plus `jitter`, factorised. A failed factorisation is retried once at
/// [`ESCALATED_JITTER`].
pub fn assemble_scale_matrix(
    buffer: &LookbackBuffer,
    proposal: &HyperparamVector,
    x: &DMatrix<f64>,
    jitter: f64,
) -> Result<CovMatrix> {
    let mean = lookback_mean(buffer, proposal)?;
    let k = kernel_matrix(x, &mean.log_lengthscales)?;
    let mut v = with_diagonal(k.clone(), None, jitter);
    match v.factor() {
        Ok(()) => Ok(v),
        Err(Error::NotPositiveDefinite { .. }) if jitter < ESCALATED_JITTER => {
            let mut v = with_diagonal(k, None, ESCALATED_JITTER);
            v.factor()?;
            Ok(v)
        }
        Err(e) => Err(e),
    }
}
