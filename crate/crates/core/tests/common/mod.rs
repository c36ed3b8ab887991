//! Dense reference computations and fixtures shared by the integration
//! tests. The oracles use nalgebra's general inverse and LU determinant, not
//! the crate's Cholesky code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use wishart_gp::gp::{Dataset, HyperparamVector};

pub fn dense_log_likelihood(y: &DVector<f64>, sigma: &DMatrix<f64>) -> f64 {
    let p = y.len() as f64;
    let inv = sigma.clone().try_inverse().expect("invertible");
    let quad = (y.transpose() * &inv * y)[(0, 0)];
    -0.5 * quad - 0.5 * sigma.determinant().ln() - 0.5 * p * (2.0 * std::f64::consts::PI).ln()
}

pub fn dense_wishart(sigma: &DMatrix<f64>, v: &DMatrix<f64>, n: usize) -> f64 {
    let p = sigma.nrows() as f64;
    let v_inv = v.clone().try_inverse().expect("invertible");
    let trace = (&v_inv * sigma).trace();
    0.5 * (n as f64 - p - 1.0) * sigma.determinant().ln() - 0.5 * n as f64 * v.determinant().ln() - 0.5 * trace
}

/// Direct ARD squared-exponential kernel, `exp(−½ Σ ((x − x′)/ℓ)²)`.
pub fn naive_kernel(x: &DMatrix<f64>, log_ls: &[f64]) -> DMatrix<f64> {
    let p = x.nrows();
    DMatrix::from_fn(p, p, |i, j| {
        let r2: f64 = (0..x.ncols())
            .map(|q| ((x[(i, q)] - x[(j, q)]) / log_ls[q].exp()).powi(2))
            .sum();
        (-0.5 * r2).exp()
    })
}

/// `A Aᵀ + p·I` for a random Normal `A`.
pub fn random_spd(p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    &a * a.transpose() + DMatrix::identity(p, p) * p as f64
}

pub fn random_matrix(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// A dataset whose inputs and responses are used as given (no
/// standardisation).
pub fn raw_dataset(x: DMatrix<f64>, y: Vec<f64>) -> Dataset {
    let d = x.ncols();
    let y = DVector::from_vec(y);
    Dataset {
        x,
        y_original: y.clone(),
        y,
        input_means: vec![0.0; d],
        input_sds: vec![1.0; d],
        y_mean: 0.0,
        y_sd: 1.0,
        relevant_indices: None,
    }
}

/// Standard error of the mean of an autocorrelated series by batch means.
pub fn batch_means_se(values: &[f64], batches: usize) -> f64 {
    let size = values.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (var / batches as f64).sqrt()
}

pub const JITTER: f64 = 1e-8;

pub fn normal_log_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub fn plus_diag(mut m: DMatrix<f64>, v: f64) -> DMatrix<f64> {
    for i in 0..m.nrows() {
        m[(i, i)] += v;
    }
    m
}

/// Likelihood, marginal prior and Wishart parts of one state, all by dense
/// algebra.
pub fn hand_parts(data: &Dataset, theta: &HyperparamVector, v: &DMatrix<f64>, n: usize) -> (f64, f64, f64) {
    let k = naive_kernel(&data.x, &theta.log_lengthscales);
    let lik = dense_log_likelihood(&data.y, &plus_diag(k.clone(), theta.noise_variance() + JITTER));
    let prior: f64 = theta.coords(true).iter().map(|&c| normal_log_pdf(c, 0.0, 1.5)).sum();
    let w = dense_wishart(&plus_diag(k, JITTER), v, n);
    (lik, prior, w)
}
