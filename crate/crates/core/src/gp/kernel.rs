use nalgebra::DMatrix;

use super::{CovMatrix, HyperparamVector};
use crate::error::{Error, Result};

/// ARD squared-exponential correlation `exp(-½ Σ_q (x_q − x'_q)² / ℓ_q²)`.
pub fn ard_se_kernel(x: &[f64], x_prime: &[f64], log_lengthscales: &[f64]) -> Result<f64> {
    let d = log_lengthscales.len();
    for len in [x.len(), x_prime.len()] {
        if len != d {
            return Err(Error::DimensionMismatch { expected: d, got: len });
        }
    }
    let mut s = 0.0;
    for q in 0..d {
        let t = (x[q] - x_prime[q]) * (-log_lengthscales[q]).exp();
        s += t * t;
    }
    Ok((-0.5 * s).exp())
}

fn rows_row_major(x: &DMatrix<f64>) -> Vec<f64> {
    let (p, d) = x.shape();
    let mut out = Vec::with_capacity(p * d);
    for i in 0..p {
        out.extend(x.row(i).iter());
    }
    out
}

fn check_dim(x: &DMatrix<f64>, log_lengthscales: &[f64]) -> Result<()> {
    if x.ncols() != log_lengthscales.len() {
        return Err(Error::DimensionMismatch {
            expected: log_lengthscales.len(),
            got: x.ncols(),
        });
    }
    Ok(())
}

/// Noise-free kernel matrix over the rows of `x`. Each off-diagonal entry is
/// evaluated once and mirrored, and agrees bit-for-bit with
/// [`ard_se_kernel`].
pub fn kernel_matrix(x: &DMatrix<f64>, log_lengthscales: &[f64]) -> Result<DMatrix<f64>> {
    check_dim(x, log_lengthscales)?;
    let (p, d) = x.shape();
    let inv: Vec<f64> = log_lengthscales.iter().map(|l| (-l).exp()).collect();
    let rows = rows_row_major(x);
    let mut k = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let xi = &rows[i * d..(i + 1) * d];
        k[(i, i)] = 1.0;
        for j in 0..i {
            let xj = &rows[j * d..(j + 1) * d];
            let mut s = 0.0;
            for q in 0..d {
                let t = (xi[q] - xj[q]) * inv[q];
                s += t * t;
            }
            let v = (-0.5 * s).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Kernel evaluations between the rows of `a` (rows of the result) and the
/// rows of `b` (columns of the result).
pub fn cross_kernel(a: &DMatrix<f64>, b: &DMatrix<f64>, log_lengthscales: &[f64]) -> Result<DMatrix<f64>> {
    check_dim(a, log_lengthscales)?;
    check_dim(b, log_lengthscales)?;
    let d = a.ncols();
    let inv: Vec<f64> = log_lengthscales.iter().map(|l| (-l).exp()).collect();
    let ra = rows_row_major(a);
    let rb = rows_row_major(b);
    Ok(DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        let xi = &ra[i * d..(i + 1) * d];
        let xj = &rb[j * d..(j + 1) * d];
        let mut s = 0.0;
        for q in 0..d {
            let t = (xi[q] - xj[q]) * inv[q];
            s += t * t;
        }
        (-0.5 * s).exp()
    }))
}

/// Adds the optional noise variance and then the jitter to the diagonal of a
/// noise-free kernel matrix. Shared by every path that builds a covariance so
/// results agree exactly.
pub(crate) fn with_diagonal(mut k: DMatrix<f64>, noise_variance: Option<f64>, jitter: f64) -> CovMatrix {
    for i in 0..k.nrows() {
        let mut v = k[(i, i)];
        if let Some(nv) = noise_variance {
            v += nv;
        }
        v += jitter;
        k[(i, i)] = v;
    }
    CovMatrix::from_entries_unchecked(k)
}

/// Kernel-induced covariance at the design points `x`, optionally with the
/// observation-noise variance on the diagonal, plus `jitter`.
pub fn build_kernel_matrix(
    x: &DMatrix<f64>,
    theta: &HyperparamVector,
    include_noise: bool,
    jitter: f64,
) -> Result<CovMatrix> {
    if x.nrows() < 2 {
        return Err(Error::config("kernel matrix needs at least two design points"));
    }
    if !(jitter >= 0.0) {
        return Err(Error::config("jitter must be non-negative"));
    }
    let k = kernel_matrix(x, &theta.log_lengthscales)?;
    let noise = include_noise.then(|| theta.noise_variance());
    Ok(with_diagonal(k, noise, jitter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn kernel_examples() {
        assert_eq!(ard_se_kernel(&[0.3, -1.0], &[0.3, -1.0], &[0.2, 5.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            ard_se_kernel(&[0.0], &[1.0], &[0.0]).unwrap(),
            0.6065306597126334,
            epsilon = 1e-15
        );
        let far = ard_se_kernel(&[0.0], &[1.0], &[20.0]).unwrap();
        assert!((far - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_dimension_mismatch() {
        assert!(matches!(
            ard_se_kernel(&[0.0, 1.0], &[1.0], &[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let x = DMatrix::zeros(3, 2);
        assert!(kernel_matrix(&x, &[0.0]).is_err());
    }

    #[test]
    fn matrix_examples() {
        let theta = HyperparamVector::isotropic(1, 1.0, 0.05);
        let dup = DMatrix::from_row_slice(2, 1, &[0.4, 0.4]);
        let k = build_kernel_matrix(&dup, &theta, false, 0.0).unwrap();
        assert_eq!(k.entries(), &DMatrix::from_element(2, 2, 1.0));

        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let k = build_kernel_matrix(&x, &theta, false, 0.0).unwrap();
        let e = (-0.5f64).exp();
        assert_abs_diff_eq!(k.entries()[(0, 1)], e, epsilon = 1e-15);
        assert_eq!(k.entries()[(0, 1)], k.entries()[(1, 0)]);
        assert_eq!(k.entries()[(0, 0)], 1.0);

        let theta = HyperparamVector::new(vec![0.0], 0.05f64.ln()).unwrap();
        let k = build_kernel_matrix(&x, &theta, true, 1e-8).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(k.entries()[(i, i)], 1.0 + 0.0025 + 1e-8, epsilon = 1e-15);
        }
    }

    #[test]
    fn entries_match_pointwise_kernel_exactly() {
        let x = DMatrix::from_row_slice(3, 2, &[0.1, 0.9, -0.4, 0.3, 1.2, -0.7]);
        let ls = [0.3, -0.5];
        let k = kernel_matrix(&x, &ls).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let xi: Vec<f64> = x.row(i).iter().copied().collect();
                let xj: Vec<f64> = x.row(j).iter().copied().collect();
                assert_eq!(k[(i, j)], ard_se_kernel(&xi, &xj, &ls).unwrap());
            }
        }
        let c = cross_kernel(&x, &x, &ls).unwrap();
        assert_eq!(c, k);
    }

    fn design(p: usize, d: usize) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(-2.0f64..2.0, p * d).prop_map(move |v| DMatrix::from_row_slice(p, d, &v))
    }

    proptest! {
        #[test]
        fn symmetric_and_unit_interval(x in design(6, 3), ls in prop::collection::vec(-2.0f64..2.0, 3)) {
            let k = kernel_matrix(&x, &ls).unwrap();
            prop_assert_eq!(&k, &k.transpose());
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        prop_assert!(k[(i, j)] >= 0.0 && k[(i, j)] <= 1.0);
                    }
                }
            }
        }

        #[test]
        fn longer_lengthscales_smooth(x in design(5, 2),
                                      ls in prop::collection::vec(-2.0f64..2.0, 2),
                                      bump in 0.0f64..3.0) {
            let k0 = kernel_matrix(&x, &ls).unwrap();
            let wider: Vec<f64> = ls.iter().map(|l| l + bump).collect();
            let k1 = kernel_matrix(&x, &wider).unwrap();
            for (a, b) in k0.iter().zip(k1.iter()) {
                prop_assert!(*b >= *a);
            }
        }
    }
}
