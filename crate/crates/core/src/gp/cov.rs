use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric positive-definite matrix with a lazily computed lower Cholesky
/// factor and log-determinant.
#[derive(Clone, Debug)]
pub struct CovMatrix {
    entries: DMatrix<f64>,
    chol_lower: Option<DMatrix<f64>>,
    log_det: Option<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl CovMatrix {
    /// Wraps `entries` after checking squareness, symmetry (to 1e-12
    /// absolute), finiteness and a strictly positive diagonal.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(Error::DimensionMismatch { expected: r, got: c });
        }
        if r == 0 {
            return Err(Error::config("covariance matrix must be non-empty"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("covariance matrix has non-finite entries"));
        }
        for i in 0..r {
            if !(entries[(i, i)] > 0.0) {
                return Err(Error::config(format!("diagonal entry {i} is not positive")));
            }
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::config(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_entries_unchecked(entries))
    }

    /// Caller guarantees the invariants (used for kernel matrices, which are
    /// symmetric by construction).
    pub(crate) fn from_entries_unchecked(entries: DMatrix<f64>) -> Self {
        Self {
            entries,
            chol_lower: None,
            log_det: None,
        }
    }

    pub fn identity(p: usize) -> Self {
        Self::from_entries_unchecked(DMatrix::identity(p, p))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn chol_lower(&self) -> Option<&DMatrix<f64>> {
        self.chol_lower.as_ref()
    }

    pub fn log_det(&self) -> Option<f64> {
        self.log_det
    }

    pub fn is_factored(&self) -> bool {
        self.chol_lower.is_some()
    }

    /// Adds `value` to every diagonal entry, dropping any cached factor.
    pub fn add_to_diagonal(&mut self, value: f64) {
        for i in 0..self.dim() {
            self.entries[(i, i)] += value;
        }
        self.chol_lower = None;
        self.log_det = None;
    }

    /// Computes and caches the Cholesky factor. Idempotent.
    pub fn factor(&mut self) -> Result<()> {
        if self.chol_lower.is_none() {
            let l = cholesky_lower(&self.entries)?;
            let log_det = 2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
            self.chol_lower = Some(l);
            self.log_det = Some(log_det);
        }
        Ok(())
    }

    /// A factored view, computing the factor on a copy if needed.
    pub fn factored(&self) -> Result<Cow<'_, CovMatrix>> {
        if self.is_factored() {
            Ok(Cow::Borrowed(self))
        } else {
            let mut m = self.clone();
            m.factor()?;
            Ok(Cow::Owned(m))
        }
    }

    fn l(&self) -> &DMatrix<f64> {
        self.chol_lower.as_ref().expect("CovMatrix used before factorisation")
    }

    /// `L⁻¹ b`. Requires the factor.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut out = b.clone();
        forward_substitute(self.l(), out.as_mut_slice(), 0);
        out
    }

    /// `Σ⁻¹ b` via two triangular solves. Requires the factor.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let l = self.l();
        let mut out = b.clone();
        forward_substitute(l, out.as_mut_slice(), 0);
        back_substitute_transposed(l, out.as_mut_slice());
        out
    }

    /// `L⁻¹ B` for every column of `B`. Requires the factor.
    pub fn solve_lower_columns(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let l = self.l();
        let mut out = b.clone();
        for mut col in out.column_iter_mut() {
            forward_substitute(l, col.as_mut_slice(), 0);
        }
        out
    }

    /// `tr(self⁻¹ other)`, computed as the squared Frobenius norm of
    /// `L_self⁻¹ L_other`. Both matrices must be factored.
    pub fn trace_inv_times(&self, other: &CovMatrix) -> f64 {
        let lv = self.l();
        let ls = other.l();
        let p = lv.nrows();
        assert_eq!(p, ls.nrows(), "trace_inv_times: dimension mismatch");
        let mut col = vec![0.0; p];
        let mut total = 0.0;
        for j in 0..p {
            // Column j of L_other is zero above row j, so the solve starts there.
            col[j..].copy_from_slice(&ls.column(j).as_slice()[j..]);
            forward_substitute(lv, &mut col, j);
            total += col[j..].iter().map(|v| v * v).sum::<f64>();
        }
        total
    }
}

/// Left-looking column Cholesky on column-major storage. Fails with the index of
/// the first pivot that is not strictly positive and finite.
fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            l[(i, j)] = a[(i, j)];
        }
    }
    let data = l.as_mut_slice();
    for j in 0..n {
        let (left, right) = data.split_at_mut(j * n);
        let col_j = &mut right[..n];
        for k in 0..j {
            let col_k = &left[k * n..(k + 1) * n];
            let f = col_k[j];
            if f != 0.0 {
                for i in j..n {
                    col_j[i] -= f * col_k[i];
                }
            }
        }
        let pivot = col_j[j];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let s = pivot.sqrt();
        col_j[j] = s;
        let inv = 1.0 / s;
        for v in &mut col_j[j + 1..] {
            *v *= inv;
        }
    }
    Ok(l)
}

/// Solves `L x = b` in place, assuming `b[..start]` is zero.
fn forward_substitute(l: &DMatrix<f64>, b: &mut [f64], start: usize) {
    let n = l.nrows();
    let data = l.as_slice();
    for k in start..n {
        let col = &data[k * n..(k + 1) * n];
        let xk = b[k] / col[k];
        b[k] = xk;
        if xk != 0.0 {
            for i in k + 1..n {
                b[i] -= xk * col[i];
            }
        }
    }
}

/// Solves `Lᵀ x = b` in place.
fn back_substitute_transposed(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = l.nrows();
    let data = l.as_slice();
    for i in (0..n).rev() {
        let col = &data[i * n..(i + 1) * n];
        let dot: f64 = col[i + 1..].iter().zip(&b[i + 1..]).map(|(a, x)| a * x).sum();
        b[i] = (b[i] - dot) / col[i];
    }
}

/// Factorises a copy of `m`.
pub fn cholesky_factor(m: &CovMatrix) -> Result<CovMatrix> {
    let mut out = m.clone();
    out.factor()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_factor() {
        let m = cholesky_factor(&CovMatrix::identity(3)).unwrap();
        assert_eq!(m.chol_lower().unwrap(), &DMatrix::identity(3, 3));
        assert_eq!(m.log_det().unwrap(), 0.0);
    }

    #[test]
    fn hand_cholesky_two_by_two() {
        let m = CovMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0])).unwrap();
        let m = cholesky_factor(&m).unwrap();
        let l = m.chol_lower().unwrap();
        assert_abs_diff_eq!(l[(0, 0)], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l[(1, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l[(1, 1)], 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(l[(0, 1)], 0.0);
        assert_abs_diff_eq!(m.log_det().unwrap(), 8f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = CovMatrix::from_entries(DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert!(matches!(
            cholesky_factor(&m),
            Err(Error::NotPositiveDefinite { pivot: 1 })
        ));
    }

    #[test]
    fn indefinite_and_nan_rejected() {
        let m = CovMatrix::from_entries_unchecked(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        assert!(cholesky_factor(&m).is_err());
        let m = CovMatrix::from_entries_unchecked(DMatrix::from_row_slice(1, 1, &[f64::NAN]));
        assert!(cholesky_factor(&m).is_err());
    }

    #[test]
    fn from_entries_validates() {
        assert!(CovMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])).is_err());
        assert!(CovMatrix::from_entries(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])).is_err());
        assert!(CovMatrix::from_entries(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn factor_reconstructs_and_solves() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let m = cholesky_factor(&CovMatrix::from_entries(a.clone()).unwrap()).unwrap();
        let l = m.chol_lower().unwrap();
        let rel = (l * l.transpose() - &a).norm() / a.norm();
        assert!(rel < 1e-12);

        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let x = m.solve(&b);
        assert!((&a * x - b).norm() < 1e-12);

        let v = m.clone();
        let expect = (a.clone().try_inverse().unwrap() * &a).trace();
        assert_abs_diff_eq!(v.trace_inv_times(&m), expect, epsilon = 1e-12);
    }
}
