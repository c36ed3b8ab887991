use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Standardised regression data.
///
/// Inputs and responses are centred and scaled with statistics taken from
/// the training portion; a test `Dataset` carries the training statistics so
/// predictions can be mapped back to original units. `relevant_indices` are
/// zero-based and only known for synthetic data.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Responses in original units.
    pub y_original: DVector<f64>,
    pub input_means: Vec<f64>,
    pub input_sds: Vec<f64>,
    pub y_mean: f64,
    pub y_sd: f64,
    pub relevant_indices: Option<Vec<usize>>,
}

/// Column means and sample standard deviations (n - 1 denominator).
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub input_means: Vec<f64>,
    pub input_sds: Vec<f64>,
    pub y_mean: f64,
    pub y_sd: f64,
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        let (p, d) = x.shape();
        if p < 2 || d == 0 {
            return Err(Error::Data(format!(
                "need at least 2 rows and 1 input column, got {p}x{d}"
            )));
        }
        if y.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: y.len(),
            });
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value in data".into()));
        }
        let mut input_means = Vec::with_capacity(d);
        let mut input_sds = Vec::with_capacity(d);
        for q in 0..d {
            let (m, s) = mean_sd(x.column(q).iter().copied());
            if !(s > 0.0) {
                return Err(Error::Data(format!("input column {} is constant", q + 1)));
            }
            input_means.push(m);
            input_sds.push(s);
        }
        let (y_mean, y_sd) = mean_sd(y.iter().copied());
        if !(y_sd > 0.0) {
            return Err(Error::Data("response is constant".into()));
        }
        Ok(Self {
            input_means,
            input_sds,
            y_mean,
            y_sd,
        })
    }

    pub fn apply(&self, x: &DMatrix<f64>, y: &[f64], relevant_indices: Option<Vec<usize>>) -> Result<Dataset> {
        let (p, d) = x.shape();
        if d != self.input_means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.input_means.len(),
                got: d,
            });
        }
        if y.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: y.len(),
            });
        }
        let xs = DMatrix::from_fn(p, d, |i, q| (x[(i, q)] - self.input_means[q]) / self.input_sds[q]);
        let ys = DVector::from_iterator(p, y.iter().map(|v| (v - self.y_mean) / self.y_sd));
        Ok(Dataset {
            x: xs,
            y: ys,
            y_original: DVector::from_column_slice(y),
            input_means: self.input_means.clone(),
            input_sds: self.input_sds.clone(),
            y_mean: self.y_mean,
            y_sd: self.y_sd,
            relevant_indices,
        })
    }
}

impl Dataset {
    /// Standardises a train/test pair using training statistics only.
    pub fn from_split(
        train_x: &DMatrix<f64>,
        train_y: &[f64],
        test_x: &DMatrix<f64>,
        test_y: &[f64],
        relevant_indices: Option<Vec<usize>>,
    ) -> Result<(Dataset, Dataset)> {
        if let Some(rel) = &relevant_indices {
            if let Some(&bad) = rel.iter().find(|&&q| q >= train_x.ncols()) {
                return Err(Error::config(format!("relevant index {bad} out of range")));
            }
        }
        let stats = Standardizer::fit(train_x, train_y)?;
        let train = stats.apply(train_x, train_y, relevant_indices.clone())?;
        let test = stats.apply(test_x, test_y, relevant_indices)?;
        Ok((train, test))
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Maps a standardised response value back to original units.
    pub fn destandardise(&self, value: f64) -> f64 {
        self.y_mean + self.y_sd * value
    }
}
