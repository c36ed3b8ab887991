//! The five 15-dimensional synthetic benchmark generators and the random
//! train/test protocol.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::Dataset;

pub const INPUT_DIM: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorName {
    /// Six relevant inputs with interactions.
    Baseline6,
    /// Three relevant inputs, purely additive.
    Rel3,
    Rel9,
    Rel12,
    /// Baseline inputs with a simpler, less interrelated signal.
    Less6,
}

impl GeneratorName {
    pub const ALL: [GeneratorName; 5] = [
        GeneratorName::Baseline6,
        GeneratorName::Rel3,
        GeneratorName::Rel9,
        GeneratorName::Rel12,
        GeneratorName::Less6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorName::Baseline6 => "baseline6",
            GeneratorName::Rel3 => "rel3",
            GeneratorName::Rel9 => "rel9",
            GeneratorName::Rel12 => "rel12",
            GeneratorName::Less6 => "less6",
        }
    }

    /// Relevant inputs, 1-based as in `X_1 … X_15`.
    pub fn relevant_inputs(self) -> &'static [usize] {
        match self {
            GeneratorName::Baseline6 | GeneratorName::Less6 => &[1, 3, 5, 8, 11, 14],
            GeneratorName::Rel3 => &[1, 6, 12],
            GeneratorName::Rel9 => &[1, 2, 4, 5, 7, 9, 11, 13, 15],
            GeneratorName::Rel12 => &[1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 13, 14],
        }
    }

    /// Zero-based relevant column indices.
    pub fn relevant_indices(self) -> Vec<usize> {
        self.relevant_inputs().iter().map(|q| q - 1).collect()
    }

    /// Noise-free signal at `x`.
    pub fn latent_f(self, x: &[f64]) -> Result<f64> {
        if x.len() != INPUT_DIM {
            return Err(Error::DimensionMismatch {
                expected: INPUT_DIM,
                got: x.len(),
            });
        }
        // 1-based access to match the generator formulas.
        let v = |q: usize| x[q - 1];
        let sin = f64::sin;
        let cos = f64::cos;
        let exp = f64::exp;
        let f = match self {
            GeneratorName::Baseline6 => {
                sin(PI * v(1))
                    + 0.8 * cos(1.4 * PI * v(3))
                    + 0.7 * exp(-2.5 * (v(5) + 0.2).powi(2))
                    + 0.6 * v(8) * v(11)
                    - 0.5 * v(14).powi(2)
                    + 0.4 * sin(PI * (v(1) + v(14)))
                    - 0.35 * v(3) * v(8)
            }
            GeneratorName::Rel3 => {
                1.0 * sin(PI * v(1)) + 0.9 * cos(1.4 * PI * v(6)) + 0.7 * exp(-2.2 * (v(12) + 0.15).powi(2))
            }
            GeneratorName::Rel9 => {
                0.9 * sin(PI * v(1))
                    + 0.7 * cos(1.3 * PI * v(2))
                    + 0.55 * exp(-2.0 * (v(4) - 0.2).powi(2))
                    + 0.45 * v(5)
                    - 0.4 * v(7).powi(2)
                    + 0.35 * sin(PI * v(9))
                    + 0.3 * v(11) * v(13)
                    + 0.25 * cos(PI * (v(15) + v(1)))
            }
            GeneratorName::Rel12 => {
                0.7 * sin(PI * v(1)) + 0.55 * cos(1.2 * PI * v(2)) + 0.45 * v(3) - 0.35 * v(4).powi(2)
                    + 0.4 * exp(-2.0 * (v(5) + 0.1).powi(2))
                    + 0.35 * sin(PI * v(6))
                    + 0.3 * v(8) * v(9)
                    + 0.25 * cos(PI * v(10))
                    - 0.2 * v(11) * v(13)
                    + 0.2 * sin(PI * (v(14) + v(1)))
            }
            GeneratorName::Less6 => {
                sin(PI * v(1)) + 0.8 * cos(1.4 * PI * v(3)) + 0.7 * exp(-2.5 * (v(5) + 0.2).powi(2)) + 0.5 * v(8)
                    - 0.45 * v(11).powi(2)
                    + 0.35 * sin(PI * v(14))
            }
        };
        Ok(f)
    }
}

impl fmt::Display for GeneratorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorName::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::config(format!("unknown generator '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: GeneratorName,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    #[serde(default = "default_n_total")]
    pub n_total: usize,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
}

fn default_noise_sd() -> f64 {
    0.05
}
fn default_n_total() -> usize {
    650
}
fn default_n_train() -> usize {
    500
}

impl GeneratorSpec {
    pub fn new(name: GeneratorName) -> Self {
        Self {
            name,
            noise_sd: default_noise_sd(),
            n_total: default_n_total(),
            n_train: default_n_train(),
        }
    }

    pub fn with_sizes(name: GeneratorName, n_train: usize, n_test: usize) -> Self {
        Self {
            n_total: n_train + n_test,
            n_train,
            ..Self::new(name)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train < 2 || self.n_train >= self.n_total {
            return Err(Error::config(format!(
                "need 2 <= n_train < n_total (got {} of {})",
                self.n_train, self.n_total
            )));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::config("noise_sd must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Raw (unstandardised) draws with the split assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDraw {
    pub x: DMatrix<f64>,
    pub latent: Vec<f64>,
    pub y: Vec<f64>,
    /// Row indices of the training portion, in shuffled order.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl SyntheticDraw {
    fn select(&self, rows: &[usize]) -> (DMatrix<f64>, Vec<f64>) {
        let x = DMatrix::from_fn(rows.len(), self.x.ncols(), |i, q| self.x[(rows[i], q)]);
        let y = rows.iter().map(|&r| self.y[r]).collect();
        (x, y)
    }

    pub fn train(&self) -> (DMatrix<f64>, Vec<f64>) {
        self.select(&self.train_rows)
    }

    pub fn test(&self) -> (DMatrix<f64>, Vec<f64>) {
        self.select(&self.test_rows)
    }

    /// Writes `x1..x15,y,split` with train rows first, then test rows.
    /// Values use the shortest round-trip decimal form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let inner = |out: &mut W| -> std::io::Result<()> {
            let mut header: Vec<String> = (1..=self.x.ncols()).map(|q| format!("x{q}")).collect();
            header.push("y".into());
            header.push("split".into());
            writeln!(out, "{}", header.join(","))?;
            for (rows, label) in [(&self.train_rows, "train"), (&self.test_rows, "test")] {
                for &r in rows {
                    let mut fields: Vec<String> = self.x.row(r).iter().map(|v| v.to_string()).collect();
                    fields.push(self.y[r].to_string());
                    fields.push(label.to_string());
                    writeln!(out, "{}", fields.join(","))?;
                }
            }
            Ok(())
        };
        inner(&mut out).map_err(|e| Error::io("<synthetic csv>", e))
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Draws `n_total` inputs uniformly on `[−1, 1]^15`, adds Normal noise to the
/// latent signal, and splits rows uniformly at random.
pub fn draw(spec: &GeneratorSpec, seed: u64) -> Result<SyntheticDraw> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_total;
    let mut x = DMatrix::zeros(n, INPUT_DIM);
    for i in 0..n {
        for q in 0..INPUT_DIM {
            x[(i, q)] = rng.random_range(-1.0..=1.0);
        }
    }
    let mut latent = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<f64> = x.row(i).iter().copied().collect();
        let f = spec.name.latent_f(&row)?;
        let eps: f64 = rng.sample(StandardNormal);
        latent.push(f);
        y.push(f + spec.noise_sd * eps);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let test_rows = order.split_off(spec.n_train);
    Ok(SyntheticDraw {
        x,
        latent,
        y,
        train_rows: order,
        test_rows,
    })
}

/// Standardised train/test datasets, using training statistics for both.
pub fn generate_dataset(spec: &GeneratorSpec, seed: u64) -> Result<(Dataset, Dataset)> {
    let raw = draw(spec, seed)?;
    let (tx, ty) = raw.train();
    let (sx, sy) = raw.test();
    Dataset::from_split(&tx, &ty, &sx, &sy, Some(spec.name.relevant_indices()))
}
