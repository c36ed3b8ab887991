use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::priors::{PriorKind, PriorSettings};
use crate::sampler::SamplerConfig;
use crate::synthetic::GeneratorSpec;

/// A complete study: one data source, one or more prior specifications and
/// one or more master seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub specs: Vec<SpecEntry>,
    #[serde(default)]
    pub priors: PriorSettings,
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Adds the 1σ and 2σ coverage columns to the metrics files.
    #[serde(default)]
    pub report_sigma_coverage: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Generator(GeneratorSpec),
    Csv(CsvSource),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub path: PathBuf,
    pub input_columns: Vec<String>,
    pub response_column: String,
    /// Exactly one of `n_train` and `train_fraction` must be given.
    #[serde(default)]
    pub n_train: Option<usize>,
    #[serde(default)]
    pub train_fraction: Option<f64>,
    /// Input columns known to be relevant, for the relevance ratio.
    #[serde(default)]
    pub relevant_columns: Option<Vec<String>>,
}

impl CsvSource {
    /// Training-set size for a table of `rows` usable rows.
    pub fn train_size(&self, rows: usize) -> Result<usize> {
        let n = match (self.n_train, self.train_fraction) {
            (Some(n), None) => n,
            (None, Some(f)) if f > 0.0 && f < 1.0 => (f * rows as f64).round() as usize,
            (None, Some(f)) => return Err(Error::config(format!("train_fraction {f} is not in (0, 1)"))),
            _ => {
                return Err(Error::config(
                    "csv source needs exactly one of n_train and train_fraction",
                ))
            }
        };
        if n < 2 || n >= rows {
            return Err(Error::config(format!(
                "need 2 <= n_train < {rows} usable rows, got {n}"
            )));
        }
        Ok(n)
    }

    pub fn relevant_indices(&self) -> Result<Option<Vec<usize>>> {
        let Some(names) = &self.relevant_columns else {
            return Ok(None);
        };
        names
            .iter()
            .map(|name| {
                self.input_columns
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::config(format!("relevant column {name:?} is not an input column")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// A prior specification, optionally with its own proposal step.
///
/// Written either as a bare name (`"normal"`) or as an object
/// (`{"kind": "wishart", "step_sd": 0.04}`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SpecEntryRepr")]
pub struct SpecEntry {
    pub kind: PriorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_sd: Option<f64>,
}

impl From<PriorKind> for SpecEntry {
    fn from(kind: PriorKind) -> Self {
        Self { kind, step_sd: None }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpecEntryRepr {
    Bare(PriorKind),
    Full(SpecDetail),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDetail {
    kind: PriorKind,
    #[serde(default)]
    step_sd: Option<f64>,
}

impl From<SpecEntryRepr> for SpecEntry {
    fn from(r: SpecEntryRepr) -> Self {
        match r {
            SpecEntryRepr::Bare(kind) => kind.into(),
            SpecEntryRepr::Full(d) => Self {
                kind: d.kind,
                step_sd: d.step_sd,
            },
        }
    }
}

impl SpecEntry {
    /// Sampler settings for this specification: the shared ones with the
    /// step override applied.
    pub fn sampler(&self, shared: &SamplerConfig) -> SamplerConfig {
        let mut cfg = shared.clone();
        if let Some(s) = self.step_sd {
            cfg.step_sd = s;
            cfg.step_sds = None;
        }
        cfg
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a configuration file. Relative paths inside it are taken
    /// relative to the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.output_dir = base.join(&cfg.output_dir);
        if let DataSource::Csv(c) = &mut cfg.source {
            c.path = base.join(&c.path);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::config("at least one prior specification is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        let mut names: Vec<&str> = self.specs.iter().map(|s| s.kind.name()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("prior specifications must be distinct"));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("seeds must be distinct"));
        }
        for s in &self.specs {
            if let Some(sd) = s.step_sd {
                if !(sd >= 0.0) || !sd.is_finite() {
                    return Err(Error::config(format!(
                        "step_sd for {} must be finite and non-negative",
                        s.kind
                    )));
                }
            }
        }
        match &self.source {
            DataSource::Generator(g) => g.validate()?,
            DataSource::Csv(c) => {
                if c.input_columns.is_empty() {
                    return Err(Error::config("csv source needs at least one input column"));
                }
                if c.input_columns.contains(&c.response_column) {
                    return Err(Error::config("response column must differ from the input columns"));
                }
                let mut cols = c.input_columns.clone();
                cols.sort_unstable();
                if cols.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::config("input columns must be distinct"));
                }
                if c.n_train.is_some() == c.train_fraction.is_some() {
                    return Err(Error::config(
                        "csv source needs exactly one of n_train and train_fraction",
                    ));
                }
                c.relevant_indices()?;
            }
        }
        let (p, d) = match &self.source {
            DataSource::Generator(g) => (g.n_train, crate::synthetic::INPUT_DIM),
            DataSource::Csv(c) => match c.n_train {
                Some(n) => (n, c.input_columns.len()),
                // The size is only known after loading the file.
                None => return Ok(()),
            },
        };
        for s in &self.specs {
            s.sampler(&self.sampler).resolve(p, d, s.kind)?;
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, with
    /// the output directory left out.
    pub fn hash(&self) -> String {
        let mut content = self.clone();
        content.output_dir = PathBuf::new();
        let canonical = serde_json::to_vec(&content).expect("config serialises");
        let digest = Sha256::digest(&canonical);
        hex::encode(&digest[..8])
    }
}
