//! Experiment orchestration: configuration, data preparation, per-cell
//! chains and the files they leave behind.
//!
//! A study is a grid of cells, one per (prior specification, master seed).
//! Each master seed is split into a data seed and a chain seed, so every
//! specification run on the same seed sees the same dataset and the same
//! random stream.
//!
//! Layout under `output_dir`:
//!
//! ```text
//! <spec>/<seed>/trace.csv
//! <spec>/<seed>/predictions.csv
//! <spec>/<seed>/metrics.csv
//! <spec>/<seed>/plot-lengthscales.csv
//! <spec>/<seed>/plot-predictions-by-index.csv
//! <spec>/<seed>/plot-pred-vs-true.csv
//! runs.csv
//! summary.csv
//! ```
//!
//! Every file starts with a `# config_hash=…,seed=…,spec=…` line followed by
//! a single header line.

mod config;
mod output;
mod table;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{CsvSource, DataSource, ExperimentConfig, SpecEntry};
pub use output::{
    emit_plot_data, metric_columns, write_metrics, write_predictions, write_trace, METRICS_FILE, PLOT_BY_INDEX_FILE,
    PLOT_LENGTHSCALES_FILE, PLOT_PRED_VS_TRUE_FILE, PREDICTIONS_FILE, RUNS_FILE, SUMMARY_FILE, TRACE_FILE,
};
pub use table::{load_csv, RawTable};

use crate::error::{Error, Result};
use crate::gp::{mixture_predictive, Dataset, PredictiveSummary};
use crate::metrics::MetricsReport;
use crate::priors::PriorKind;
use crate::sampler::{run_chain, ChainTrace};
use crate::synthetic::generate_dataset;

const DATA_STREAM: u64 = 0;
const CHAIN_STREAM: u64 = 1;

/// Independent data and chain seeds drawn from one master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellSeeds {
    pub data: u64,
    pub chain: u64,
}

impl CellSeeds {
    pub fn derive(master: u64) -> Self {
        let draw = |stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(master);
            rng.set_stream(stream);
            rng.next_u64()
        };
        Self {
            data: draw(DATA_STREAM),
            chain: draw(CHAIN_STREAM),
        }
    }
}

/// Builds the standardised train and test sets for one data seed.
pub fn prepare_data(source: &DataSource, data_seed: u64) -> Result<(Dataset, Dataset)> {
    match source {
        DataSource::Generator(g) => generate_dataset(g, data_seed),
        DataSource::Csv(c) => {
            let table = load_csv(&c.path, &c.input_columns, &c.response_column)?;
            let n_train = c.train_size(table.len())?;
            let mut order: Vec<usize> = (0..table.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(data_seed));
            let (train_rows, test_rows) = order.split_at(n_train);
            let (tx, ty) = table.select(train_rows);
            let (sx, sy) = table.select(test_rows);
            Dataset::from_split(&tx, &ty, &sx, &sy, c.relevant_indices()?)
        }
    }
}

/// Everything one cell produces.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub spec: PriorKind,
    pub seed: u64,
    pub trace: ChainTrace,
    pub summary: PredictiveSummary,
    /// Test responses in original units.
    pub truth: Vec<f64>,
    pub metrics: MetricsReport,
}

/// Runs the chain for one specification on prepared data and evaluates it
/// on the test split. Writes nothing.
pub fn run_cell(
    config: &ExperimentConfig,
    entry: &SpecEntry,
    seed: u64,
    train: &Dataset,
    test: &Dataset,
) -> Result<CellResult> {
    let mut sampler = entry.sampler(&config.sampler);
    sampler.seed = CellSeeds::derive(seed).chain;
    let learn_noise = sampler.fixed_noise_sd.is_none();
    let spec = config.priors.spec(entry.kind, train.dim(), learn_noise);
    let trace = run_chain(train, &spec, &sampler)?;
    let samples = trace.posterior_samples(trace.burn_in, trace.thin);
    let summary = mixture_predictive(train, &test.x, &samples, sampler.jitter)?;
    let truth: Vec<f64> = test.y_original.iter().copied().collect();
    let metrics = MetricsReport::evaluate(
        &summary,
        &truth,
        &trace,
        trace.burn_in,
        train.relevant_indices.as_deref(),
    )?;
    Ok(CellResult {
        spec: entry.kind,
        seed,
        trace,
        summary,
        truth,
        metrics,
    })
}

pub fn provenance(config_hash: &str, seed: u64, spec: PriorKind) -> String {
    format!("config_hash={config_hash},seed={seed},spec={spec}")
}

pub fn cell_dir(output_dir: &Path, spec: PriorKind, seed: u64) -> PathBuf {
    output_dir.join(spec.name()).join(seed.to_string())
}

/// Writes all per-cell files into `dir`.
pub fn write_cell(cell: &CellResult, dir: &Path, config_hash: &str, sigma_coverage: bool) -> Result<()> {
    let prov = provenance(config_hash, cell.seed, cell.spec);
    write_trace(&dir.join(TRACE_FILE), &cell.trace, &prov)?;
    write_predictions(&dir.join(PREDICTIONS_FILE), &cell.summary, &cell.truth, &prov)?;
    write_metrics(&dir.join(METRICS_FILE), &cell.metrics, sigma_coverage, &prov)?;
    emit_plot_data(&cell.trace, &cell.summary, &cell.truth, dir, &prov)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellOutcome {
    pub spec: PriorKind,
    pub seed: u64,
    /// The metrics, or the error message that stopped the cell.
    pub result: std::result::Result<MetricsReport, String>,
}

/// Mean and sample sd of one metric over the successful runs of a spec.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSummary {
    pub name: &'static str,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub spec: PriorKind,
    pub runs: usize,
    pub failed: usize,
    pub metrics: Vec<MetricSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub cells: Vec<CellOutcome>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.result.is_err()).count()
    }
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// Per-spec mean and sd over seeds, in the order the specs were given.
pub fn summarise(specs: &[SpecEntry], cells: &[CellOutcome], sigma_coverage: bool) -> Vec<SummaryRow> {
    specs
        .iter()
        .map(|entry| {
            let mine: Vec<&CellOutcome> = cells.iter().filter(|c| c.spec == entry.kind).collect();
            let ok: Vec<&MetricsReport> = mine.iter().filter_map(|c| c.result.as_ref().ok()).collect();
            let metrics = metric_names(sigma_coverage)
                .into_iter()
                .map(|name| {
                    let values: Vec<f64> = ok
                        .iter()
                        .filter_map(|r| match name {
                            "rmse" => Some(r.rmse),
                            "mae" => Some(r.mae),
                            "coverage95" => Some(r.coverage95),
                            "cov_1sigma" => Some(r.cov_1sigma),
                            "cov_2sigma" => Some(r.cov_2sigma),
                            "relevance_ratio" => r.relevance_ratio,
                            "acceptance_rate" => Some(r.acceptance_rate),
                            _ => None,
                        })
                        .collect();
                    let (mean, sd) = mean_sd(&values);
                    MetricSummary { name, mean, sd }
                })
                .collect();
            SummaryRow {
                spec: entry.kind,
                runs: ok.len(),
                failed: mine.len() - ok.len(),
                metrics,
            }
        })
        .collect()
}

const METRIC_NAMES: [&str; 7] = [
    "rmse",
    "mae",
    "coverage95",
    "cov_1sigma",
    "cov_2sigma",
    "relevance_ratio",
    "acceptance_rate",
];

fn metric_names(sigma_coverage: bool) -> Vec<&'static str> {
    METRIC_NAMES
        .into_iter()
        .filter(|k| sigma_coverage || !k.starts_with("cov_"))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_summary(
    path: &Path,
    rows: &[SummaryRow],
    config_hash: &str,
    seeds: &[u64],
    specs: &[SpecEntry],
    sigma: bool,
) -> Result<()> {
    let seed_list: Vec<String> = seeds.iter().map(|s| s.to_string()).collect();
    let spec_list: Vec<&str> = specs.iter().map(|s| s.kind.name()).collect();
    let names = metric_names(sigma);
    output::write_file(path, |out| {
        writeln!(
            out,
            "# config_hash={config_hash},seed={},spec={}",
            seed_list.join(";"),
            spec_list.join(";")
        )?;
        let mut header = vec!["spec".to_string(), "runs".into(), "failed".into()];
        for n in &names {
            header.push(format!("{n}_mean"));
            header.push(format!("{n}_sd"));
        }
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            let mut fields = vec![
                row.spec.name().to_string(),
                row.runs.to_string(),
                row.failed.to_string(),
            ];
            for n in &names {
                let m = row.metrics.iter().find(|m| m.name == *n);
                fields.push(opt(m.and_then(|m| m.mean)));
                fields.push(opt(m.and_then(|m| m.sd)));
            }
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    })
}

fn write_runs(
    path: &Path,
    cells: &[CellOutcome],
    config_hash: &str,
    seeds: &[u64],
    specs: &[SpecEntry],
    sigma: bool,
) -> Result<()> {
    let seed_list: Vec<String> = seeds.iter().map(|s| s.to_string()).collect();
    let spec_list: Vec<&str> = specs.iter().map(|s| s.kind.name()).collect();
    let names = metric_names(sigma);
    output::write_file(path, |out| {
        writeln!(
            out,
            "# config_hash={config_hash},seed={},spec={}",
            seed_list.join(";"),
            spec_list.join(";")
        )?;
        writeln!(out, "spec,seed,status,{},error", names.join(","))?;
        for c in cells {
            match &c.result {
                Ok(r) => {
                    let values: Vec<String> = metric_columns(r, sigma).into_iter().map(|(_, v)| v).collect();
                    writeln!(out, "{},{},ok,{},", c.spec.name(), c.seed, values.join(","))?;
                }
                Err(msg) => {
                    let blanks = vec![""; names.len()].join(",");
                    let msg = msg.replace(['\n', '\r'], " ").replace('"', "'");
                    writeln!(out, "{},{},failed,{blanks},\"{msg}\"", c.spec.name(), c.seed)?;
                }
            }
        }
        Ok(())
    })
}

/// Runs every (spec, seed) cell in order, writing each cell's files as it
/// finishes and the run list and summary at the end. A failing cell is
/// recorded and the others still run; only failures to write the study-level
/// files are returned as errors.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let hash = config.hash();
    let sigma = config.report_sigma_coverage;
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let mut cells = Vec::new();
    for &seed in &config.seeds {
        let data = prepare_data(&config.source, CellSeeds::derive(seed).data);
        for entry in &config.specs {
            let dir = cell_dir(&config.output_dir, entry.kind, seed);
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            }
            log::info!("running {} on seed {seed}", entry.kind);
            let result = data.as_ref().map_err(|e| e.to_string()).and_then(|(train, test)| {
                let cell = run_cell(config, entry, seed, train, test).map_err(|e| e.to_string())?;
                write_cell(&cell, &dir, &hash, sigma).map_err(|e| e.to_string())?;
                Ok(cell.metrics)
            });
            match &result {
                Ok(m) => log::info!(
                    "{} seed {seed}: rmse {:.4}, acceptance {:.3}",
                    entry.kind,
                    m.rmse,
                    m.acceptance_rate
                ),
                Err(e) => log::error!("{} seed {seed} failed: {e}", entry.kind),
            }
            cells.push(CellOutcome {
                spec: entry.kind,
                seed,
                result,
            });
        }
    }
    let summary = summarise(&config.specs, &cells, sigma);
    write_runs(
        &config.output_dir.join(RUNS_FILE),
        &cells,
        &hash,
        &config.seeds,
        &config.specs,
        sigma,
    )?;
    write_summary(
        &config.output_dir.join(SUMMARY_FILE),
        &summary,
        &hash,
        &config.seeds,
        &config.specs,
        sigma,
    )?;
    Ok(ExperimentReport {
        config_hash: hash,
        cells,
        summary,
    })
}
