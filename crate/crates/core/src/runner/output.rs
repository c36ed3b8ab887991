use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gp::PredictiveSummary;
use crate::metrics::MetricsReport;
use crate::sampler::ChainTrace;

pub const TRACE_FILE: &str = "trace.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PLOT_LENGTHSCALES_FILE: &str = "plot-lengthscales.csv";
pub const PLOT_BY_INDEX_FILE: &str = "plot-predictions-by-index.csv";
pub const PLOT_PRED_VS_TRUE_FILE: &str = "plot-pred-vs-true.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const RUNS_FILE: &str = "runs.csv";

/// Creates `path` and hands a buffered writer to `body`.
pub(crate) fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let io = |e| Error::io(path, e);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    body(&mut out).map_err(io)?;
    out.flush().map_err(io)
}

pub fn write_trace(path: &Path, trace: &ChainTrace, provenance: &str) -> Result<()> {
    let file = path.to_path_buf();
    write_file(path, |out| {
        trace
            .write_csv(out, Some(provenance))
            .map_err(|e| std::io::Error::other(format!("{}: {e}", file.display())))
    })
}

/// `index,truth,mean,sd,lo,hi` in original response units.
pub fn write_predictions(path: &Path, summary: &PredictiveSummary, truth: &[f64], provenance: &str) -> Result<()> {
    check_len(summary, truth)?;
    write_file(path, |out| {
        writeln!(out, "# {provenance}")?;
        writeln!(out, "index,truth,mean,sd,lo,hi")?;
        for (i, (p, t)) in summary.points.iter().zip(truth).enumerate() {
            writeln!(out, "{i},{t},{},{},{},{}", p.mean, p.sd, p.lo, p.hi)?;
        }
        Ok(())
    })
}

/// Names and values of the metrics columns, optionally without the σ
/// coverages.
pub fn metric_columns(report: &MetricsReport, sigma_coverage: bool) -> Vec<(&'static str, String)> {
    report
        .fields()
        .into_iter()
        .filter(|(k, _)| sigma_coverage || !k.starts_with("cov_"))
        .collect()
}

pub fn write_metrics(path: &Path, report: &MetricsReport, sigma_coverage: bool, provenance: &str) -> Result<()> {
    let cols = metric_columns(report, sigma_coverage);
    write_file(path, |out| {
        writeln!(out, "# {provenance}")?;
        let names: Vec<&str> = cols.iter().map(|(k, _)| *k).collect();
        let values: Vec<&str> = cols.iter().map(|(_, v)| v.as_str()).collect();
        writeln!(out, "{}", names.join(","))?;
        writeln!(out, "{}", values.join(","))
    })
}

/// Writes the three plot-ready files of a run into `dir`: lengthscale
/// chains on the ℓ scale, predictions by test index, and predicted against
/// true values.
pub fn emit_plot_data(
    trace: &ChainTrace,
    summary: &PredictiveSummary,
    truth: &[f64],
    dir: &Path,
    provenance: &str,
) -> Result<()> {
    check_len(summary, truth)?;
    write_file(&dir.join(PLOT_LENGTHSCALES_FILE), |out| {
        writeln!(out, "# {provenance}")?;
        let header: Vec<String> = (1..=trace.dim).map(|q| format!("ell_{q}")).collect();
        writeln!(out, "iteration,{}", header.join(","))?;
        for r in &trace.records {
            write!(out, "{}", r.iteration)?;
            for l in r.theta.lengthscales() {
                write!(out, ",{l}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    })?;
    write_file(&dir.join(PLOT_BY_INDEX_FILE), |out| {
        writeln!(out, "# {provenance}")?;
        writeln!(out, "index,truth,mean,lo,hi")?;
        for (i, (p, t)) in summary.points.iter().zip(truth).enumerate() {
            writeln!(out, "{i},{t},{},{},{}", p.mean, p.lo, p.hi)?;
        }
        Ok(())
    })?;
    write_file(&dir.join(PLOT_PRED_VS_TRUE_FILE), |out| {
        writeln!(out, "# {provenance}")?;
        writeln!(out, "truth,mean")?;
        for (p, t) in summary.points.iter().zip(truth) {
            writeln!(out, "{t},{}", p.mean)?;
        }
        Ok(())
    })
}

fn check_len(summary: &PredictiveSummary, truth: &[f64]) -> Result<()> {
    if summary.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: summary.len(),
            got: truth.len(),
        });
    }
    Ok(())
}
