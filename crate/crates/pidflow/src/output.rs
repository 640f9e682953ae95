//! CSV and JSON artifact writers.
//!
//! Values are printed with 17 significant digits (`{:.16e}`), enough to
//! round-trip every f64 exactly, and each file opens with a comment line
//! embedding the config hash and seed so artifacts are self-identifying.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::analysis::MetricsSeries;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn provenance_line(config_hash: &str, seed: Option<u64>) -> String {
    format!("# {}", provenance(config_hash, seed))
}

/// `config_hash=… seed=…` tag embedded in every artifact.
pub fn provenance(config_hash: &str, seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("config_hash={config_hash} seed={s}"),
        None => format!("config_hash={config_hash}"),
    }
}

pub const METRICS_HEADER: &str =
    "time,relative_error,consensus_error,optimality_residual,lambda_sum_drift";

/// Writes the metrics CSV: provenance comment, header, one row per
/// recorded state.
pub fn write_metrics_csv(
    path: &Path,
    series: &MetricsSeries,
    config_hash: &str,
    seed: Option<u64>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", provenance_line(config_hash, seed))?;
    writeln!(w, "{METRICS_HEADER}")?;
    for k in 0..series.times.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt(series.times[k]),
            fmt(series.relative_error[k]),
            fmt(series.consensus_error[k]),
            fmt(series.optimality_residual[k]),
            fmt(series.lambda_sum_drift[k]),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed numeric content of a metrics CSV (comment lines skipped).
#[derive(Debug, Clone, Default)]
pub struct ParsedMetrics {
    pub times: Vec<f64>,
    pub relative_error: Vec<f64>,
    pub consensus_error: Vec<f64>,
    pub optimality_residual: Vec<f64>,
    pub lambda_sum_drift: Vec<f64>,
}

/// Reads back a metrics CSV written by [`write_metrics_csv`].
pub fn parse_metrics_csv(path: &Path) -> Result<ParsedMetrics> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = ParsedMetrics::default();
    let mut saw_header = false;
    for line in reader.lines() {
        let line = line?;
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != METRICS_HEADER {
                return Err(Error::InvalidConfig(format!(
                    "unexpected metrics CSV header: {line}"
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("bad CSV field `{f}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if fields.len() != 5 {
            return Err(Error::InvalidConfig(format!(
                "metrics CSV row has {} fields, expected 5",
                fields.len()
            )));
        }
        out.times.push(fields[0]);
        out.relative_error.push(fields[1]);
        out.consensus_error.push(fields[2]);
        out.optimality_residual.push(fields[3]);
        out.lambda_sum_drift.push(fields[4]);
    }
    Ok(out)
}

/// Writes the trajectory CSV: time, then x, λ, and (when present) v
/// components in agent-block order. A truncated run gets a trailing marker
/// comment instead of silently ending.
pub fn write_trajectory_csv(
    path: &Path,
    traj: &Trajectory,
    config_hash: &str,
    seed: Option<u64>,
    truncated_at: Option<f64>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", provenance_line(config_hash, seed))?;

    let dim_total = traj.states[0].x.len();
    let has_v = traj.states[0].v.is_some();
    let mut header = String::from("time");
    for part in ["x", "lambda", "v"] {
        if part == "v" && !has_v {
            continue;
        }
        for k in 0..dim_total {
            header.push_str(&format!(",{part}_{k}"));
        }
    }
    writeln!(w, "{header}")?;

    for (t, state) in traj.times.iter().zip(&traj.states) {
        let mut row = fmt(*t);
        for value in state.x.iter().chain(state.lambda.iter()) {
            row.push(',');
            row.push_str(&fmt(*value));
        }
        if let Some(v) = &state.v {
            for value in v.iter() {
                row.push(',');
                row.push_str(&fmt(*value));
            }
        }
        writeln!(w, "{row}")?;
    }
    if let Some(t) = truncated_at {
        writeln!(w, "# truncated_at={} reason=divergence", fmt(t))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a comparison CSV with one relative-error column per run, aligned
/// on the shared time grid.
pub fn write_comparison_csv(
    path: &Path,
    config_hash: &str,
    runs: &[(String, &MetricsSeries)],
) -> Result<()> {
    if runs.is_empty() {
        return Err(Error::InvalidConfig("no runs to merge".into()));
    }
    let times = &runs[0].1.times;
    for (name, series) in runs {
        if series.times != *times {
            return Err(Error::InvalidConfig(format!(
                "run `{name}` is on a different time grid"
            )));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", provenance_line(config_hash, None))?;
    let mut header = String::from("time");
    for (name, _) in runs {
        header.push_str(&format!(",relative_error_{name}"));
    }
    writeln!(w, "{header}")?;
    for k in 0..times.len() {
        let mut row = fmt(times[k]);
        for (_, series) in runs {
            row.push(',');
            row.push_str(&fmt(series.relative_error[k]));
        }
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    Ok(())
}

/// Serializes any summary value as pretty JSON.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
