//! Executes built experiments and writes their artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::analysis::{self, ConditionReport, MetricsSeries, RateFit};
use crate::config::Experiment;
use crate::dynamics::{DynamicsField, DynamicsVariant, Gains};
use crate::error::Result;
use crate::integrator::{self, IntegratorConfig, Trajectory, TrajectoryMeta};
use crate::output;
use crate::plot;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fraction of the time axis used for the tail rate fit.
pub const TAIL_FIT_FRACTION: f64 = 0.5;

/// Machine-readable digest of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub seed: Option<u64>,
    pub variant: DynamicsVariant,
    pub gains: Gains,
    pub integrator: IntegratorConfig,
    pub final_relative_error: f64,
    pub final_consensus_error: f64,
    pub final_optimality_residual: f64,
    pub max_lambda_sum_drift: f64,
    pub absolute_error_mode: bool,
    pub fit: Option<RateFit>,
    pub wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_warning: Option<String>,
    pub config: serde_json::Value,
}

/// Everything produced by executing one experiment.
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub metrics: MetricsSeries,
    pub summary: RunSummary,
}

/// Integrates, measures, fits, and (for second-order variants) evaluates
/// the gain condition.
pub fn execute(exp: &Experiment) -> Result<RunOutcome> {
    let start = Instant::now();
    let field = DynamicsField::new(
        exp.variant,
        exp.gains,
        exp.bundle.clone(),
        exp.set.clone(),
    )?;
    let stability_warning = integrator::stability_warning(
        exp.integrator.h,
        &exp.gains,
        exp.set.l_global(),
        exp.bundle.lambda_max_l,
    );
    let meta = TrajectoryMeta {
        variant: exp.variant,
        gains: exp.gains,
        seed: exp.seed,
        integrator: exp.integrator,
    };
    let trajectory = integrator::integrate(&field, exp.state0.clone(), &exp.integrator, meta)?;
    let metrics = analysis::metrics(&trajectory, &exp.set, &exp.bundle)?;
    let fit = analysis::fit_rate(&metrics.times, &metrics.relative_error, TAIL_FIT_FRACTION).ok();
    let condition = if exp.variant.has_velocity() {
        Some(analysis::check_condition(
            exp.variant,
            &exp.gains,
            exp.set.l_global(),
            &exp.bundle,
        )?)
    } else {
        None
    };

    let summary = RunSummary {
        config_hash: exp.config_hash.clone(),
        seed: exp.seed,
        variant: exp.variant,
        gains: exp.gains,
        integrator: exp.integrator,
        final_relative_error: *metrics.relative_error.last().unwrap(),
        final_consensus_error: *metrics.consensus_error.last().unwrap(),
        final_optimality_residual: *metrics.optimality_residual.last().unwrap(),
        max_lambda_sum_drift: metrics
            .lambda_sum_drift
            .iter()
            .copied()
            .fold(0.0, f64::max),
        absolute_error_mode: metrics.absolute_mode,
        fit,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        condition,
        stability_warning,
        config: exp.config_echo.clone(),
    };
    Ok(RunOutcome {
        trajectory,
        metrics,
        summary,
    })
}

/// Flags controlling which artifacts land on disk.
#[derive(Debug, Clone, Copy)]
pub struct EmitFlags {
    pub csv: bool,
    pub svg: bool,
}

/// Writes the per-run artifacts (`trajectory.csv`, `metrics.csv`,
/// `summary.json`, `relative_error.svg`) under `dir` with an optional name
/// prefix. Returns the written paths.
pub fn write_run_artifacts(
    dir: &Path,
    prefix: Option<&str>,
    outcome: &RunOutcome,
    flags: EmitFlags,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let name = |base: &str| match prefix {
        Some(p) => dir.join(format!("{p}_{base}")),
        None => dir.join(base),
    };
    let hash = &outcome.summary.config_hash;
    let seed = outcome.summary.seed;
    let mut written = Vec::new();

    if flags.csv {
        let traj_path = name("trajectory.csv");
        output::write_trajectory_csv(&traj_path, &outcome.trajectory, hash, seed, None)?;
        written.push(traj_path);
        let metrics_path = name("metrics.csv");
        output::write_metrics_csv(&metrics_path, &outcome.metrics, hash, seed)?;
        written.push(metrics_path);
    }
    let summary_path = name("summary.json");
    output::write_json(&summary_path, &outcome.summary)?;
    written.push(summary_path);

    if flags.svg {
        let label = if outcome.summary.absolute_error_mode {
            "absolute error"
        } else {
            "relative error"
        };
        let svg_path = name("relative_error.svg");
        plot::render_log_plot(
            &svg_path,
            outcome.summary.variant.as_str(),
            label,
            &[plot::Series {
                label: outcome.summary.variant.as_str().into(),
                times: &outcome.metrics.times,
                values: &outcome.metrics.relative_error,
            }],
            &output::provenance(hash, seed),
        )?;
        written.push(svg_path);
    }
    Ok(written)
}

/// Persists what a diverged run left behind: the partial trajectory with a
/// truncation marker.
pub fn write_divergence_artifacts(
    dir: &Path,
    prefix: Option<&str>,
    exp: &Experiment,
    time: f64,
    partial: &Trajectory,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = match prefix {
        Some(p) => dir.join(format!("{p}_trajectory.csv")),
        None => dir.join("trajectory.csv"),
    };
    output::write_trajectory_csv(&path, partial, &exp.config_hash, exp.seed, Some(time))?;
    Ok(path)
}

/// Result of one named block inside a comparison.
pub struct BlockResult {
    pub name: String,
    pub outcome: Result<RunOutcome>,
}

/// Executes independent experiment blocks, concurrently when the
/// `parallel` feature is active. A failing block does not abort the rest.
pub fn execute_blocks(blocks: Vec<(String, Experiment)>) -> Vec<BlockResult> {
    #[cfg(feature = "parallel")]
    {
        blocks
            .into_par_iter()
            .map(|(name, exp)| BlockResult {
                name,
                outcome: execute(&exp),
            })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        blocks
            .into_iter()
            .map(|(name, exp)| BlockResult {
                name,
                outcome: execute(&exp),
            })
            .collect()
    }
}

/// Sequential twin of [`execute_blocks`] for benchmarking the parallel
/// speedup.
pub fn execute_blocks_sequential(blocks: Vec<(String, Experiment)>) -> Vec<BlockResult> {
    blocks
        .into_iter()
        .map(|(name, exp)| BlockResult {
            name,
            outcome: execute(&exp),
        })
        .collect()
}

/// First simulated time at which `series` drops to `threshold` or below;
/// `None` when it never does.
pub fn first_crossing(times: &[f64], series: &[f64], threshold: f64) -> Option<f64> {
    times
        .iter()
        .zip(series)
        .find(|&(_, &v)| v <= threshold)
        .map(|(&t, _)| t)
}
