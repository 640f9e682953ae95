//! Command-line interface: `run`, `reproduce`, `compare`, `check`.
//!
//! Exit codes: 0 success, 2 configuration or validation failure,
//! 3 divergence during integration, 1 anything else.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis;
use crate::config::{self, build_experiment, CompareConfig, ExperimentConfig};
use crate::error::Error;
use crate::output;
use crate::plot;
use crate::runner::{self, EmitFlags, RunOutcome};

#[derive(Debug, Parser)]
#[command(
    name = "pidflow",
    about = "Continuous-time distributed optimization with PID-type consensus feedback",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides the config's output.directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Skip SVG plot emission.
    #[arg(long, global = true)]
    no_svg: bool,

    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single experiment from a JSON config.
    Run { config: PathBuf },
    /// Run one of the built-in benchmark experiments.
    Reproduce {
        #[arg(value_enum)]
        example: ExampleName,
    },
    /// Run several variant/gain blocks over one shared setup.
    Compare { config: PathBuf },
    /// Evaluate the second-order gain condition for a config.
    Check { config: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExampleName {
    Example1,
    Example1Nonconvex,
    Example2,
}

/// Runs the CLI and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path as well.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidGains(_)
        | Error::InvalidTopology(_)
        | Error::InvalidEdge(_)
        | Error::NotConnected(_)
        | Error::InvalidObjective(_)
        | Error::InvalidBenchmark(_)
        | Error::InvalidInit(_)
        | Error::Shape(_) => 2,
        Error::Divergence { .. } => 3,
        _ => 1,
    }
}

fn dispatch(cli: &Cli) -> crate::Result<()> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = config::load_experiment_config(config)?;
            cmd_run(cli, &cfg, None)
        }
        Command::Reproduce { example } => cmd_reproduce(cli, *example),
        Command::Compare { config } => {
            let cfg = config::load_compare_config(config)?;
            cmd_compare(cli, &cfg, None)
        }
        Command::Check { config } => {
            let cfg = config::load_experiment_config(config)?;
            cmd_check(&cfg)
        }
    }
}

fn out_dir(cli: &Cli, cfg_dir: &Option<String>, fallback: &str) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| cfg_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn emit_flags(cli: &Cli, cfg: &config::OutputSpec) -> EmitFlags {
    EmitFlags {
        csv: cfg.emit_csv,
        svg: cfg.emit_svg && !cli.no_svg,
    }
}

fn report_outcome(cli: &Cli, name: &str, outcome: &RunOutcome) {
    if cli.quiet {
        return;
    }
    if let Some(warning) = &outcome.summary.stability_warning {
        eprintln!("warning [{name}]: {warning}");
    }
    let fit_text = match &outcome.summary.fit {
        Some(f) => format!("rate {:+.4e} (r² {:.4})", f.rate, f.r_squared),
        None => "rate unavailable".to_string(),
    };
    println!(
        "{name}: final relative error {:.6e}, {fit_text}, {:.2}s",
        outcome.summary.final_relative_error, outcome.summary.wall_clock_seconds
    );
}

fn cmd_run(cli: &Cli, cfg: &ExperimentConfig, fallback_dir: Option<&str>) -> crate::Result<()> {
    let exp = build_experiment(cfg)?;
    let dir = out_dir(cli, &cfg.output.directory, fallback_dir.unwrap_or("out/run"));
    let flags = emit_flags(cli, &cfg.output);
    match runner::execute(&exp) {
        Ok(outcome) => {
            let written = runner::write_run_artifacts(&dir, None, &outcome, flags)?;
            report_outcome(cli, exp.variant.as_str(), &outcome);
            if !cli.quiet {
                for path in written {
                    println!("wrote {}", path.display());
                }
            }
            Ok(())
        }
        Err(Error::Divergence {
            time,
            component,
            partial: Some(partial),
        }) => {
            let path = runner::write_divergence_artifacts(&dir, None, &exp, time, &partial)?;
            eprintln!(
                "divergence at t = {time} (component {component}); partial trajectory in {}",
                path.display()
            );
            Err(Error::Divergence {
                time,
                component,
                partial: None,
            })
        }
        Err(e) => Err(e),
    }
}

fn cmd_reproduce(cli: &Cli, example: ExampleName) -> crate::Result<()> {
    match example {
        ExampleName::Example1 => {
            cmd_run(cli, &config::presets::example1(), Some("out/example1"))
        }
        ExampleName::Example1Nonconvex => cmd_run(
            cli,
            &config::presets::example1_nonconvex(),
            Some("out/example1_nonconvex"),
        ),
        ExampleName::Example2 => {
            cmd_compare(cli, &config::presets::example2(), Some("out/example2"))
        }
    }
}

fn cmd_compare(cli: &Cli, cfg: &CompareConfig, fallback_dir: Option<&str>) -> crate::Result<()> {
    let expanded = cfg.expand()?;
    let compare_hash = config::config_hash(cfg);
    let dir = out_dir(
        cli,
        &cfg.output.directory,
        fallback_dir.unwrap_or("out/compare"),
    );
    let flags = emit_flags(cli, &cfg.output);

    let mut blocks = Vec::new();
    for (name, run_cfg) in &expanded {
        blocks.push((name.clone(), build_experiment(run_cfg)?));
    }
    let results = runner::execute_blocks(blocks);

    let mut first_error: Option<Error> = None;
    let mut succeeded: Vec<(String, RunOutcome)> = Vec::new();
    for result in results {
        match result.outcome {
            Ok(outcome) => {
                runner::write_run_artifacts(&dir, Some(&result.name), &outcome, flags)?;
                report_outcome(cli, &result.name, &outcome);
                succeeded.push((result.name, outcome));
            }
            Err(e) => {
                eprintln!("block `{}` failed: {e}", result.name);
                let sanitized = match e {
                    Error::Divergence {
                        time, component, ..
                    } => Error::Divergence {
                        time,
                        component,
                        partial: None,
                    },
                    other => other,
                };
                first_error.get_or_insert(sanitized);
            }
        }
    }

    if succeeded.len() >= 2 {
        let named: Vec<(String, &analysis::MetricsSeries)> = succeeded
            .iter()
            .map(|(name, outcome)| (name.clone(), &outcome.metrics))
            .collect();
        output::write_comparison_csv(&dir.join("comparison.csv"), &compare_hash, &named)?;
        if flags.svg {
            let series: Vec<plot::Series> = succeeded
                .iter()
                .map(|(name, outcome)| plot::Series {
                    label: name.clone(),
                    times: &outcome.metrics.times,
                    values: &outcome.metrics.relative_error,
                })
                .collect();
            plot::render_log_plot(
                &dir.join("comparison.svg"),
                "relative error comparison",
                "relative error",
                &series,
            )?;
        }
        if !cli.quiet {
            println!("wrote {}", dir.join("comparison.csv").display());
        }
    }

    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn cmd_check(cfg: &ExperimentConfig) -> crate::Result<()> {
    if !cfg.variant.has_velocity() {
        return Err(Error::InvalidConfig(
            "the gain condition applies to second-order variants".into(),
        ));
    }
    let set = cfg.objective.build()?;
    let bundle = cfg.graph.build()?.laplacian_bundle()?;
    let gains = cfg.gains.to_gains(cfg.variant)?;
    let report = analysis::check_condition(cfg.variant, &gains, set.l_global(), &bundle)?;
    println!("{report}");
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

/// Writes a config file for tests and docs.
pub fn write_config_json(path: &Path, cfg: &ExperimentConfig) -> crate::Result<()> {
    output::write_json(path, cfg)
}
