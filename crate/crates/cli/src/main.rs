//! `popcast`: simulate, ingest, rescale, fit and evaluate popularity data.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "popcast", version, about = "Forecast long-term popularity from early counts")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reference age in hours.
    #[arg(long = "t-r", global = true)]
    t_r: Option<f64>,
    /// Indicator-age grid step in hours.
    #[arg(long = "grid-step", global = true)]
    grid_step: Option<f64>,
    /// Events per activity hour for the timebase.
    #[arg(long = "unit-events", global = true)]
    unit_events: Option<f64>,
    #[arg(long = "no-cluster-filter", global = true)]
    no_cluster_filter: bool,
    /// Also write SVG charts.
    #[arg(long, global = true)]
    plots: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum InputKind {
    Events,
    Series,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known ground truth.
    Simulate {
        /// Output directory.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Validate an events or series file and write it back normalized.
    Ingest {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<InputKind>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build the activity-time clock from an event stream and rebase series.
    Timebase {
        events: PathBuf,
        series: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Fit predictors on a training set.
    Fit {
        series: PathBuf,
        #[arg(long = "model", value_delimiter = ',')]
        models: Vec<String>,
        /// Fit a single indicator age instead of the whole grid.
        #[arg(long = "t-i")]
        t_i: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Predict reference-age popularity from fitted parameters.
    Predict {
        params: PathBuf,
        /// CSV with `submission_id,t_i,n_i` rows.
        queries: PathBuf,
        #[arg(long = "model", value_delimiter = ',')]
        models: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Split, fit, and sweep errors over the indicator-age grid.
    Evaluate {
        series: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Correlations, cluster split and residual normality at one indicator age.
    Diagnose {
        series: PathBuf,
        #[arg(long = "t-i", default_value_t = 1.0)]
        t_i: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Average normalized growth profile.
    Profile {
        series: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

/// How a command finished when it did not fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// Some rows or submissions were rejected.
    Partial,
}

fn load_config(g: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(t) = g.t_r {
        cfg.t_r = t;
    }
    if let Some(s) = g.grid_step {
        cfg.grid_step = s;
    }
    if let Some(u) = g.unit_events {
        cfg.unit_events = Some(u);
    }
    if g.no_cluster_filter {
        cfg.cluster_filter = false;
    }
    if g.plots {
        cfg.plots = true;
    }
    Ok(cfg)
}

fn out_path(out: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    out.or_else(|| cfg.output.clone())
        .context("no output path: pass --out or set `output` in the config")
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Simulate { out } => commands::simulate(&cfg, &out_path(out, &cfg)?),
        Command::Ingest { input, kind, out } => commands::ingest(&input, kind, out.as_deref()),
        Command::Timebase {
            events,
            series,
            out,
        } => commands::timebase(&cfg, &events, series.as_deref(), &out_path(out, &cfg)?),
        Command::Fit {
            series,
            models,
            t_i,
            out,
        } => commands::fit(&cfg, &series, &models, t_i, &out_path(out, &cfg)?),
        Command::Predict {
            params,
            queries,
            models,
            out,
        } => commands::predict(&params, &queries, &models, &out_path(out, &cfg)?),
        Command::Evaluate { series, out } => commands::evaluate(&cfg, &series, &out_path(out, &cfg)?),
        Command::Diagnose { series, t_i, out } => {
            commands::diagnose(&cfg, &series, t_i, &out_path(out, &cfg)?)
        }
        Command::Profile { series, out } => commands::profile(&cfg, &series, &out_path(out, &cfg)?),
    }
}

/// I/O failures exit with 1; every other failure is a validation error.
fn exit_code(err: &anyhow::Error) -> u8 {
    let io = err.chain().any(|e| {
        e.is::<std::io::Error>() || matches!(e.downcast_ref(), Some(popcast_core::Error::Io(_)))
    });
    if io {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
