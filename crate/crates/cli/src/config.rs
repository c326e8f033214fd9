//! Flat `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use popcast_core::diagnostics::ClusterConfig;
use popcast_core::synthgen::{Diurnal, EtaShape, LowerCluster, MuProfile};
use popcast_core::{GrowthConfig, KnotPolicy, ModelKind, SplitSpec, SweepConfig, Timestamp};

/// How `evaluate` divides the input into training and test sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitChoice {
    RandomHalf,
    ByTime(Timestamp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub t_r: f64,
    pub grid_step: f64,
    pub unit_events: Option<f64>,
    pub split: SplitChoice,
    pub models: Vec<ModelKind>,
    pub cluster_filter: bool,
    pub cluster_max_age: f64,
    pub bins: usize,
    pub tz_offset: f64,
    pub knots: KnotPolicy,
    pub plots: bool,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,

    pub n_submissions: usize,
    pub horizon: f64,
    pub step: f64,
    pub n0_log_mean: f64,
    pub n0_log_sd: f64,
    pub profile: MuProfile,
    pub eta_sd: f64,
    pub eta_shape: EtaShape,
    pub diurnal_amplitude: f64,
    pub diurnal_peak_hour: f64,
    pub lower_cluster_fraction: f64,
    pub lower_cluster_tau0: f64,
    pub arrival_window: f64,
    pub start: Timestamp,
    pub emit_events: bool,
    pub background_rate: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let g = GrowthConfig::default();
        let s = SweepConfig::default();
        RunConfig {
            seed: g.seed,
            t_r: s.t_r,
            grid_step: s.grid_step,
            unit_events: None,
            split: SplitChoice::RandomHalf,
            models: s.models,
            cluster_filter: true,
            cluster_max_age: s.cluster.max_indicator_age,
            bins: popcast_core::evaluation::DEFAULT_SATURATION_BINS,
            tz_offset: 0.0,
            knots: KnotPolicy::Auto,
            plots: false,
            input: None,
            output: None,
            n_submissions: g.n_submissions,
            horizon: g.horizon,
            step: g.step,
            n0_log_mean: g.n0_log_mean,
            n0_log_sd: g.n0_log_sd,
            profile: g.mu_profile,
            eta_sd: g.eta_sd,
            eta_shape: g.eta_shape,
            diurnal_amplitude: 0.0,
            diurnal_peak_hour: 0.0,
            lower_cluster_fraction: 0.0,
            lower_cluster_tau0: 0.5,
            arrival_window: g.arrival_window,
            start: g.start,
            emit_events: true,
            background_rate: 0.0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| anyhow::anyhow!("`{key}`: cannot parse `{v}`"))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("`{key}`: expected true or false, got `{v}`"),
    }
}

fn profile(v: &str) -> Result<MuProfile> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let f = |s: &str| num::<f64>("profile", s);
    Ok(match parts.as_slice() {
        ["digg_like", a, tau0] => MuProfile::DiggLike {
            a: f(a)?,
            tau0: f(tau0)?,
        },
        ["youtube_like", m] => MuProfile::YoutubeLike { m: f(m)? },
        ["custom", rest] => MuProfile::Custom(
            rest.split_whitespace()
                .map(|s| num("profile", s))
                .collect::<Result<_>>()?,
        ),
        _ => bail!("`profile`: expected digg_like:A:TAU0, youtube_like:M or custom:V1 V2 ..., got `{v}`"),
    })
}

impl RunConfig {
    /// Reads a config file; blank lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", i + 1);
            };
            cfg.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", i + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "seed" => self.seed = num(key, v)?,
            "t_r" => self.t_r = num(key, v)?,
            "grid_step" => self.grid_step = num(key, v)?,
            "unit_events" => self.unit_events = Some(num(key, v)?),
            "split" => {
                self.split = match v.split_once(':') {
                    None if v == "random_half" => SplitChoice::RandomHalf,
                    Some(("by_time", t)) => SplitChoice::ByTime(
                        popcast_core::io::parse_timestamp(t).map_err(anyhow::Error::msg)?,
                    ),
                    _ => bail!("`split`: expected random_half or by_time:TIMESTAMP, got `{v}`"),
                }
            }
            "models" => {
                self.models = v
                    .split(',')
                    .map(|m| m.parse::<ModelKind>().map_err(anyhow::Error::from))
                    .collect::<Result<_>>()?;
                if self.models.is_empty() {
                    bail!("`models` is empty");
                }
            }
            "cluster_filter" => self.cluster_filter = boolean(key, v)?,
            "cluster_max_age" => self.cluster_max_age = num(key, v)?,
            "bins" => self.bins = num(key, v)?,
            "tz_offset" => self.tz_offset = num(key, v)?,
            "knots" => {
                self.knots = match v {
                    "auto" => KnotPolicy::Auto,
                    "per_event" => KnotPolicy::PerEvent,
                    "per_minute" => KnotPolicy::PerMinute,
                    _ => bail!("`knots`: expected auto, per_event or per_minute"),
                }
            }
            "plots" => self.plots = boolean(key, v)?,
            "input" => self.input = Some(PathBuf::from(v)),
            "output" => self.output = Some(PathBuf::from(v)),
            "n_submissions" => self.n_submissions = num(key, v)?,
            "horizon" => self.horizon = num(key, v)?,
            "step" => self.step = num(key, v)?,
            "n0_log_mean" => self.n0_log_mean = num(key, v)?,
            "n0_log_sd" => self.n0_log_sd = num(key, v)?,
            "profile" => self.profile = profile(v)?,
            "eta_sd" => self.eta_sd = num(key, v)?,
            "eta_shape" => {
                self.eta_shape = match v {
                    "constant" => EtaShape::Constant,
                    "profile_scaled" => EtaShape::ProfileScaled,
                    _ => bail!("`eta_shape`: expected constant or profile_scaled"),
                }
            }
            "diurnal_amplitude" => self.diurnal_amplitude = num(key, v)?,
            "diurnal_peak_hour" => self.diurnal_peak_hour = num(key, v)?,
            "lower_cluster_fraction" => self.lower_cluster_fraction = num(key, v)?,
            "lower_cluster_tau0" => self.lower_cluster_tau0 = num(key, v)?,
            "arrival_window" => self.arrival_window = num(key, v)?,
            "start" => {
                self.start = popcast_core::io::parse_timestamp(v).map_err(anyhow::Error::msg)?
            }
            "emit_events" => self.emit_events = boolean(key, v)?,
            "background_rate" => self.background_rate = num(key, v)?,
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    pub fn split_spec(&self) -> SplitSpec {
        match self.split {
            SplitChoice::RandomHalf => SplitSpec::RandomHalf(self.seed),
            SplitChoice::ByTime(t) => SplitSpec::ByTime(t),
        }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            t_r: self.t_r,
            grid_step: self.grid_step,
            models: self.models.clone(),
            cluster: ClusterConfig {
                enabled: self.cluster_filter,
                max_indicator_age: self.cluster_max_age,
                seed: self.seed,
                ..ClusterConfig::default()
            },
        }
    }

    pub fn diurnal(&self) -> Option<Diurnal> {
        (self.diurnal_amplitude > 0.0).then_some(Diurnal {
            amplitude: self.diurnal_amplitude,
            peak_hour: self.diurnal_peak_hour,
        })
    }

    pub fn growth(&self) -> GrowthConfig {
        GrowthConfig {
            n_submissions: self.n_submissions,
            horizon: self.horizon,
            step: self.step,
            n0_log_mean: self.n0_log_mean,
            n0_log_sd: self.n0_log_sd,
            mu_profile: self.profile.clone(),
            eta_sd: self.eta_sd,
            eta_shape: self.eta_shape,
            diurnal: self.diurnal(),
            lower_cluster: (self.lower_cluster_fraction > 0.0).then_some(LowerCluster {
                fraction: self.lower_cluster_fraction,
                tau0: self.lower_cluster_tau0,
            }),
            start: self.start,
            arrival_window: self.arrival_window,
            emit_events: self.emit_events,
            seed: self.seed,
        }
    }
}
