//! Synthetic portal data from the multiplicative lognormal growth process.
//!
//! Each submission starts from a lognormal initial popularity and grows by
//! `ln N(k+1) = ln N(k) + eta_k` with `eta_k ~ Normal(mu_k, sd_k^2)` on a
//! fixed activity-time step grid. Steps are laid out on an activity clock;
//! with a diurnal cycle enabled the clock runs faster at the daily peak, and
//! sample ages and events are mapped back to wall time through it.
//!
//! Counters never decrease, so negative draws are truncated to a zero
//! increment. The truncation rate is reported; the analytic ground truth
//! ignores it.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::{Dataset, PopularitySeries, Sample, Submission, TimeUnit, Timestamp};
use crate::timebase::{Event, EventStream};

/// Mean per-step log increment as a function of activity age.
#[derive(Debug, Clone, PartialEq)]
pub enum MuProfile {
    /// `a * exp(-age / tau0)`: fast early growth that saturates.
    DiggLike { a: f64, tau0: f64 },
    /// Constant `m` per step.
    YoutubeLike { m: f64 },
    /// One value per step.
    Custom(Vec<f64>),
}

/// How the per-step noise standard deviation varies along the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaShape {
    /// `sd_k = eta_sd` at every step.
    #[default]
    Constant,
    /// `sd_k = eta_sd * mu_k / max(mu)`, so noise fades with the drift.
    ProfileScaled,
}

/// Daily activity cycle: intensity `1 + amplitude * cos(2 pi (h - peak) / 24)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diurnal {
    pub amplitude: f64,
    /// UTC hour of day of maximum activity.
    pub peak_hour: f64,
}

/// A fraction of submissions that follow a much faster decaying drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerCluster {
    pub fraction: f64,
    pub tau0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConfig {
    pub n_submissions: usize,
    /// Trajectory length in activity hours.
    pub horizon: f64,
    pub step: f64,
    pub n0_log_mean: f64,
    pub n0_log_sd: f64,
    pub mu_profile: MuProfile,
    pub eta_sd: f64,
    pub eta_shape: EtaShape,
    pub diurnal: Option<Diurnal>,
    /// Only meaningful with a `DiggLike` profile.
    pub lower_cluster: Option<LowerCluster>,
    pub start: Timestamp,
    /// Origins are spread uniformly over this many hours after `start`.
    pub arrival_window: f64,
    pub emit_events: bool,
    pub seed: u64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            n_submissions: 1000,
            horizon: 720.0,
            step: 1.0,
            n0_log_mean: 20f64.ln(),
            n0_log_sd: 0.8,
            mu_profile: MuProfile::DiggLike { a: 0.5, tau0: 6.0 },
            eta_sd: 0.2,
            eta_shape: EtaShape::ProfileScaled,
            diurnal: None,
            lower_cluster: None,
            // 2007-07-01T00:00:00Z
            start: Timestamp(1_183_248_000.0),
            arrival_window: 720.0,
            emit_events: false,
            seed: 1,
        }
    }
}

impl GrowthConfig {
    fn n_steps(&self) -> usize {
        (self.horizon / self.step).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.to_string()));
        if self.n_submissions == 0 {
            return bad("n_submissions must be positive");
        }
        if !(self.step > 0.0 && self.horizon > 0.0) {
            return bad("step and horizon must be positive");
        }
        let k = self.horizon / self.step;
        if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
            return bad("step must divide the horizon");
        }
        if !(self.eta_sd >= 0.0) || !(self.n0_log_sd >= 0.0) || !self.n0_log_mean.is_finite() {
            return bad("noise parameters must be non-negative");
        }
        if !(self.arrival_window >= 0.0) {
            return bad("arrival window must be non-negative");
        }
        match &self.mu_profile {
            MuProfile::DiggLike { a, tau0 } if !(*a > 0.0 && *tau0 > 0.0) => {
                return bad("digg_like needs a > 0 and tau0 > 0")
            }
            MuProfile::YoutubeLike { m } if !m.is_finite() => return bad("youtube_like m not finite"),
            MuProfile::Custom(v) if v.len() != self.n_steps() => {
                return bad("custom profile needs one value per step")
            }
            _ => {}
        }
        if let Some(d) = self.diurnal {
            if !(0.0..1.0).contains(&d.amplitude) {
                return bad("diurnal amplitude must lie in [0, 1)");
            }
        }
        if let Some(lc) = self.lower_cluster {
            if !matches!(self.mu_profile, MuProfile::DiggLike { .. }) {
                return bad("lower cluster requires a digg_like profile");
            }
            if !(0.0..=1.0).contains(&lc.fraction) || !(lc.tau0 > 0.0) {
                return bad("lower cluster needs fraction in [0, 1] and tau0 > 0");
            }
        }
        let mu = self.step_means(None);
        let sd = self.step_sds(&mu);
        let peak = self.n0_log_mean
            + 6.0 * self.n0_log_sd
            + mu.iter().map(|m| m.max(0.0)).sum::<f64>()
            + 6.0 * sd.iter().map(|s| s * s).sum::<f64>().sqrt();
        if peak > 34.0 {
            return bad("configuration would overflow integer counts");
        }
        Ok(())
    }

    fn step_means(&self, tau0_override: Option<f64>) -> Vec<f64> {
        let n = self.n_steps();
        match &self.mu_profile {
            MuProfile::DiggLike { a, tau0 } => {
                let tau0 = tau0_override.unwrap_or(*tau0);
                (0..n)
                    .map(|k| a * (-(k as f64 * self.step) / tau0).exp())
                    .collect()
            }
            MuProfile::YoutubeLike { m } => vec![*m; n],
            MuProfile::Custom(v) => v.clone(),
        }
    }

    fn step_sds(&self, means: &[f64]) -> Vec<f64> {
        match self.eta_shape {
            EtaShape::Constant => vec![self.eta_sd; means.len()],
            EtaShape::ProfileScaled => {
                let max = means.iter().copied().fold(0.0, f64::max);
                means
                    .iter()
                    .map(|m| if max > 0.0 { self.eta_sd * m.max(0.0) / max } else { 0.0 })
                    .collect()
            }
        }
    }
}

/// Analytic moments of the log growth between step-grid ages.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub step: f64,
    /// Mean log increment of each step.
    pub mu: Vec<f64>,
    /// Variance of each step's increment.
    pub var: Vec<f64>,
}

impl GroundTruth {
    fn index(&self, t: f64) -> Result<usize> {
        let k = t / self.step;
        let r = k.round();
        if (k - r).abs() > 1e-9 * k.abs().max(1.0) || r < 0.0 || r as usize > self.mu.len() {
            return Err(Error::OffGrid(t));
        }
        Ok(r as usize)
    }

    fn range(&self, t1: f64, t2: f64) -> Result<(usize, usize)> {
        let (a, b) = (self.index(t1)?, self.index(t2)?);
        if a > b {
            return Err(Error::OffGrid(t1));
        }
        Ok((a, b))
    }

    /// `m(t1, t2)`: the summed step means, i.e. `ln r(t1, t2)`.
    pub fn true_ln_r(&self, t1: f64, t2: f64) -> Result<f64> {
        let (a, b) = self.range(t1, t2)?;
        Ok(self.mu[a..b].iter().sum())
    }

    /// `v(t1, t2)`: the summed step variances.
    pub fn true_variance(&self, t1: f64, t2: f64) -> Result<f64> {
        let (a, b) = self.range(t1, t2)?;
        Ok(self.var[a..b].iter().sum())
    }

    /// Population-optimal LN and CS constants for a lognormal growth factor
    /// `exp(X)`, `X ~ Normal(m, v)`: `E[exp X] = exp(m + v/2)` and
    /// `E[R] / E[R^2] = exp(m - 3v/2)` with `R = exp(-X)`.
    pub fn optimal_constants(&self, t_i: f64, t_r: f64) -> Result<(f64, f64)> {
        let m = self.true_ln_r(t_i, t_r)?;
        let v = self.true_variance(t_i, t_r)?;
        Ok(((m + v / 2.0).exp(), (m - 1.5 * v).exp()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationReport {
    pub truncated_steps: u64,
    pub total_steps: u64,
    pub lower_cluster_members: usize,
}

impl GenerationReport {
    pub fn truncation_rate(&self) -> f64 {
        self.truncated_steps as f64 / self.total_steps.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub dataset: Dataset,
    /// Empty unless `emit_events` was set.
    pub events: EventStream,
    pub truth: GroundTruth,
    pub report: GenerationReport,
}

/// Wall clock to activity clock under a daily cosine intensity. Both are in
/// absolute hours; the activity clock advances by 24 hours per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityClock {
    diurnal: Option<Diurnal>,
}

impl ActivityClock {
    pub fn new(diurnal: Option<Diurnal>) -> Self {
        ActivityClock { diurnal }
    }

    fn swing(d: &Diurnal) -> f64 {
        d.amplitude * 24.0 / (2.0 * PI)
    }

    /// Relative intensity at wall hour `h`.
    pub fn intensity(&self, h: f64) -> f64 {
        match self.diurnal {
            None => 1.0,
            Some(d) => 1.0 + d.amplitude * (2.0 * PI * (h - d.peak_hour) / 24.0).cos(),
        }
    }

    pub fn activity(&self, h: f64) -> f64 {
        match self.diurnal {
            None => h,
            Some(d) => h + Self::swing(&d) * (2.0 * PI * (h - d.peak_hour) / 24.0).sin(),
        }
    }

    /// Inverse of [`ActivityClock::activity`], by safeguarded Newton steps.
    pub fn wall(&self, a: f64) -> f64 {
        let Some(d) = self.diurnal else {
            return a;
        };
        let b = Self::swing(&d);
        let (mut lo, mut hi) = (a - b - 1e-9, a + b + 1e-9);
        let mut h = a;
        for _ in 0..100 {
            let f = self.activity(h) - a;
            if f.abs() <= 1e-12 * a.abs().max(1.0) {
                break;
            }
            if f > 0.0 {
                hi = h;
            } else {
                lo = h;
            }
            let next = h - f / self.intensity(h);
            h = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        h
    }
}

struct Trajectory {
    series: PopularitySeries,
    events: Vec<(f64, u32)>,
    truncated: u64,
    lower: bool,
}

fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Generates a dataset, its event stream and the analytic ground truth.
/// Each submission draws from its own `(seed, index)` substream, so the
/// output does not depend on thread scheduling.
pub fn generate(cfg: &GrowthConfig) -> Result<Synthetic> {
    cfg.validate()?;
    let mu = cfg.step_means(None);
    let sd = cfg.step_sds(&mu);
    let (mu_lower, sd_lower) = match cfg.lower_cluster {
        Some(lc) => {
            let m = cfg.step_means(Some(lc.tau0));
            let s = cfg.step_sds(&m);
            (m, s)
        }
        None => (Vec::new(), Vec::new()),
    };
    let clock = ActivityClock::new(cfg.diurnal);
    let n_steps = mu.len();

    let trajectories: Vec<Trajectory> = (0..cfg.n_submissions)
        .into_par_iter()
        .map(|i| -> Result<Trajectory> {
            let mut rng = substream(cfg.seed, i as u64);
            let origin_s =
                (cfg.start.0 + rng.random::<f64>() * cfg.arrival_window * 3600.0).round();
            let origin_h = origin_s / 3600.0;
            let lower = cfg
                .lower_cluster
                .is_some_and(|lc| rng.random::<f64>() < lc.fraction);
            let (mu, sd) = if lower { (&mu_lower, &sd_lower) } else { (&mu, &sd) };

            let z: f64 = rng.sample(StandardNormal);
            let mut log_n = cfg.n0_log_mean + cfg.n0_log_sd * z;
            let mut counts = Vec::with_capacity(n_steps + 1);
            counts.push(log_n.exp().round() as u64);
            let mut truncated = 0u64;
            for k in 0..n_steps {
                let z: f64 = rng.sample(StandardNormal);
                let eta = mu[k] + sd[k] * z;
                if eta < 0.0 {
                    truncated += 1;
                } else {
                    log_n += eta;
                }
                counts.push(log_n.exp().round() as u64);
            }

            let a0 = clock.activity(origin_h);
            let wall_age = |tau: f64| -> f64 {
                if cfg.diurnal.is_none() {
                    tau
                } else {
                    clock.wall(a0 + tau) - origin_h
                }
            };
            let samples: Vec<Sample> = counts
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let tau = k as f64 * cfg.step;
                    Sample::new(if k == 0 { 0.0 } else { wall_age(tau) }, c)
                })
                .collect();

            let mut events = Vec::new();
            if cfg.emit_events {
                for k in 0..n_steps {
                    for _ in 0..counts[k + 1] - counts[k] {
                        let tau = (k as f64 + rng.random::<f64>()) * cfg.step;
                        let h = if cfg.diurnal.is_none() {
                            origin_h + tau
                        } else {
                            clock.wall(a0 + tau)
                        };
                        events.push((h * 3600.0, i as u32));
                    }
                }
            }
            let series = PopularitySeries::new(
                Submission::new(format!("s{i:06}"), Timestamp(origin_s)),
                samples,
            )?;
            Ok(Trajectory {
                series,
                events,
                truncated,
                lower,
            })
        })
        .collect::<Result<_>>()?;

    let mut report = GenerationReport {
        truncated_steps: 0,
        total_steps: (cfg.n_submissions * n_steps) as u64,
        lower_cluster_members: 0,
    };
    let mut all_events = Vec::new();
    let mut series = Vec::with_capacity(trajectories.len());
    let mut span = (f64::INFINITY, f64::NEG_INFINITY);
    for t in trajectories {
        report.truncated_steps += t.truncated;
        report.lower_cluster_members += usize::from(t.lower);
        let origin = t.series.origin().0;
        span.0 = span.0.min(origin);
        span.1 = span.1.max(origin + t.series.last_age() * 3600.0);
        all_events.extend(t.events);
        series.push(t.series);
    }
    all_events.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let ids = series.iter().map(|s| s.id().to_string()).collect();
    let events = all_events
        .into_iter()
        .map(|(t, k)| Event {
            time: Timestamp(t),
            submission: k,
        })
        .collect();
    let span = (
        Timestamp(span.0),
        Timestamp(span.1.max(span.0)),
    );
    let events = EventStream::new(ids, events, span)?;
    let truth = GroundTruth {
        step: cfg.step,
        var: sd.iter().map(|s| s * s).collect(),
        mu,
    };
    Ok(Synthetic {
        dataset: Dataset::new(series, TimeUnit::WallHours)?,
        events,
        truth,
        report,
    })
}

/// Poisson event stream with mean rate `rate_per_hour` modulated by an
/// optional daily cycle, generated on the activity clock and mapped back to
/// wall time. All events carry the id `"bg"`.
pub fn diurnal_stream(
    rate_per_hour: f64,
    diurnal: Option<Diurnal>,
    start: Timestamp,
    hours: f64,
    seed: u64,
) -> Result<EventStream> {
    if !(rate_per_hour > 0.0 && hours > 0.0) {
        return Err(Error::ConfigInvalid("rate and length must be positive".into()));
    }
    if let Some(d) = diurnal {
        if !(0.0..1.0).contains(&d.amplitude) {
            return Err(Error::ConfigInvalid("diurnal amplitude must lie in [0, 1)".into()));
        }
    }
    let clock = ActivityClock::new(diurnal);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h0, h1) = (start.hours(), start.hours() + hours);
    let (a0, a1) = (clock.activity(h0), clock.activity(h1));
    let mut events = Vec::new();
    let mut a = a0;
    loop {
        let gap: f64 = rng.sample(Exp1);
        a += gap / rate_per_hour;
        if a >= a1 {
            break;
        }
        let h = clock.wall(a).clamp(h0, h1);
        events.push(Event {
            time: Timestamp(h * 3600.0),
            submission: 0,
        });
    }
    EventStream::new(vec!["bg".into()], events, (start, Timestamp(h1 * 3600.0)))
}
