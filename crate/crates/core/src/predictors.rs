//! The three popularity predictors. Each one is a constant scaling of the
//! observed popularity at a fixed `(t_i, t_r)` pair; they differ in which
//! error the constant is chosen to minimize.
//!
//! - LN: slope-1 regression on log counts, back-transformed with the
//!   lognormal bias correction `exp(beta0 + sigma0^2 / 2)`.
//! - CS: the constant minimizing the relative squared error on the training
//!   set, `sum(R) / sum(R^2)` with `R = n_i / n_r`.
//! - GP: division by the mean normalized growth profile `P(t_i, t_r)`.

use std::fmt;
use std::str::FromStr;

use crate::diagnostics::fit_slope1;
use crate::error::{Error, Result};
use crate::series::{Dataset, PopPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Ln,
    Cs,
    Gp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Ln, ModelKind::Cs, ModelKind::Gp];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ln => "ln",
            ModelKind::Cs => "cs",
            ModelKind::Gp => "gp",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ln" => Ok(ModelKind::Ln),
            "cs" => Ok(ModelKind::Cs),
            "gp" => Ok(ModelKind::Gp),
            other => Err(Error::ConfigInvalid(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnParams {
    pub t_i: f64,
    pub t_r: f64,
    pub beta0: f64,
    pub sigma0_sq: f64,
}

impl LnParams {
    pub fn scale(&self) -> f64 {
        (self.beta0 + self.sigma0_sq / 2.0).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsParams {
    pub t_i: f64,
    pub t_r: f64,
    pub alpha: f64,
}

/// Mean normalized growth profile `P(t, t_r)` on a grid of ages.
#[derive(Debug, Clone, PartialEq)]
pub struct GpParams {
    pub t_r: f64,
    /// (age, P) with strictly increasing ages ending at `(t_r, 1)`.
    pub profile: Vec<(f64, f64)>,
}

impl GpParams {
    pub fn new(t_r: f64, profile: Vec<(f64, f64)>) -> Result<Self> {
        if profile.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if profile.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::ConfigInvalid("profile ages must increase".into()));
        }
        if profile.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
            return Err(Error::ConfigInvalid("profile values must lie in [0, 1]".into()));
        }
        Ok(GpParams { t_r, profile })
    }

    /// `P(t, t_r)`, linearly interpolated between grid ages.
    pub fn at(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.profile[0].0, self.profile[self.profile.len() - 1].0);
        if !(t >= lo && t <= hi) {
            return Err(Error::QueryOutOfRange { at: t, lo, hi });
        }
        let idx = self.profile.partition_point(|&(a, _)| a < t);
        let (a1, p1) = self.profile[idx];
        if a1 == t {
            return Ok(p1);
        }
        let (a0, p0) = self.profile[idx - 1];
        Ok(p0 + (p1 - p0) * (t - a0) / (a1 - a0))
    }
}

/// A single-point GP fit: the profile value at one indicator age.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpPoint {
    pub t_i: f64,
    pub t_r: f64,
    pub p: f64,
}

/// Predicted reference-time popularity of one submission.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub t_i: f64,
    pub t_r: f64,
    pub n_hat: f64,
}

pub fn fit_ln(training: &[PopPair], t_i: f64, t_r: f64) -> Result<LnParams> {
    let fit = fit_slope1(training)?;
    Ok(LnParams {
        t_i,
        t_r,
        beta0: fit.beta0,
        sigma0_sq: fit.sigma0_sq,
    })
}

pub fn predict_ln(p: &LnParams, n_i: f64) -> Result<f64> {
    if !(n_i > 0.0) {
        return Err(Error::ZeroPopularity);
    }
    Ok(n_i * p.scale())
}

pub fn fit_cs(training: &[PopPair], t_i: f64, t_r: f64) -> Result<CsParams> {
    if training.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for pair in training {
        let r = pair.ratio();
        s1 += r;
        s2 += r * r;
    }
    Ok(CsParams {
        t_i,
        t_r,
        alpha: s1 / s2,
    })
}

pub fn predict_cs(p: &CsParams, n_i: f64) -> Result<f64> {
    if !(n_i > 0.0) {
        return Err(Error::ZeroPopularity);
    }
    Ok(p.alpha * n_i)
}

/// Mean of `n(t) / n(t_r)` over the training series at every grid age from
/// 0 to `t_r`. Series with zero popularity at `t_r` are skipped.
pub fn fit_gp(training: &Dataset, t_r: f64, grid_step: f64) -> Result<GpParams> {
    if !(grid_step > 0.0) || !(t_r > 0.0) {
        return Err(Error::ConfigInvalid("grid step and t_r must be positive".into()));
    }
    training.require_coverage(t_r)?;
    let grid = profile_grid(t_r, grid_step);
    let mut sums = vec![0.0; grid.len()];
    let mut used = 0usize;
    for s in training.series() {
        let n_r = s.popularity_at(t_r)?;
        if n_r <= 0.0 {
            continue;
        }
        used += 1;
        for (sum, &t) in sums.iter_mut().zip(&grid) {
            *sum += s.popularity_at(t)? / n_r;
        }
    }
    if used == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let profile = grid
        .iter()
        .zip(&sums)
        .map(|(&t, &sum)| (t, if t == t_r { 1.0 } else { sum / used as f64 }))
        .collect();
    GpParams::new(t_r, profile)
}

/// Ages `0, step, 2 step, ...` up to and including `t_r`.
pub fn profile_grid(t_r: f64, step: f64) -> Vec<f64> {
    let n = (t_r / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    match grid.last_mut() {
        Some(last) if (*last - t_r).abs() <= 1e-9 * t_r.max(1.0) => *last = t_r,
        _ => grid.push(t_r),
    }
    grid
}

/// The profile value at `t_i` from pairs: the mean of `n_i / n_r`.
pub fn fit_gp_point(training: &[PopPair], t_i: f64, t_r: f64) -> Result<GpPoint> {
    if training.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let p = training.iter().map(PopPair::ratio).sum::<f64>() / training.len() as f64;
    Ok(GpPoint { t_i, t_r, p })
}

pub fn predict_gp(p: &GpParams, n_i: f64, t_i: f64) -> Result<f64> {
    let profile = p.at(t_i)?;
    if !(n_i > 0.0) || !(profile > 0.0) {
        return Err(Error::ZeroPopularity);
    }
    Ok(n_i / profile)
}

/// Parameters of one model at one `(t_i, t_r)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fitted {
    Ln(LnParams),
    Cs(CsParams),
    Gp(GpPoint),
}

impl Fitted {
    pub fn fit(kind: ModelKind, training: &[PopPair], t_i: f64, t_r: f64) -> Result<Fitted> {
        Ok(match kind {
            ModelKind::Ln => Fitted::Ln(fit_ln(training, t_i, t_r)?),
            ModelKind::Cs => Fitted::Cs(fit_cs(training, t_i, t_r)?),
            ModelKind::Gp => Fitted::Gp(fit_gp_point(training, t_i, t_r)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Fitted::Ln(_) => ModelKind::Ln,
            Fitted::Cs(_) => ModelKind::Cs,
            Fitted::Gp(_) => ModelKind::Gp,
        }
    }

    pub fn t_i(&self) -> f64 {
        match self {
            Fitted::Ln(p) => p.t_i,
            Fitted::Cs(p) => p.t_i,
            Fitted::Gp(p) => p.t_i,
        }
    }

    pub fn t_r(&self) -> f64 {
        match self {
            Fitted::Ln(p) => p.t_r,
            Fitted::Cs(p) => p.t_r,
            Fitted::Gp(p) => p.t_r,
        }
    }

    /// The constant `c` in `n_hat = c * n_i`.
    pub fn scale(&self) -> f64 {
        match self {
            Fitted::Ln(p) => p.scale(),
            Fitted::Cs(p) => p.alpha,
            Fitted::Gp(p) => 1.0 / p.p,
        }
    }

    pub fn predict(&self, n_i: f64) -> Result<f64> {
        match self {
            Fitted::Ln(p) => predict_ln(p, n_i),
            Fitted::Cs(p) => predict_cs(p, n_i),
            Fitted::Gp(p) => {
                if !(n_i > 0.0) || !(p.p > 0.0) {
                    Err(Error::ZeroPopularity)
                } else {
                    Ok(n_i / p.p)
                }
            }
        }
    }
}
