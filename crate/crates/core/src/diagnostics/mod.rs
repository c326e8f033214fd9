//! Statistical evidence for the log-linear growth model: log-scale
//! correlations, the slope-1 residual fit, normality and homoscedasticity
//! checks.

mod cluster;

pub use cluster::{cluster_filter, ClusterConfig, ClusterSplit};

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::series::PopPair;

/// Critical value of the chi-squared distribution with 2 degrees of
/// freedom at the 5% level.
pub const JB_CRITICAL_5PCT: f64 = 5.991464547107979;

/// Pearson correlation of `(ln n_i, ln n_r)`.
pub fn pearson_log(pairs: &[PopPair]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: pairs.len(),
        });
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.n_i.ln()).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.n_r.ln()).collect();
    pearson(&x, &y)
}

/// Plain Pearson coefficient, clamped to [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateVariance("pearson needs spread on both axes"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Intercept, residual variance and residuals of the log-scale regression
/// with slope fixed at one.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFit {
    /// Estimate of `ln r(t_i, t_r)`.
    pub beta0: f64,
    /// Unbiased (n-1) variance of the residuals.
    pub sigma0_sq: f64,
    pub residuals: Vec<f64>,
}

impl ResidualFit {
    /// Sum of squared log-scale prediction errors for intercept `beta0`.
    pub fn log_sse(pairs: &[PopPair], beta0: f64) -> f64 {
        pairs
            .iter()
            .map(|p| {
                let r = p.log_growth() - beta0;
                r * r
            })
            .sum()
    }
}

/// Least-squares intercept with the slope fixed at one: the mean log growth.
pub fn fit_slope1(pairs: &[PopPair]) -> Result<ResidualFit> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: pairs.len(),
        });
    }
    let growth: Vec<f64> = pairs.iter().map(PopPair::log_growth).collect();
    let n = growth.len() as f64;
    let beta0 = growth.iter().sum::<f64>() / n;
    let residuals: Vec<f64> = growth.iter().map(|g| g - beta0).collect();
    let sigma0_sq = residuals.iter().map(|r| r * r).sum::<f64>() / (n - 1.0);
    Ok(ResidualFit {
        beta0,
        sigma0_sq,
        residuals,
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Quantile-quantile pairs `(theoretical, empirical)`: sorted residuals
/// against normal quantiles at plotting positions `(i - 0.5) / n`, scaled by
/// the sample mean and standard deviation.
pub fn qq_data(residuals: &[f64]) -> Result<Vec<(f64, f64)>> {
    if residuals.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: residuals.len(),
        });
    }
    let (mean, sd) = mean_sd(residuals);
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let std_normal = Normal::standard();
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let p = (i as f64 + 0.5) / n;
            (mean + sd * std_normal.inverse_cdf(p), e)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarqueBera {
    pub statistic: f64,
    pub skewness: f64,
    /// Raw (not excess) kurtosis.
    pub kurtosis: f64,
    pub reject_at_5pct: bool,
}

/// Jarque-Bera normality statistic `n/6 (S^2 + (K-3)^2/4)` with population
/// moments; rejects when it exceeds the 5% chi-squared(2) critical value.
pub fn jarque_bera(residuals: &[f64]) -> Result<JarqueBera> {
    if residuals.len() < 8 {
        return Err(Error::InsufficientData {
            needed: 8,
            got: residuals.len(),
        });
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in residuals {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // constant input up to rounding of the mean
    if !(m2 > (mean.abs() * 1e-12).powi(2)) {
        return Err(Error::DegenerateVariance("jarque-bera needs nonzero variance"));
    }
    let skewness = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);
    let statistic = n / 6.0 * (skewness * skewness + (kurtosis - 3.0).powi(2) / 4.0);
    Ok(JarqueBera {
        statistic,
        skewness,
        kurtosis,
        reject_at_5pct: statistic > JB_CRITICAL_5PCT,
    })
}

/// Residual moments within one `ln n_i` bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBin {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub mean: f64,
    /// Unbiased variance; zero for single-member bins.
    pub variance: f64,
    pub count: usize,
}

/// Residual mean and variance over `bins` equal-width bins of `ln n_i`.
/// Only populated bins are returned.
pub fn homoscedasticity_bins(
    pairs: &[PopPair],
    fit: &ResidualFit,
    bins: usize,
) -> Result<Vec<ResidualBin>> {
    if pairs.is_empty() || bins == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            got: pairs.len(),
        });
    }
    if pairs.len() != fit.residuals.len() {
        return Err(Error::ConfigInvalid("fit does not match pairs".into()));
    }
    let logs: Vec<f64> = pairs.iter().map(|p| p.n_i.ln()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for (x, r) in logs.iter().zip(&fit.residuals) {
        let k = if width > 0.0 {
            (((x - lo) / width).floor() as usize).min(bins - 1)
        } else {
            0
        };
        members[k].push(*r);
    }
    Ok(members
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(k, m)| {
            let n = m.len() as f64;
            let mean = m.iter().sum::<f64>() / n;
            let variance = if m.len() > 1 {
                m.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            ResidualBin {
                index: k,
                lower: lo + k as f64 * width,
                upper: lo + (k + 1) as f64 * width,
                mean,
                variance,
                count: m.len(),
            }
        })
        .collect())
}
