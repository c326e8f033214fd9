//! Train/test protocol, error measures and error sweeps over indicator ages.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagnostics::{cluster_filter, ClusterConfig};
use crate::error::{Error, Result};
use crate::predictors::{fit_gp, Fitted, GpParams, ModelKind, Prediction};
use crate::series::{Dataset, PopularitySeries, Timestamp};

/// Default reference age: 30 days.
pub const DEFAULT_REFERENCE_AGE: f64 = 720.0;
pub const DEFAULT_SATURATION_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    /// Submissions originating before the cut train, the rest test.
    ByTime(Timestamp),
    /// Seeded shuffle, then halves (training gets the extra one when odd).
    RandomHalf(u64),
}

pub fn split(ds: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    if ds.is_empty() {
        return Err(Error::EmptySplit("input"));
    }
    let (train, test) = match spec {
        SplitSpec::ByTime(cut) => (
            ds.filter(|s| s.origin().0 < cut.0),
            ds.filter(|s| s.origin().0 >= cut.0),
        ),
        SplitSpec::RandomHalf(seed) => {
            let mut order: Vec<usize> = (0..ds.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let n_train = ds.len() - ds.len() / 2;
            let mut in_train = vec![false; ds.len()];
            for &i in &order[..n_train] {
                in_train[i] = true;
            }
            let mut k = 0;
            let train = ds.filter(|_| {
                k += 1;
                in_train[k - 1]
            });
            let mut k = 0;
            let test = ds.filter(|_| {
                k += 1;
                !in_train[k - 1]
            });
            (train, test)
        }
    };
    if train.is_empty() {
        return Err(Error::EmptySplit("training"));
    }
    if test.is_empty() {
        return Err(Error::EmptySplit("test"));
    }
    Ok((train, test))
}

/// Squared error `(n_hat - actual)^2`.
pub fn qse(prediction: &Prediction, actual: f64) -> f64 {
    let d = prediction.n_hat - actual;
    d * d
}

/// Relative squared error `((n_hat - actual) / actual)^2`.
pub fn qre(prediction: &Prediction, actual: f64) -> Result<f64> {
    if !(actual > 0.0) {
        return Err(Error::ZeroPopularity);
    }
    let d = (prediction.n_hat - actual) / actual;
    Ok(d * d)
}

/// Indicator ages `step, 2 step, ...` strictly below `t_r`.
pub fn indicator_grid(t_r: f64, step: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut k = 1usize;
    loop {
        let t = k as f64 * step;
        if t >= t_r - 1e-9 * t_r.max(1.0) {
            break;
        }
        grid.push(t);
        k += 1;
    }
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub t_r: f64,
    pub grid_step: f64,
    pub models: Vec<ModelKind>,
    pub cluster: ClusterConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            t_r: DEFAULT_REFERENCE_AGE,
            grid_step: 1.0,
            models: ModelKind::ALL.to_vec(),
            cluster: ClusterConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        indicator_grid(self.t_r, self.grid_step)
    }
}

/// Fitted models at one indicator age.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub t_i: f64,
    pub fits: Vec<Fitted>,
    /// Training pairs the models were fitted on.
    pub n_train: usize,
    /// Training submissions dropped for zero popularity.
    pub zero_excluded: usize,
    /// Training submissions dropped by the cluster filter.
    pub cluster_removed: usize,
}

impl GridPoint {
    pub fn get(&self, kind: ModelKind) -> Option<&Fitted> {
        self.fits.iter().find(|f| f.kind() == kind)
    }
}

/// Per-indicator-age parameters for every requested model.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedGrid {
    pub t_r: f64,
    pub points: Vec<GridPoint>,
}

impl FittedGrid {
    /// Assembles a grid from flat parameter records, e.g. read from a file.
    pub fn from_fits(fits: Vec<Fitted>) -> Result<Self> {
        let Some(first) = fits.first() else {
            return Err(Error::EmptyInput);
        };
        let t_r = first.t_r();
        if fits.iter().any(|f| f.t_r() != t_r) {
            return Err(Error::ConfigInvalid("parameters mix reference ages".into()));
        }
        let mut sorted = fits;
        sorted.sort_by(|a, b| a.t_i().total_cmp(&b.t_i()).then(a.kind().cmp(&b.kind())));
        let mut points: Vec<GridPoint> = Vec::new();
        for f in sorted {
            match points.last_mut() {
                Some(p) if p.t_i == f.t_i() => p.fits.push(f),
                _ => points.push(GridPoint {
                    t_i: f.t_i(),
                    fits: vec![f],
                    n_train: 0,
                    zero_excluded: 0,
                    cluster_removed: 0,
                }),
            }
        }
        Ok(FittedGrid { t_r, points })
    }

    pub fn point(&self, t_i: f64) -> Option<&GridPoint> {
        self.points
            .binary_search_by(|p| p.t_i.total_cmp(&t_i))
            .ok()
            .map(|i| &self.points[i])
    }

    pub fn indicator_ages(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t_i).collect()
    }

    pub fn fits(&self) -> impl Iterator<Item = &Fitted> {
        self.points.iter().flat_map(|p| p.fits.iter())
    }

    pub fn forecaster(&self, kind: ModelKind) -> GridForecaster<'_> {
        GridForecaster { grid: self, kind }
    }
}

/// Fits every model at every grid age on `training`. A model that cannot be
/// fitted at some age is left out of that grid point.
pub fn fit_grid(training: &Dataset, cfg: &SweepConfig) -> Result<FittedGrid> {
    training.require_coverage(cfg.t_r)?;
    let grid = cfg.grid();
    let points = grid
        .par_iter()
        .map(|&t_i| -> Result<GridPoint> {
            let set = training.pairs_at(t_i, cfg.t_r)?;
            let mut pairs = set.pairs;
            let mut cluster_removed = 0;
            if cfg.cluster.applies_at(t_i) && pairs.len() >= 2 {
                let split = cluster_filter(&pairs, cfg.cluster.max_iter, cfg.cluster.seed)?;
                cluster_removed = split.lower.len();
                pairs = split.upper;
            }
            let fits = cfg
                .models
                .iter()
                .filter_map(|&kind| Fitted::fit(kind, &pairs, t_i, cfg.t_r).ok())
                .collect();
            Ok(GridPoint {
                t_i,
                fits,
                n_train: pairs.len(),
                zero_excluded: set.zero_excluded,
                cluster_removed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FittedGrid {
        t_r: cfg.t_r,
        points,
    })
}

/// A model's output for one submission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forecast {
    /// `n_hat = c * n_i`.
    Scaled(f64),
    Value(f64),
}

/// Anything that can forecast reference-age popularity during a sweep.
pub trait Forecaster: Sync {
    fn label(&self) -> String;

    /// `None` when the model has no prediction at this indicator age.
    fn forecast(&self, series: &PopularitySeries, t_i: f64, n_i: f64) -> Option<Forecast>;
}

/// Forecasts with one model kind from a fitted grid.
#[derive(Debug, Clone, Copy)]
pub struct GridForecaster<'a> {
    grid: &'a FittedGrid,
    kind: ModelKind,
}

impl Forecaster for GridForecaster<'_> {
    fn label(&self) -> String {
        self.kind.to_string()
    }

    fn forecast(&self, _series: &PopularitySeries, t_i: f64, _n_i: f64) -> Option<Forecast> {
        let fit = self.grid.point(t_i)?.get(self.kind)?;
        let c = fit.scale();
        c.is_finite().then_some(Forecast::Scaled(c))
    }
}

fn errors(forecast: Forecast, n_i: f64, n_r: f64) -> (f64, f64) {
    match forecast {
        Forecast::Scaled(c) => {
            let rel = c * (n_i / n_r) - 1.0;
            let abs = c * n_i - n_r;
            (abs * abs, rel * rel)
        }
        Forecast::Value(v) => {
            let abs = v - n_r;
            let rel = abs / n_r;
            (abs * abs, rel * rel)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Qse,
    Qre,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Qse => "qse",
            Measure::Qre => "qre",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub t_i: f64,
    pub mean: f64,
    /// Population standard deviation over the test ensemble.
    pub stddev: f64,
    pub count: usize,
    /// Test submissions skipped for zero popularity at `t_i`.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub model: String,
    pub measure: Measure,
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    pub fn at(&self, t_i: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.t_i == t_i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCurves {
    pub qse: ErrorCurve,
    pub qre: ErrorCurve,
}

fn mean_and_pop_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct Observation {
    n_i: f64,
    n_r: f64,
    series: usize,
}

/// Test observations at one indicator age, plus the zero-popularity count.
fn observations(test: &Dataset, t_i: f64, t_r: f64) -> Result<(Vec<Observation>, usize)> {
    let mut obs = Vec::with_capacity(test.len());
    let mut excluded = 0;
    for (k, s) in test.series().iter().enumerate() {
        let cover = |age| Error::CoverageGap {
            id: s.id().to_string(),
            age,
        };
        let n_r = s.popularity_at(t_r).map_err(|_| cover(t_r))?;
        let n_i = s.popularity_at(t_i).map_err(|_| cover(t_i))?;
        if n_i <= 0.0 || n_r <= 0.0 {
            excluded += 1;
            continue;
        }
        obs.push(Observation { n_i, n_r, series: k });
    }
    Ok((obs, excluded))
}

/// Ensemble QSE and QRE of every forecaster at every indicator age.
pub fn sweep(
    test: &Dataset,
    t_r: f64,
    grid: &[f64],
    forecasters: &[&dyn Forecaster],
) -> Result<Vec<ModelCurves>> {
    test.require_coverage(t_r)?;
    if grid.iter().any(|&t| !(t > 0.0 && t < t_r)) {
        return Err(Error::ConfigInvalid("indicator ages must lie in (0, t_r)".into()));
    }
    let per_age: Vec<Vec<Option<(CurvePoint, CurvePoint)>>> = grid
        .par_iter()
        .map(|&t_i| -> Result<_> {
            let (obs, excluded) = observations(test, t_i, t_r)?;
            Ok(forecasters
                .iter()
                .map(|f| {
                    let mut qse_v = Vec::with_capacity(obs.len());
                    let mut qre_v = Vec::with_capacity(obs.len());
                    for o in &obs {
                        let fc = f.forecast(&test.series()[o.series], t_i, o.n_i)?;
                        let (a, r) = errors(fc, o.n_i, o.n_r);
                        qse_v.push(a);
                        qre_v.push(r);
                    }
                    if qse_v.is_empty() {
                        return None;
                    }
                    let (m1, s1) = mean_and_pop_sd(&qse_v);
                    let (m2, s2) = mean_and_pop_sd(&qre_v);
                    let point = |mean, stddev| CurvePoint {
                        t_i,
                        mean,
                        stddev,
                        count: obs.len(),
                        excluded,
                    };
                    Some((point(m1, s1), point(m2, s2)))
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    Ok(forecasters
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let label = f.label();
            let (qse_pts, qre_pts): (Vec<_>, Vec<_>) =
                per_age.iter().filter_map(|row| row[j].clone()).unzip();
            ModelCurves {
                qse: ErrorCurve {
                    model: label.clone(),
                    measure: Measure::Qse,
                    points: qse_pts,
                },
                qre: ErrorCurve {
                    model: label,
                    measure: Measure::Qre,
                    points: qre_pts,
                },
            }
        })
        .collect())
}

/// Running count, mean and sum of squared deviations; merges in a fixed
/// order so results do not depend on scheduling.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationBin {
    /// Bin covers fractions in `(lower, upper]`.
    pub lower: f64,
    pub upper: f64,
    pub mean: f64,
    pub stddev: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationCurve {
    pub model: String,
    /// Populated bins only, in increasing fraction order.
    pub bins: Vec<SaturationBin>,
}

/// QRE grouped by how far each submission had progressed towards its
/// reference popularity, `n(t_i) / n(t_r)`, over every grid age.
pub fn error_vs_saturation(
    test: &Dataset,
    t_r: f64,
    grid: &[f64],
    forecasters: &[&dyn Forecaster],
    bins: usize,
) -> Result<Vec<SaturationCurve>> {
    if bins == 0 {
        return Err(Error::ConfigInvalid("need at least one bin".into()));
    }
    test.require_coverage(t_r)?;
    let per_age: Vec<Vec<Vec<Moments>>> = grid
        .par_iter()
        .map(|&t_i| -> Result<_> {
            let (obs, _) = observations(test, t_i, t_r)?;
            Ok(forecasters
                .iter()
                .map(|f| {
                    let mut acc = vec![Moments::default(); bins];
                    for o in &obs {
                        let Some(fc) = f.forecast(&test.series()[o.series], t_i, o.n_i) else {
                            continue;
                        };
                        let (_, rel) = errors(fc, o.n_i, o.n_r);
                        acc[saturation_bin(o.n_i / o.n_r, bins)].push(rel);
                    }
                    acc
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    Ok(forecasters
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let mut total = vec![Moments::default(); bins];
            for row in &per_age {
                for (t, m) in total.iter_mut().zip(&row[j]) {
                    t.merge(m);
                }
            }
            let width = 1.0 / bins as f64;
            SaturationCurve {
                model: f.label(),
                bins: total
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| m.n > 0)
                    .map(|(k, m)| SaturationBin {
                        lower: k as f64 * width,
                        upper: if k + 1 == bins { 1.0 } else { (k + 1) as f64 * width },
                        mean: m.mean,
                        stddev: (m.m2 / m.n as f64).max(0.0).sqrt(),
                        count: m.n,
                    })
                    .collect(),
            }
        })
        .collect())
}

fn saturation_bin(fraction: f64, bins: usize) -> usize {
    let k = (fraction * bins as f64).ceil() as isize - 1;
    k.clamp(0, bins as isize - 1) as usize
}

/// Mean normalized growth curve; the GP profile over the full grid.
pub fn growth_profile_curve(ds: &Dataset, t_r: f64, grid_step: f64) -> Result<GpParams> {
    fit_gp(ds, t_r, grid_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Sample, Submission, TimeUnit};

    fn ds(n: usize) -> Dataset {
        let series = (0..n)
            .map(|i| {
                PopularitySeries::new(
                    Submission::new(format!("s{i}"), Timestamp::from_hours(i as f64)),
                    vec![Sample::new(1.0, 1 + i as u64), Sample::new(2.0, 10 + 2 * i as u64)],
                )
                .unwrap()
            })
            .collect();
        Dataset::new(series, TimeUnit::WallHours).unwrap()
    }

    fn pred(n_hat: f64) -> Prediction {
        Prediction {
            id: "x".into(),
            t_i: 1.0,
            t_r: 2.0,
            n_hat,
        }
    }

    #[test]
    fn random_half_partition() {
        let d = ds(10);
        let (a, b) = split(&d, SplitSpec::RandomHalf(1)).unwrap();
        assert_eq!((a.len(), b.len()), (5, 5));
        let mut ids: Vec<_> = a.series().iter().chain(b.series()).map(|s| s.id()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 10);
        assert_eq!(split(&d, SplitSpec::RandomHalf(1)).unwrap(), (a, b));
    }

    #[test]
    fn odd_split_sizes() {
        let (a, b) = split(&ds(7), SplitSpec::RandomHalf(3)).unwrap();
        assert_eq!((a.len(), b.len()), (4, 3));
    }

    #[test]
    fn time_split() {
        let (a, b) = split(&ds(10), SplitSpec::ByTime(Timestamp::from_hours(4.0))).unwrap();
        assert_eq!((a.len(), b.len()), (4, 6));
        assert!(a.series().iter().all(|s| s.origin().hours() < 4.0));
        assert_eq!(
            split(&ds(3), SplitSpec::ByTime(Timestamp::from_hours(100.0))),
            Err(Error::EmptySplit("test"))
        );
    }

    #[test]
    fn error_measures() {
        assert_eq!(qse(&pred(100.0), 100.0), 0.0);
        assert_eq!(qse(&pred(60.0), 100.0), 1600.0);
        assert_eq!(qse(&pred(120.0), 200.0), 4.0 * 1600.0);
        assert_eq!(qre(&pred(100.0), 100.0).unwrap(), 0.0);
        assert!((qre(&pred(60.0), 100.0).unwrap() - 0.16).abs() < 1e-15);
        assert_eq!(qre(&pred(180.0), 300.0).unwrap(), qre(&pred(60.0), 100.0).unwrap());
        assert_eq!(qre(&pred(1.0), 0.0), Err(Error::ZeroPopularity));
    }

    #[test]
    fn grid_excludes_reference() {
        assert_eq!(indicator_grid(4.0, 1.0), vec![1.0, 2.0, 3.0]);
        assert_eq!(indicator_grid(720.0, 1.0).len(), 719);
    }

    #[test]
    fn bins_are_right_closed() {
        assert_eq!(saturation_bin(1.0, 50), 49);
        assert_eq!(saturation_bin(0.5, 2), 0);
        assert_eq!(saturation_bin(0.51, 2), 1);
        assert_eq!(saturation_bin(1e-9, 50), 0);
    }

    #[test]
    fn moments_merge_matches_direct() {
        let xs = [1.0, 4.0, 2.5, 8.0, -3.0, 0.5];
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..2].iter().for_each(|&x| a.push(x));
        xs[2..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let (m, sd) = mean_and_pop_sd(&xs);
        assert!((a.mean - m).abs() < 1e-12);
        assert!(((a.m2 / 6.0).sqrt() - sd).abs() < 1e-12);
    }

    #[test]
    fn grid_from_flat_fits() {
        use crate::predictors::{CsParams, GpPoint};
        let fits = vec![
            Fitted::Gp(GpPoint {
                t_i: 2.0,
                t_r: 5.0,
                p: 0.5,
            }),
            Fitted::Cs(CsParams {
                t_i: 1.0,
                t_r: 5.0,
                alpha: 3.0,
            }),
            Fitted::Cs(CsParams {
                t_i: 2.0,
                t_r: 5.0,
                alpha: 2.0,
            }),
        ];
        let g = FittedGrid::from_fits(fits).unwrap();
        assert_eq!(g.indicator_ages(), vec![1.0, 2.0]);
        assert_eq!(g.point(2.0).unwrap().fits.len(), 2);
        assert!(g.point(1.5).is_none());
    }
}
