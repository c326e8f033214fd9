//! Submissions and their cumulative popularity over time.
//!
//! Sample positions are stored as ages (hours since the submission's origin)
//! on the dataset clock: wall-clock hours for raw data, activity hours after
//! rebasing. The origin itself is always a wall-clock instant so that time
//! splits and hour-of-day analyses keep working on rebased data.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

pub const SECONDS_PER_HOUR: f64 = 3600.0;

/// Wall-clock instant in seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Timestamp(pub f64);

impl Timestamp {
    pub fn from_hours(h: f64) -> Self {
        Timestamp(h * SECONDS_PER_HOUR)
    }

    pub fn seconds(self) -> f64 {
        self.0
    }

    pub fn hours(self) -> f64 {
        self.0 / SECONDS_PER_HOUR
    }

    pub fn plus_hours(self, h: f64) -> Self {
        Timestamp(self.0 + h * SECONDS_PER_HOUR)
    }

    /// Hours elapsed from `earlier` to `self`.
    pub fn hours_since(self, earlier: Timestamp) -> f64 {
        (self.0 - earlier.0) / SECONDS_PER_HOUR
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Submission {
    pub id: String,
    pub origin: Timestamp,
}

impl Submission {
    pub fn new(id: impl Into<String>, origin: Timestamp) -> Self {
        Submission { id: id.into(), origin }
    }
}

/// One cumulative count observation at `age` hours after the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub age: f64,
    pub count: u64,
}

impl Sample {
    pub fn new(age: f64, count: u64) -> Self {
        Sample { age, count }
    }
}

/// Clock in which a dataset's sample ages are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeUnit {
    WallHours,
    DiggHours,
}

impl TimeUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::WallHours => "wall_hours",
            TimeUnit::DiggHours => "digg_hours",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cumulative popularity samples of one submission.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularitySeries {
    submission: Submission,
    samples: Vec<Sample>,
}

impl PopularitySeries {
    /// Validates ordering and monotonicity. Ages must be finite, non-negative
    /// and strictly increasing; counts must never decrease.
    pub fn new(submission: Submission, samples: Vec<Sample>) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidSeries {
            id: submission.id.clone(),
            reason: reason.to_string(),
        };
        if submission.id.is_empty() {
            return Err(invalid("empty id"));
        }
        if !submission.origin.0.is_finite() {
            return Err(invalid("origin time is not finite"));
        }
        if samples.is_empty() {
            return Err(invalid("no samples"));
        }
        for s in &samples {
            if !s.age.is_finite() || s.age < 0.0 {
                return Err(invalid("sample before origin or not finite"));
            }
        }
        for w in samples.windows(2) {
            if w[1].age <= w[0].age {
                return Err(invalid("sample times not strictly increasing"));
            }
            if w[1].count < w[0].count {
                return Err(Error::NonMonotoneSeries(submission.id.clone()));
            }
        }
        Ok(PopularitySeries {
            submission,
            samples,
        })
    }

    pub fn submission(&self) -> &Submission {
        &self.submission
    }

    pub fn id(&self) -> &str {
        &self.submission.id
    }

    pub fn origin(&self) -> Timestamp {
        self.submission.origin
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Age of the last stored sample.
    pub fn last_age(&self) -> f64 {
        self.samples[self.samples.len() - 1].age
    }

    pub fn covers(&self, age: f64) -> bool {
        age >= 0.0 && age <= self.last_age()
    }

    /// Linearly interpolated popularity at `age`. An implicit `(0, 0)` anchor
    /// precedes the first sample when that sample is later than the origin.
    /// No extrapolation past the last sample.
    pub fn popularity_at(&self, age: f64) -> Result<f64> {
        if !(age >= 0.0 && age <= self.last_age()) {
            return Err(Error::QueryOutOfRange {
                at: age,
                lo: 0.0,
                hi: self.last_age(),
            });
        }
        let idx = self.samples.partition_point(|s| s.age < age);
        let right = self.samples[idx];
        if right.age == age {
            return Ok(right.count as f64);
        }
        let left = if idx == 0 {
            Sample::new(0.0, 0)
        } else {
            self.samples[idx - 1]
        };
        let w = (age - left.age) / (right.age - left.age);
        let (c0, c1) = (left.count as f64, right.count as f64);
        Ok(c0 + (c1 - c0) * w)
    }

    /// `popularity_at` addressed by wall-clock instant; only meaningful for
    /// series on the wall clock.
    pub fn popularity_at_time(&self, t: Timestamp) -> Result<f64> {
        self.popularity_at(t.hours_since(self.origin()))
    }

    pub fn log_popularity_at(&self, age: f64) -> Result<f64> {
        let n = self.popularity_at(age)?;
        if n <= 0.0 {
            return Err(Error::ZeroPopularity);
        }
        Ok(n.ln())
    }

    /// Same submission with every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> PopularitySeries {
        PopularitySeries {
            submission: self.submission.clone(),
            samples: self
                .samples
                .iter()
                .map(|s| Sample::new(s.age, s.count * factor))
                .collect(),
        }
    }
}

/// A set of series sharing one clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    series: Vec<PopularitySeries>,
    unit: TimeUnit,
}

impl Dataset {
    pub fn new(series: Vec<PopularitySeries>, unit: TimeUnit) -> Result<Self> {
        let mut seen = HashSet::with_capacity(series.len());
        for s in &series {
            if !seen.insert(s.id()) {
                return Err(Error::DuplicateId(s.id().to_string()));
            }
        }
        Ok(Dataset { series, unit })
    }

    pub fn series(&self) -> &[PopularitySeries] {
        &self.series
    }

    pub fn into_series(self) -> Vec<PopularitySeries> {
        self.series
    }

    pub fn unit(&self) -> TimeUnit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&PopularitySeries> {
        self.series.iter().find(|s| s.id() == id)
    }

    /// Splits into the series that cover `age` and the ids of those that don't.
    pub fn covering(&self, age: f64) -> (Dataset, Vec<String>) {
        let (keep, drop): (Vec<_>, Vec<_>) =
            self.series.iter().cloned().partition(|s| s.covers(age));
        (
            Dataset {
                series: keep,
                unit: self.unit,
            },
            drop.into_iter().map(|s| s.id().to_string()).collect(),
        )
    }

    /// Errors with `CoverageGap` on the first series not reaching `age`.
    pub fn require_coverage(&self, age: f64) -> Result<()> {
        match self.series.iter().find(|s| !s.covers(age)) {
            Some(s) => Err(Error::CoverageGap {
                id: s.id().to_string(),
                age,
            }),
            None => Ok(()),
        }
    }

    /// Every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Dataset {
        Dataset {
            series: self.series.iter().map(|s| s.scaled(factor)).collect(),
            unit: self.unit,
        }
    }

    /// Keeps the series whose ids satisfy `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&PopularitySeries) -> bool) -> Dataset {
        Dataset {
            series: self.series.iter().filter(|s| keep(s)).cloned().collect(),
            unit: self.unit,
        }
    }

    /// (n_i, n_r) popularity pairs at ages `t_i` and `t_r`, skipping series
    /// with zero popularity at either age.
    pub fn pairs_at(&self, t_i: f64, t_r: f64) -> Result<PairSet> {
        let mut set = PairSet::default();
        for s in &self.series {
            let n_r = s.popularity_at(t_r).map_err(|_| Error::CoverageGap {
                id: s.id().to_string(),
                age: t_r,
            })?;
            let n_i = s.popularity_at(t_i).map_err(|_| Error::CoverageGap {
                id: s.id().to_string(),
                age: t_i,
            })?;
            if n_r <= 0.0 || n_i <= 0.0 {
                set.zero_excluded += 1;
                continue;
            }
            set.pairs.push(PopPair {
                id: s.id().to_string(),
                n_i,
                n_r,
            });
        }
        Ok(set)
    }
}

/// Popularity of one submission at the indicator and reference ages.
#[derive(Debug, Clone, PartialEq)]
pub struct PopPair {
    pub id: String,
    pub n_i: f64,
    pub n_r: f64,
}

impl PopPair {
    /// Both counts must be positive. `n_r >= n_i` holds for cumulative data
    /// but is not enforced here.
    pub fn new(id: impl Into<String>, n_i: f64, n_r: f64) -> Result<Self> {
        if !(n_i > 0.0 && n_r > 0.0) || !n_i.is_finite() || !n_r.is_finite() {
            return Err(Error::ZeroPopularity);
        }
        Ok(PopPair {
            id: id.into(),
            n_i,
            n_r,
        })
    }

    /// `n_i / n_r`, the fraction of the reference popularity reached.
    pub fn ratio(&self) -> f64 {
        self.n_i / self.n_r
    }

    /// `ln(n_r / n_i)`, computed from the ratio so that it is exactly
    /// invariant under common rescaling of both counts.
    pub fn log_growth(&self) -> f64 {
        (self.n_r / self.n_i).ln()
    }
}

/// Pairs extracted from a dataset plus the number of excluded submissions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairSet {
    pub pairs: Vec<PopPair>,
    pub zero_excluded: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(origin_h: f64, samples: &[(f64, u64)]) -> PopularitySeries {
        PopularitySeries::new(
            Submission::new("s", Timestamp::from_hours(origin_h)),
            samples.iter().map(|&(a, c)| Sample::new(a, c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn exact_sample_and_midpoint() {
        let s = series(0.0, &[(24.0, 100), (48.0, 200)]);
        assert_eq!(s.popularity_at(48.0).unwrap(), 200.0);
        assert_eq!(s.popularity_at(36.0).unwrap(), 150.0);
        assert_eq!(s.popularity_at(24.0).unwrap(), 100.0);
    }

    #[test]
    fn implicit_zero_anchor() {
        let s = series(0.0, &[(24.0, 100)]);
        assert_eq!(s.popularity_at(12.0).unwrap(), 50.0);
        assert_eq!(s.popularity_at(0.0).unwrap(), 0.0);
    }

    #[test]
    fn first_sample_at_origin_replaces_anchor() {
        let s = series(5.0, &[(0.0, 7), (1.0, 9)]);
        assert_eq!(s.popularity_at(0.0).unwrap(), 7.0);
        assert_eq!(s.popularity_at(0.5).unwrap(), 8.0);
    }

    #[test]
    fn wall_clock_query() {
        let s = series(10.0, &[(24.0, 100), (48.0, 200)]);
        let t = Timestamp::from_hours(10.0 + 36.0);
        assert_eq!(s.popularity_at_time(t).unwrap(), 150.0);
    }

    #[test]
    fn no_extrapolation() {
        let s = series(0.0, &[(24.0, 100), (48.0, 200)]);
        assert!(matches!(
            s.popularity_at(48.5),
            Err(Error::QueryOutOfRange { .. })
        ));
        assert!(matches!(
            s.popularity_at(-0.1),
            Err(Error::QueryOutOfRange { .. })
        ));
    }

    #[test]
    fn log_popularity() {
        let s = series(0.0, &[(1.0, 1), (2.0, 100)]);
        assert_eq!(s.log_popularity_at(1.0).unwrap(), 0.0);
        assert!((s.log_popularity_at(2.0).unwrap() - 4.605170185988092).abs() < 1e-12);
        assert_eq!(s.log_popularity_at(0.0), Err(Error::ZeroPopularity));
    }

    #[test]
    fn rejects_decreasing_counts() {
        let r = PopularitySeries::new(
            Submission::new("bad", Timestamp(0.0)),
            vec![Sample::new(1.0, 5), Sample::new(2.0, 4)],
        );
        assert_eq!(r, Err(Error::NonMonotoneSeries("bad".into())));
    }

    #[test]
    fn rejects_unordered_times() {
        let r = PopularitySeries::new(
            Submission::new("bad", Timestamp(0.0)),
            vec![Sample::new(2.0, 5), Sample::new(2.0, 6)],
        );
        assert!(matches!(r, Err(Error::InvalidSeries { .. })));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let a = series(0.0, &[(1.0, 1)]);
        assert_eq!(
            Dataset::new(vec![a.clone(), a], TimeUnit::WallHours),
            Err(Error::DuplicateId("s".into()))
        );
    }

    #[test]
    fn pairs_skip_zero_popularity() {
        let a = PopularitySeries::new(
            Submission::new("a", Timestamp(0.0)),
            vec![Sample::new(1.0, 0), Sample::new(2.0, 10)],
        )
        .unwrap();
        let b = PopularitySeries::new(
            Submission::new("b", Timestamp(0.0)),
            vec![Sample::new(1.0, 3), Sample::new(2.0, 10)],
        )
        .unwrap();
        let ds = Dataset::new(vec![a, b], TimeUnit::WallHours).unwrap();
        let set = ds.pairs_at(1.0, 2.0).unwrap();
        assert_eq!(set.zero_excluded, 1);
        assert_eq!(set.pairs.len(), 1);
        assert_eq!(set.pairs[0].id, "b");
    }
}
