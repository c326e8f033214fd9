//! Activity cycles and the activity-time ("digg time") clock.
//!
//! One activity hour elapses when the portal-wide event stream accrues
//! `events_per_unit` events. Submission ages measured on this clock are
//! comparable regardless of the time of day a submission appeared.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::series::{Dataset, PopularitySeries, Sample, TimeUnit, Timestamp, SECONDS_PER_HOUR};

/// Mean hourly rate of diggs on promoted stories over the original
/// July-December 2007 collection period.
pub const DIGG_EVENTS_PER_HOUR: f64 = 5478.0;

/// Streams longer than this get per-minute knots instead of per-event knots.
pub const PER_EVENT_KNOT_LIMIT: usize = 2_000_000;

const SECONDS_PER_WEEK: f64 = 7.0 * 24.0 * SECONDS_PER_HOUR;
const HOURS_PER_WEEK: usize = 168;
// 1970-01-01 was a Thursday; shift so hour-of-week 0 is Monday 00:00.
const EPOCH_WEEK_SHIFT: f64 = 3.0 * 24.0 * SECONDS_PER_HOUR;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: Timestamp,
    /// Index into [`EventStream::ids`].
    pub submission: u32,
}

/// Time-ordered atomic popularity events with interned submission ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    ids: Vec<String>,
    events: Vec<Event>,
    span: (Timestamp, Timestamp),
}

impl EventStream {
    /// Events must be time-ordered and inside `span`; every event must refer
    /// to an existing id.
    pub fn new(ids: Vec<String>, events: Vec<Event>, span: (Timestamp, Timestamp)) -> Result<Self> {
        if span.0 .0 > span.1 .0 || !span.0 .0.is_finite() || !span.1 .0.is_finite() {
            return Err(Error::ConfigInvalid("stream span start after end".into()));
        }
        for w in events.windows(2) {
            if w[1].time.0 < w[0].time.0 {
                return Err(Error::ConfigInvalid("event times not ordered".into()));
            }
        }
        if let (Some(first), Some(last)) = (events.first(), events.last()) {
            if first.time.0 < span.0 .0 || last.time.0 > span.1 .0 {
                return Err(Error::ConfigInvalid("events outside stream span".into()));
            }
        }
        if events.iter().any(|e| e.submission as usize >= ids.len()) {
            return Err(Error::ConfigInvalid("event refers to unknown submission".into()));
        }
        Ok(EventStream { ids, events, span })
    }

    /// Builds a stream from (time, id) pairs in any order; the span defaults
    /// to the first and last event.
    pub fn from_pairs<I, S>(pairs: I, span: Option<(Timestamp, Timestamp)>) -> Result<Self>
    where
        I: IntoIterator<Item = (Timestamp, S)>,
        S: AsRef<str>,
    {
        let mut ids = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut events = Vec::new();
        for (time, id) in pairs {
            let id = id.as_ref();
            let k = match index.get(id) {
                Some(&k) => k,
                None => {
                    let k = ids.len() as u32;
                    ids.push(id.to_string());
                    index.insert(id.to_string(), k);
                    k
                }
            };
            events.push(Event { time, submission: k });
        }
        events.sort_by(|a, b| a.time.0.total_cmp(&b.time.0));
        let span = match span {
            Some(s) => s,
            None => match (events.first(), events.last()) {
                (Some(a), Some(b)) => (a.time, b.time),
                _ => return Err(Error::EmptyStream),
            },
        };
        EventStream::new(ids, events, span)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn span(&self) -> (Timestamp, Timestamp) {
        self.span
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn id_of(&self, e: &Event) -> &str {
        &self.ids[e.submission as usize]
    }

    /// Combines two streams; ids shared by both refer to the same submission.
    pub fn merge(&self, other: &EventStream) -> Result<EventStream> {
        let mut ids = self.ids.clone();
        let mut index: HashMap<&str, u32> = self
            .ids
            .iter()
            .enumerate()
            .map(|(k, id)| (id.as_str(), k as u32))
            .collect();
        let remap: Vec<u32> = other
            .ids
            .iter()
            .map(|id| {
                *index.entry(id.as_str()).or_insert_with(|| {
                    ids.push(id.clone());
                    (ids.len() - 1) as u32
                })
            })
            .collect();
        let mut events = Vec::with_capacity(self.events.len() + other.events.len());
        let (mut a, mut b) = (self.events.iter().peekable(), other.events.iter().peekable());
        loop {
            let take_a = match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => x.time.0 <= y.time.0,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            if take_a {
                events.push(*a.next().expect("peeked"));
            } else {
                let e = b.next().expect("peeked");
                events.push(Event {
                    time: e.time,
                    submission: remap[e.submission as usize],
                });
            }
        }
        let span = (
            Timestamp(self.span.0 .0.min(other.span.0 .0)),
            Timestamp(self.span.1 .0.max(other.span.1 .0)),
        );
        EventStream::new(ids, events, span)
    }

    /// Number of events with `from < time <= to`.
    pub fn count_between(&self, from: Timestamp, to: Timestamp) -> usize {
        let lo = self.events.partition_point(|e| e.time.0 <= from.0);
        let hi = self.events.partition_point(|e| e.time.0 <= to.0);
        hi.saturating_sub(lo)
    }

    /// Mean number of events per hour inside `[from, to)`.
    pub fn mean_hourly_rate(&self, from: Timestamp, to: Timestamp) -> Result<f64> {
        let hours = to.hours_since(from);
        if !(hours > 0.0) {
            return Err(Error::ConfigInvalid("rate window must have positive length".into()));
        }
        let lo = self.events.partition_point(|e| e.time.0 < from.0);
        let hi = self.events.partition_point(|e| e.time.0 < to.0);
        let n = hi - lo;
        if n == 0 {
            return Err(Error::EmptyStream);
        }
        Ok(n as f64 / hours)
    }
}

/// Event rates per time bucket, optionally folded onto the hours of a week.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityProfile {
    pub bucket_width_hours: f64,
    /// (bucket start, events per hour).
    pub rates: Vec<(Timestamp, f64)>,
    /// Mean rate per hour-of-week (Monday 00:00 first); hours never observed
    /// read as zero.
    pub week_folded: Option<Vec<f64>>,
}

/// Buckets the stream into `bucket_width_hours` wide bins starting at the
/// span start. `tz_offset_hours` shifts timestamps into the display zone
/// before hour-of-week folding.
pub fn build_activity_profile(
    stream: &EventStream,
    bucket_width_hours: f64,
    fold_week: bool,
    tz_offset_hours: f64,
) -> Result<ActivityProfile> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    if !(bucket_width_hours > 0.0) {
        return Err(Error::ConfigInvalid("bucket width must be positive".into()));
    }
    let (start, end) = stream.span();
    let width_s = bucket_width_hours * SECONDS_PER_HOUR;
    let n_buckets = (((end.0 - start.0) / width_s).ceil() as usize).max(1);
    let mut counts = vec![0u64; n_buckets];
    for e in stream.events() {
        let k = (((e.time.0 - start.0) / width_s).floor() as usize).min(n_buckets - 1);
        counts[k] += 1;
    }
    let rates: Vec<(Timestamp, f64)> = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            (
                Timestamp(start.0 + k as f64 * width_s),
                c as f64 / bucket_width_hours,
            )
        })
        .collect();

    let week_folded = fold_week.then(|| {
        let mut sum = vec![0.0; HOURS_PER_WEEK];
        let mut n = vec![0u32; HOURS_PER_WEEK];
        for &(t, r) in &rates {
            let h = hour_of_week(t, tz_offset_hours);
            sum[h] += r;
            n[h] += 1;
        }
        sum.iter()
            .zip(&n)
            .map(|(&s, &k)| if k == 0 { 0.0 } else { s / k as f64 })
            .collect()
    });

    Ok(ActivityProfile {
        bucket_width_hours,
        rates,
        week_folded,
    })
}

fn hour_of_week(t: Timestamp, tz_offset_hours: f64) -> usize {
    let local = t.0 + tz_offset_hours * SECONDS_PER_HOUR + EPOCH_WEEK_SHIFT;
    let within = local.rem_euclid(SECONDS_PER_WEEK);
    ((within / SECONDS_PER_HOUR).floor() as usize).min(HOURS_PER_WEEK - 1)
}

/// Hour of day (0-23) of `t` in a zone `tz_offset_hours` from UTC.
pub fn hour_of_day(t: Timestamp, tz_offset_hours: f64) -> usize {
    let local = t.0 + tz_offset_hours * SECONDS_PER_HOUR;
    ((local.rem_euclid(24.0 * SECONDS_PER_HOUR) / SECONDS_PER_HOUR).floor() as usize).min(23)
}

/// How densely cumulative counts are sampled when building a timebase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KnotPolicy {
    /// Per event up to [`PER_EVENT_KNOT_LIMIT`] events, per minute beyond.
    #[default]
    Auto,
    PerEvent,
    PerMinute,
}

/// Monotone map from wall-clock time to activity hours.
#[derive(Debug, Clone, PartialEq)]
pub struct Timebase {
    /// (wall time, cumulative events). Wall times strictly increase; counts
    /// never decrease.
    knots: Vec<(Timestamp, u64)>,
    events_per_unit: f64,
}

impl Timebase {
    pub fn from_knots(knots: Vec<(Timestamp, u64)>, events_per_unit: f64) -> Result<Self> {
        if !(events_per_unit > 0.0) || !events_per_unit.is_finite() {
            return Err(Error::ConfigInvalid("events per unit must be positive".into()));
        }
        if knots.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: knots.len(),
            });
        }
        for w in knots.windows(2) {
            if w[1].0 .0 <= w[0].0 .0 || w[1].1 < w[0].1 {
                return Err(Error::ConfigInvalid("timebase knots not monotone".into()));
            }
        }
        Ok(Timebase {
            knots,
            events_per_unit,
        })
    }

    pub fn knots(&self) -> &[(Timestamp, u64)] {
        &self.knots
    }

    pub fn events_per_unit(&self) -> f64 {
        self.events_per_unit
    }

    pub fn range(&self) -> (Timestamp, Timestamp) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    /// Cumulative event count at `t`, interpolated between knots.
    pub fn cumulative_at(&self, t: Timestamp) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(t.0 >= lo.0 && t.0 <= hi.0) {
            return Err(Error::QueryOutOfRange {
                at: t.0,
                lo: lo.0,
                hi: hi.0,
            });
        }
        let idx = self.knots.partition_point(|k| k.0 .0 < t.0);
        let (t1, c1) = self.knots[idx];
        if t1.0 == t.0 {
            return Ok(c1 as f64);
        }
        let (t0, c0) = self.knots[idx - 1];
        let w = (t.0 - t0.0) / (t1.0 - t0.0);
        Ok(c0 as f64 + (c1 as f64 - c0 as f64) * w)
    }

    /// Activity hours elapsed between two wall-clock instants.
    pub fn to_digg_time(&self, from: Timestamp, to: Timestamp) -> Result<f64> {
        if to.0 < from.0 {
            return Err(Error::QueryOutOfRange {
                at: to.0,
                lo: from.0,
                hi: self.range().1 .0,
            });
        }
        let a = self.cumulative_at(from)?;
        let b = self.cumulative_at(to)?;
        Ok(((b - a) / self.events_per_unit).max(0.0))
    }
}

/// Builds the cumulative-count map of `stream`. Without `unit_events`, one
/// unit is the stream's mean hourly rate, so the whole span maps to exactly
/// its length in hours.
pub fn build_timebase(
    stream: &EventStream,
    unit_events: Option<f64>,
    policy: KnotPolicy,
) -> Result<Timebase> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let (start, end) = stream.span();
    let events_per_unit = match unit_events {
        Some(u) => u,
        None => {
            let hours = end.hours_since(start);
            if !(hours > 0.0) {
                return Err(Error::ConfigInvalid(
                    "stream span has zero length; pass an explicit unit".into(),
                ));
            }
            stream.len() as f64 / hours
        }
    };
    let per_minute = match policy {
        KnotPolicy::PerEvent => false,
        KnotPolicy::PerMinute => true,
        KnotPolicy::Auto => stream.len() > PER_EVENT_KNOT_LIMIT,
    };
    let mut knots = if per_minute {
        minute_knots(stream)
    } else {
        event_knots(stream)
    };
    if knots.len() == 1 {
        // all events at a single instant that is also the whole span
        knots.push((Timestamp(start.0 + 1e-9), stream.len() as u64));
    }
    Timebase::from_knots(knots, events_per_unit)
}

fn event_knots(stream: &EventStream) -> Vec<(Timestamp, u64)> {
    let (start, end) = stream.span();
    let events = stream.events();
    // events at the span start are spread over the first gap, so the whole
    // span always accounts for every event
    let mut knots = Vec::with_capacity(events.len() + 2);
    knots.push((start, 0));
    let mut count = 0u64;
    for (i, e) in events.iter().enumerate() {
        count += 1;
        let last_at_time = events.get(i + 1).is_none_or(|n| n.time.0 != e.time.0);
        if last_at_time && e.time.0 > start.0 {
            knots.push((e.time, count));
        }
    }
    if end.0 > knots[knots.len() - 1].0 .0 {
        knots.push((end, count));
    }
    knots
}

fn minute_knots(stream: &EventStream) -> Vec<(Timestamp, u64)> {
    let (start, end) = stream.span();
    let events = stream.events();
    let mut knots = vec![(start, 0)];
    let mut t = (start.0 / 60.0).floor() * 60.0 + 60.0;
    let mut idx = 0usize;
    while t < end.0 {
        while idx < events.len() && events[idx].time.0 <= t {
            idx += 1;
        }
        knots.push((Timestamp(t), idx as u64));
        t += 60.0;
    }
    if end.0 > knots[knots.len() - 1].0 .0 {
        knots.push((end, events.len() as u64));
    }
    knots
}

/// Re-expresses every sample age on the activity clock. Equal activity ages
/// can only arise after the last event; such samples collapse onto the later
/// (larger) count.
pub fn rebase_dataset(ds: &Dataset, tb: &Timebase) -> Result<Dataset> {
    if ds.unit() != TimeUnit::WallHours {
        return Err(Error::WrongTimeUnit {
            expected: TimeUnit::WallHours.as_str(),
            found: ds.unit().as_str(),
        });
    }
    let mut out = Vec::with_capacity(ds.len());
    for s in ds.series() {
        let origin = s.origin();
        let mut samples: Vec<Sample> = Vec::with_capacity(s.samples().len());
        for smp in s.samples() {
            let at = origin.plus_hours(smp.age);
            let age = tb.to_digg_time(origin, at)?;
            match samples.last_mut() {
                Some(prev) if age <= prev.age => prev.count = smp.count,
                _ => samples.push(Sample::new(age, smp.count)),
            }
        }
        out.push(PopularitySeries::new(s.submission().clone(), samples)?);
    }
    Dataset::new(out, TimeUnit::DiggHours)
}

/// One cell of the popularity-by-promotion-hour table.
#[derive(Debug, Clone, PartialEq)]
pub struct PromotionHourCell {
    pub hour: usize,
    pub offset_hours: f64,
    pub mean: f64,
    pub count: usize,
}

/// Mean popularity `offset` wall hours after the origin, grouped by the
/// origin's hour of day in the display zone. Cells with no covering
/// submission are omitted.
pub fn popularity_by_promotion_hour(
    ds: &Dataset,
    offsets_hours: &[f64],
    tz_offset_hours: f64,
) -> Result<Vec<PromotionHourCell>> {
    if ds.unit() != TimeUnit::WallHours {
        return Err(Error::WrongTimeUnit {
            expected: TimeUnit::WallHours.as_str(),
            found: ds.unit().as_str(),
        });
    }
    if offsets_hours.iter().any(|&o| !(o > 0.0)) {
        return Err(Error::ConfigInvalid("offsets must be positive".into()));
    }
    let mut sums = vec![vec![(0.0f64, 0usize); offsets_hours.len()]; 24];
    for s in ds.series() {
        let h = hour_of_day(s.origin(), tz_offset_hours);
        for (j, &off) in offsets_hours.iter().enumerate() {
            if let Ok(n) = s.popularity_at(off) {
                sums[h][j].0 += n;
                sums[h][j].1 += 1;
            }
        }
    }
    let mut cells = Vec::new();
    for (hour, row) in sums.iter().enumerate() {
        for (j, &(sum, count)) in row.iter().enumerate() {
            if count > 0 {
                cells.push(PromotionHourCell {
                    hour,
                    offset_hours: offsets_hours[j],
                    mean: sum / count as f64,
                    count,
                });
            }
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Submission;

    fn uniform_stream(n: usize, hours: f64) -> EventStream {
        let dt = hours * SECONDS_PER_HOUR / n as f64;
        let pairs = (0..n).map(|i| (Timestamp((i as f64 + 0.5) * dt), "x"));
        EventStream::from_pairs(pairs, Some((Timestamp(0.0), Timestamp::from_hours(hours)))).unwrap()
    }

    #[test]
    fn uniform_profile_rates() {
        let s = uniform_stream(240, 24.0);
        let p = build_activity_profile(&s, 1.0, false, 0.0).unwrap();
        assert_eq!(p.rates.len(), 24);
        assert!(p.rates.iter().all(|&(_, r)| r == 10.0));
    }

    #[test]
    fn half_hour_bucket_rate() {
        let s = EventStream::from_pairs(
            [(Timestamp(60.0), "a"), (Timestamp(120.0), "b")],
            Some((Timestamp(0.0), Timestamp(1800.0))),
        )
        .unwrap();
        let p = build_activity_profile(&s, 0.5, false, 0.0).unwrap();
        assert_eq!(p.rates, vec![(Timestamp(0.0), 4.0)]);
    }

    #[test]
    fn empty_stream_errors() {
        let s = EventStream::new(vec![], vec![], (Timestamp(0.0), Timestamp(10.0))).unwrap();
        assert_eq!(build_activity_profile(&s, 1.0, false, 0.0), Err(Error::EmptyStream));
        assert_eq!(build_timebase(&s, None, KnotPolicy::Auto), Err(Error::EmptyStream));
    }

    #[test]
    fn merge_interleaves_and_shares_ids() {
        let a = EventStream::from_pairs([(Timestamp(1.0), "x"), (Timestamp(3.0), "y")], None).unwrap();
        let b = EventStream::from_pairs([(Timestamp(2.0), "y"), (Timestamp(4.0), "z")], None).unwrap();
        let m = a.merge(&b).unwrap();
        let got: Vec<(f64, &str)> = m.events().iter().map(|e| (e.time.0, m.id_of(e))).collect();
        assert_eq!(got, vec![(1.0, "x"), (2.0, "y"), (3.0, "y"), (4.0, "z")]);
        assert_eq!(m.ids().len(), 3);
        assert_eq!(m.span(), (Timestamp(1.0), Timestamp(4.0)));
    }

    #[test]
    fn week_fold_has_168_entries() {
        let s = uniform_stream(24 * 14 * 3, 24.0 * 14.0);
        let p = build_activity_profile(&s, 1.0, true, 0.0).unwrap();
        let w = p.week_folded.unwrap();
        assert_eq!(w.len(), 168);
        assert!(w.iter().all(|&r| r == 3.0));
    }

    #[test]
    fn hour_of_week_starts_monday() {
        // 1970-01-05 00:00 UTC was a Monday
        assert_eq!(hour_of_week(Timestamp::from_hours(4.0 * 24.0), 0.0), 0);
        assert_eq!(hour_of_week(Timestamp(0.0), 0.0), 72);
        assert_eq!(hour_of_day(Timestamp::from_hours(5.0), -8.0), 21);
    }

    #[test]
    fn one_unit_of_events_is_one_hour() {
        let s = uniform_stream(5478, 1.0);
        let tb = build_timebase(&s, Some(DIGG_EVENTS_PER_HOUR), KnotPolicy::PerEvent).unwrap();
        let (a, b) = s.span();
        assert_eq!(tb.to_digg_time(a, b).unwrap(), 1.0);
        assert_eq!(tb.to_digg_time(a, a).unwrap(), 0.0);
    }

    #[test]
    fn two_and_a_half_units() {
        let s = uniform_stream(13_695, 3.0);
        let tb = build_timebase(&s, Some(DIGG_EVENTS_PER_HOUR), KnotPolicy::PerEvent).unwrap();
        let (a, b) = s.span();
        assert_eq!(tb.to_digg_time(a, b).unwrap(), 2.5);
    }

    #[test]
    fn default_unit_maps_span_to_its_hours() {
        let s = uniform_stream(1000, 8.0);
        let tb = build_timebase(&s, None, KnotPolicy::Auto).unwrap();
        let (a, b) = s.span();
        assert!((tb.to_digg_time(a, b).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn query_out_of_range() {
        let s = uniform_stream(10, 1.0);
        let tb = build_timebase(&s, None, KnotPolicy::Auto).unwrap();
        assert!(matches!(
            tb.to_digg_time(Timestamp(0.0), Timestamp(7200.0)),
            Err(Error::QueryOutOfRange { .. })
        ));
        assert!(matches!(
            tb.to_digg_time(Timestamp(100.0), Timestamp(50.0)),
            Err(Error::QueryOutOfRange { .. })
        ));
    }

    #[test]
    fn per_minute_knots_agree_on_minute_boundaries() {
        let s = uniform_stream(3000, 2.0);
        let fine = build_timebase(&s, None, KnotPolicy::PerEvent).unwrap();
        let coarse = build_timebase(&s, None, KnotPolicy::PerMinute).unwrap();
        for m in [0.0, 60.0, 600.0, 3600.0, 7200.0] {
            let a = coarse.to_digg_time(Timestamp(0.0), Timestamp(m)).unwrap();
            let b = fine.to_digg_time(Timestamp(0.0), Timestamp(m)).unwrap();
            assert!((a - b).abs() <= 1.0 / fine.events_per_unit(), "{m}: {a} vs {b}");
        }
    }

    #[test]
    fn constant_rate_rebase_is_identity() {
        let s = uniform_stream(36_000, 10.0);
        let tb = build_timebase(&s, Some(3600.0), KnotPolicy::PerEvent).unwrap();
        let series = PopularitySeries::new(
            Submission::new("a", Timestamp::from_hours(1.0)),
            vec![Sample::new(0.0, 3), Sample::new(2.0, 5), Sample::new(4.5, 9)],
        )
        .unwrap();
        let ds = Dataset::new(vec![series], TimeUnit::WallHours).unwrap();
        let r = rebase_dataset(&ds, &tb).unwrap();
        assert_eq!(r.unit(), TimeUnit::DiggHours);
        let got = r.series()[0].samples();
        for (g, w) in got.iter().zip(ds.series()[0].samples()) {
            assert!((g.age - w.age).abs() < 1.0 / 3600.0);
            assert_eq!(g.count, w.count);
        }
        assert!(rebase_dataset(&r, &tb).is_err());
    }

    #[test]
    fn promotion_hour_single_submission() {
        let s = PopularitySeries::new(
            Submission::new("a", Timestamp::from_hours(13.25)),
            vec![Sample::new(2.0, 40), Sample::new(4.0, 60)],
        )
        .unwrap();
        let ds = Dataset::new(vec![s], TimeUnit::WallHours).unwrap();
        let t = popularity_by_promotion_hour(&ds, &[2.0, 4.0, 8.0], 0.0).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].hour, t[0].mean, t[0].count), (13, 40.0, 1));
        assert_eq!((t[1].hour, t[1].mean), (13, 60.0));
    }
}
