//! File formats: event streams, popularity series, fitted parameters and
//! reports. Every tabular format is CSV with a header row. Floats are written
//! in shortest round-trip form, so reading a file back yields bit-identical
//! values.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evaluation::{ErrorCurve, FittedGrid, SaturationCurve};
use crate::predictors::{CsParams, Fitted, GpParams, GpPoint, LnParams, ModelKind};
use crate::series::{Dataset, PopularitySeries, Sample, Submission, TimeUnit, Timestamp};
use crate::synthgen::GroundTruth;
use crate::timebase::{EventStream, Timebase};

/// A row-level problem found while reading a file.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestIssue {
    pub line: u64,
    pub message: String,
}

/// Parsed content plus what had to be skipped to get it.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested<T> {
    pub value: T,
    /// Rows that failed to parse.
    pub issues: Vec<IngestIssue>,
    /// Submissions dropped as a whole, with the reason.
    pub rejected: Vec<(String, Error)>,
}

impl<T> Ingested<T> {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty() && self.rejected.is_empty()
    }
}

/// Parses epoch seconds (integer or decimal) or an ISO-8601 / RFC 3339
/// timestamp; zone-less timestamps are taken as UTC.
pub fn parse_timestamp(s: &str) -> Result<Timestamp, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return if v.is_finite() {
            Ok(Timestamp(v))
        } else {
            Err(format!("timestamp `{s}` is not finite"))
        };
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(Timestamp(instant_seconds(dt.timestamp(), dt.timestamp_subsec_nanos())));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            let utc = dt.and_utc();
            return Ok(Timestamp(instant_seconds(
                utc.timestamp(),
                utc.timestamp_subsec_nanos(),
            )));
        }
    }
    Err(format!("cannot parse timestamp `{s}`"))
}

fn instant_seconds(secs: i64, nanos: u32) -> f64 {
    secs as f64 + nanos as f64 * 1e-9
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(input)
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn require_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    column(headers, name).ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("missing column `{name}`"),
    })
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

// ---------------------------------------------------------------- events

/// Reads `submission_id,event_time` rows.
pub fn read_events_csv<R: Read>(input: R) -> Result<Ingested<EventStream>> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let id_col = require_column(&headers, "submission_id")?;
    let t_col = require_column(&headers, "event_time")?;
    let mut pairs = Vec::new();
    let mut issues = Vec::new();
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                issues.push(issue_from(csv_err(e)));
                continue;
            }
        };
        let line = line_of(&rec);
        let id = rec.get(id_col).unwrap_or("");
        if id.is_empty() {
            issues.push(IngestIssue {
                line,
                message: "empty submission id".into(),
            });
            continue;
        }
        match parse_timestamp(rec.get(t_col).unwrap_or("")) {
            Ok(t) => pairs.push((t, id.to_string())),
            Err(message) => issues.push(IngestIssue { line, message }),
        }
    }
    finish_events(pairs, issues)
}

#[derive(Deserialize)]
struct JsonEvent {
    submission_id: String,
    event_time: serde_json::Value,
}

/// Reads one `{"submission_id": ..., "event_time": ...}` object per line.
pub fn read_events_jsonl<R: Read>(mut input: R) -> Result<Ingested<EventStream>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut pairs = Vec::new();
    let mut issues = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let ev: JsonEvent = match serde_json::from_str(raw) {
            Ok(ev) => ev,
            Err(e) => {
                issues.push(IngestIssue {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let t = match &ev.event_time {
            serde_json::Value::Number(n) => n
                .as_f64()
                .map(Timestamp)
                .ok_or_else(|| "bad numeric timestamp".to_string()),
            serde_json::Value::String(s) => parse_timestamp(s),
            _ => Err("event_time must be a number or string".to_string()),
        };
        match t {
            Ok(_) if ev.submission_id.is_empty() => issues.push(IngestIssue {
                line,
                message: "empty submission id".into(),
            }),
            Ok(t) => pairs.push((t, ev.submission_id)),
            Err(message) => issues.push(IngestIssue { line, message }),
        }
    }
    finish_events(pairs, issues)
}

fn issue_from(e: Error) -> IngestIssue {
    match e {
        Error::Parse { line, message } => IngestIssue { line, message },
        other => IngestIssue {
            line: 0,
            message: other.to_string(),
        },
    }
}

fn finish_events(
    pairs: Vec<(Timestamp, String)>,
    issues: Vec<IngestIssue>,
) -> Result<Ingested<EventStream>> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(Ingested {
        value: EventStream::from_pairs(pairs, None)?,
        issues,
        rejected: Vec::new(),
    })
}

pub fn events_to_csv(stream: &EventStream) -> String {
    let mut out = String::from("submission_id,event_time\n");
    for e in stream.events() {
        let _ = writeln!(out, "{},{}", csv_field(stream.id_of(e)), fmt_f64(e.time.0));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

// ---------------------------------------------------------------- series

const WALL_AGE: &str = "age_wall_hours";
const DIGG_AGE: &str = "age_digg_hours";

/// Reads `submission_id,origin_time,<position>,cumulative_count` rows where
/// the position column is one of `age_wall_hours`, `age_digg_hours` or an
/// absolute `sample_time`. Rows may come in any order. Submissions with
/// inconsistent origins, duplicate times or decreasing counts are rejected
/// individually.
pub fn read_series_csv<R: Read>(input: R) -> Result<Ingested<Dataset>> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let id_col = require_column(&headers, "submission_id")?;
    let origin_col = require_column(&headers, "origin_time")?;
    let count_col = require_column(&headers, "cumulative_count")?;
    let (pos_col, position) = if let Some(c) = column(&headers, WALL_AGE) {
        (c, Position::Age(TimeUnit::WallHours))
    } else if let Some(c) = column(&headers, DIGG_AGE) {
        (c, Position::Age(TimeUnit::DiggHours))
    } else if let Some(c) = column(&headers, "sample_time") {
        (c, Position::Absolute)
    } else {
        return Err(Error::Parse {
            line: 1,
            message: format!("need one of `{WALL_AGE}`, `{DIGG_AGE}`, `sample_time`"),
        });
    };
    let unit = match position {
        Position::Age(u) => u,
        Position::Absolute => TimeUnit::WallHours,
    };

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Group> = HashMap::new();
    let mut issues = Vec::new();
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                issues.push(issue_from(csv_err(e)));
                continue;
            }
        };
        rows += 1;
        let line = line_of(&rec);
        let id = rec.get(id_col).unwrap_or("").to_string();
        let parsed = (|| -> Result<(Timestamp, f64, u64), String> {
            if id.is_empty() {
                return Err("empty submission id".into());
            }
            let origin = parse_timestamp(rec.get(origin_col).unwrap_or(""))?;
            let raw_pos = rec.get(pos_col).unwrap_or("");
            let age = match position {
                Position::Age(_) => raw_pos
                    .parse::<f64>()
                    .map_err(|_| format!("bad age `{raw_pos}`"))?,
                Position::Absolute => parse_timestamp(raw_pos)?.hours_since(origin),
            };
            let raw_count = rec.get(count_col).unwrap_or("");
            let count = raw_count
                .parse::<u64>()
                .map_err(|_| format!("bad count `{raw_count}`"))?;
            Ok((origin, age, count))
        })();
        let (origin, age, count) = match parsed {
            Ok(v) => v,
            Err(message) => {
                issues.push(IngestIssue { line, message });
                continue;
            }
        };
        let group = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Group {
                origin,
                samples: Vec::new(),
                conflict: false,
            }
        });
        if group.origin != origin {
            group.conflict = true;
        }
        group.samples.push(Sample::new(age, count));
    }
    if rows == 0 {
        return Err(Error::EmptyInput);
    }

    let mut series = Vec::with_capacity(order.len());
    let mut rejected = Vec::new();
    for id in order {
        let mut g = groups.remove(&id).expect("grouped id");
        if g.conflict {
            rejected.push((
                id.clone(),
                Error::InvalidSeries {
                    id,
                    reason: "inconsistent origin times".into(),
                },
            ));
            continue;
        }
        g.samples.sort_by(|a, b| a.age.total_cmp(&b.age));
        match PopularitySeries::new(Submission::new(id.clone(), g.origin), g.samples) {
            Ok(s) => series.push(s),
            Err(e) => rejected.push((id, e)),
        }
    }
    Ok(Ingested {
        value: Dataset::new(series, unit)?,
        issues,
        rejected,
    })
}

#[derive(Clone, Copy)]
enum Position {
    Age(TimeUnit),
    Absolute,
}

struct Group {
    origin: Timestamp,
    samples: Vec<Sample>,
    conflict: bool,
}

pub fn series_to_csv(ds: &Dataset) -> String {
    let age_col = match ds.unit() {
        TimeUnit::WallHours => WALL_AGE,
        TimeUnit::DiggHours => DIGG_AGE,
    };
    let mut out = format!("submission_id,origin_time,{age_col},cumulative_count\n");
    for s in ds.series() {
        let id = csv_field(s.id());
        for smp in s.samples() {
            let _ = writeln!(
                out,
                "{id},{},{},{}",
                fmt_f64(s.origin().0),
                fmt_f64(smp.age),
                smp.count
            );
        }
    }
    out
}

// ------------------------------------------------------------ parameters

const PARAMS_HEADER: &str = "model,t_i,t_r,beta0,sigma0_sq,alpha,p,n_train";

/// One row per `(model, t_i, t_r)`; unused parameter fields stay empty.
pub fn params_to_csv(grid: &FittedGrid) -> String {
    let mut out = format!("{PARAMS_HEADER}\n");
    for point in &grid.points {
        for fit in &point.fits {
            let (beta0, sigma, alpha, p) = match fit {
                Fitted::Ln(l) => (fmt_f64(l.beta0), fmt_f64(l.sigma0_sq), String::new(), String::new()),
                Fitted::Cs(c) => (String::new(), String::new(), fmt_f64(c.alpha), String::new()),
                Fitted::Gp(g) => (String::new(), String::new(), String::new(), fmt_f64(g.p)),
            };
            let _ = writeln!(
                out,
                "{},{},{},{beta0},{sigma},{alpha},{p},{}",
                fit.kind(),
                fmt_f64(fit.t_i()),
                fmt_f64(fit.t_r()),
                point.n_train
            );
        }
    }
    out
}

pub fn read_params_csv<R: Read>(input: R) -> Result<Vec<Fitted>> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let col = |n| require_column(&headers, n);
    let (c_model, c_ti, c_tr) = (col("model")?, col("t_i")?, col("t_r")?);
    let (c_b, c_s, c_a, c_p) = (col("beta0")?, col("sigma0_sq")?, col("alpha")?, col("p")?);
    let mut fits = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        let num = |c: usize| -> Result<f64> {
            let raw = rec.get(c).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad number `{raw}` in column `{}`", &headers[c]),
            })
        };
        let kind: ModelKind = rec.get(c_model).unwrap_or("").parse().map_err(|e: Error| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let (t_i, t_r) = (num(c_ti)?, num(c_tr)?);
        fits.push(match kind {
            ModelKind::Ln => Fitted::Ln(LnParams {
                t_i,
                t_r,
                beta0: num(c_b)?,
                sigma0_sq: num(c_s)?,
            }),
            ModelKind::Cs => Fitted::Cs(CsParams {
                t_i,
                t_r,
                alpha: num(c_a)?,
            }),
            ModelKind::Gp => Fitted::Gp(GpPoint { t_i, t_r, p: num(c_p)? }),
        });
    }
    if fits.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(fits)
}

// --------------------------------------------------------------- reports

pub fn curves_to_csv(curves: &[&ErrorCurve]) -> String {
    let mut out = String::from("model,measure,t_i,mean,stddev,count,excluded,stddev_over_mean\n");
    for c in curves {
        for p in &c.points {
            let ratio = if p.mean > 0.0 { p.stddev / p.mean } else { 0.0 };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.model,
                c.measure.as_str(),
                fmt_f64(p.t_i),
                fmt_f64(p.mean),
                fmt_f64(p.stddev),
                p.count,
                p.excluded,
                fmt_f64(ratio)
            );
        }
    }
    out
}

pub fn saturation_to_csv(curves: &[SaturationCurve]) -> String {
    let mut out = String::from("model,lower,upper,mean_qre,stddev,count\n");
    for c in curves {
        for b in &c.bins {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.model,
                fmt_f64(b.lower),
                fmt_f64(b.upper),
                fmt_f64(b.mean),
                fmt_f64(b.stddev),
                b.count
            );
        }
    }
    out
}

pub fn profile_to_csv(gp: &GpParams) -> String {
    let mut out = String::from("age,p,t_r\n");
    for &(t, p) in &gp.profile {
        let _ = writeln!(out, "{},{},{}", fmt_f64(t), fmt_f64(p), fmt_f64(gp.t_r));
    }
    out
}

pub fn truth_to_csv(gt: &GroundTruth) -> String {
    let mut out = String::from("step,age,mu,var\n");
    for (k, (m, v)) in gt.mu.iter().zip(&gt.var).enumerate() {
        let _ = writeln!(out, "{k},{},{},{}", fmt_f64(k as f64 * gt.step), fmt_f64(*m), fmt_f64(*v));
    }
    out
}

pub fn timebase_to_csv(tb: &Timebase) -> String {
    let mut out = String::from("wall_time,cumulative_events,events_per_unit\n");
    let unit = fmt_f64(tb.events_per_unit());
    for (t, c) in tb.knots() {
        let _ = writeln!(out, "{},{c},{unit}", fmt_f64(t.0));
    }
    out
}

pub fn read_timebase_csv<R: Read>(input: R) -> Result<Timebase> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let (ct, cc, cu) = (
        require_column(&headers, "wall_time")?,
        require_column(&headers, "cumulative_events")?,
        require_column(&headers, "events_per_unit")?,
    );
    let mut knots = Vec::new();
    let mut unit = None;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        let bad = |m: &str| Error::Parse {
            line,
            message: m.to_string(),
        };
        let t: f64 = rec.get(ct).unwrap_or("").parse().map_err(|_| bad("bad wall_time"))?;
        let c: u64 = rec.get(cc).unwrap_or("").parse().map_err(|_| bad("bad cumulative_events"))?;
        let u: f64 = rec.get(cu).unwrap_or("").parse().map_err(|_| bad("bad events_per_unit"))?;
        unit.get_or_insert(u);
        knots.push((Timestamp(t), c));
    }
    let unit = unit.ok_or(Error::EmptyInput)?;
    Timebase::from_knots(knots, unit)
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        fs::create_dir_all(d)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_forms() {
        assert_eq!(parse_timestamp("1183248000").unwrap(), Timestamp(1_183_248_000.0));
        assert_eq!(parse_timestamp("12.5").unwrap(), Timestamp(12.5));
        assert_eq!(
            parse_timestamp("2007-07-01T00:00:00Z").unwrap(),
            Timestamp(1_183_248_000.0)
        );
        assert_eq!(
            parse_timestamp("2007-07-01T01:00:00+01:00").unwrap(),
            Timestamp(1_183_248_000.0)
        );
        assert_eq!(
            parse_timestamp("2007-07-01 00:00:30").unwrap(),
            Timestamp(1_183_248_030.0)
        );
        assert!(parse_timestamp("yesterday").is_err());
    }

    #[test]
    fn empty_files() {
        assert_eq!(
            read_series_csv("submission_id,origin_time,age_wall_hours,cumulative_count\n".as_bytes()),
            Err(Error::EmptyInput)
        );
        assert_eq!(
            read_events_csv("submission_id,event_time\n".as_bytes()),
            Err(Error::EmptyInput)
        );
        assert!(read_series_csv("".as_bytes()).is_err());
    }

    #[test]
    fn decreasing_submission_rejected_others_kept() {
        let text = "submission_id,origin_time,age_wall_hours,cumulative_count\n\
                    a,0,1,5\na,0,2,9\nb,0,1,7\nb,0,2,3\nc,0,1,x\n";
        let got = read_series_csv(text.as_bytes()).unwrap();
        assert_eq!(got.value.len(), 1);
        assert_eq!(got.value.series()[0].id(), "a");
        assert_eq!(got.rejected.len(), 1);
        assert_eq!(got.rejected[0].1, Error::NonMonotoneSeries("b".into()));
        assert_eq!(got.issues.len(), 1);
        assert_eq!(got.issues[0].line, 6);
    }

    #[test]
    fn absolute_sample_times() {
        let text = "submission_id,origin_time,sample_time,cumulative_count\n\
                    a,2007-07-01T00:00:00Z,2007-07-02T00:00:00Z,100\n\
                    a,2007-07-01T00:00:00Z,1183420800,200\n";
        let ds = read_series_csv(text.as_bytes()).unwrap().value;
        let s = &ds.series()[0];
        assert_eq!(s.samples()[0], Sample::new(24.0, 100));
        assert_eq!(s.samples()[1], Sample::new(48.0, 200));
        assert_eq!(s.popularity_at(36.0).unwrap(), 150.0);
    }

    #[test]
    fn jsonl_events() {
        let text = "{\"submission_id\":\"a\",\"event_time\":10}\n\
                    {\"submission_id\":\"b\",\"event_time\":\"1970-01-01T00:00:05Z\"}\n\
                    not json\n";
        let got = read_events_jsonl(text.as_bytes()).unwrap();
        assert_eq!(got.value.len(), 2);
        assert_eq!(got.value.events()[0].time, Timestamp(5.0));
        assert_eq!(got.issues.len(), 1);
    }

    #[test]
    fn params_roundtrip() {
        let fits = vec![
            Fitted::Ln(LnParams {
                t_i: 1.0,
                t_r: 2.0,
                beta0: 1.9560115027140728,
                sigma0_sq: 0.1,
            }),
            Fitted::Cs(CsParams {
                t_i: 1.0,
                t_r: 2.0,
                alpha: 6.000000000000001,
            }),
            Fitted::Gp(GpPoint {
                t_i: 1.0,
                t_r: 2.0,
                p: 0.15,
            }),
        ];
        let grid = FittedGrid::from_fits(fits.clone()).unwrap();
        let text = params_to_csv(&grid);
        let back = read_params_csv(text.as_bytes()).unwrap();
        assert_eq!(back, fits);
    }

    #[test]
    fn quoted_ids() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
