use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use popcast_core::diagnostics::{
    cluster_filter, fit_slope1, homoscedasticity_bins, jarque_bera, pearson_log, qq_data,
};
use popcast_core::evaluation::{growth_profile_curve, Measure};
use popcast_core::io::{self, Ingested};
use popcast_core::synthgen::diurnal_stream;
use popcast_core::timebase::{build_activity_profile, popularity_by_promotion_hour};
use popcast_core::{
    build_timebase, error_vs_saturation, fit_grid, generate, rebase_dataset, split, sweep, Dataset,
    EventStream, Fitted, FittedGrid, Forecaster, ModelKind,
};

use crate::config::{RunConfig, SplitChoice};
use crate::plot::{Chart, Line};
use crate::{InputKind, Outcome};

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    io::write_atomic(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn report<T>(path: &Path, got: &Ingested<T>) -> Outcome {
    for issue in &got.issues {
        eprintln!("{}:{}: {}", path.display(), issue.line, issue.message);
    }
    for (id, err) in &got.rejected {
        eprintln!("{}: rejected submission {id}: {err}", path.display());
    }
    if got.is_clean() {
        Outcome::Complete
    } else {
        Outcome::Partial
    }
}

fn worse(a: Outcome, b: Outcome) -> Outcome {
    if a == Outcome::Partial || b == Outcome::Partial {
        Outcome::Partial
    } else {
        Outcome::Complete
    }
}

fn is_jsonl(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "ndjson")
    )
}

fn load_events(path: &Path) -> Result<(EventStream, Outcome)> {
    let got = if is_jsonl(path) {
        io::read_events_jsonl(open(path)?)
    } else {
        io::read_events_csv(open(path)?)
    }
    .with_context(|| format!("reading events {}", path.display()))?;
    let outcome = report(path, &got);
    Ok((got.value, outcome))
}

fn load_series(path: &Path) -> Result<(Dataset, Outcome)> {
    let got = io::read_series_csv(open(path)?)
        .with_context(|| format!("reading series {}", path.display()))?;
    let outcome = report(path, &got);
    Ok((got.value, outcome))
}

/// Drops series that end before `t_r`, with a note on standard error.
fn covering(ds: Dataset, t_r: f64) -> Result<Dataset> {
    let (kept, dropped) = ds.covering(t_r);
    if !dropped.is_empty() {
        eprintln!(
            "note: {} submission(s) end before t_r = {t_r} and were skipped",
            dropped.len()
        );
    }
    if kept.is_empty() {
        bail!("no submission covers t_r = {t_r}");
    }
    Ok(kept)
}

fn parse_models(names: &[String], default: &[ModelKind]) -> Result<Vec<ModelKind>> {
    if names.is_empty() {
        return Ok(default.to_vec());
    }
    names
        .iter()
        .map(|n| n.parse::<ModelKind>().map_err(anyhow::Error::from))
        .collect()
}

fn write_svg(dir: &Path, name: &str, chart: &Chart) -> Result<()> {
    write(&dir.join(name), &chart.to_svg())
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let growth = cfg.growth();
    let syn = generate(&growth)?;
    write(&out.join("series.csv"), &io::series_to_csv(&syn.dataset))?;
    write(&out.join("truth.csv"), &io::truth_to_csv(&syn.truth))?;
    let mut n_events = 0;
    if cfg.emit_events {
        let mut events = syn.events;
        if cfg.background_rate > 0.0 {
            let (_, end) = events.span();
            // run one hour past the last sample so every sample time is
            // bracketed by events once the file is read back
            let hours = end.hours_since(cfg.start).max(cfg.horizon) + 1.0;
            let bg = diurnal_stream(
                cfg.background_rate,
                cfg.diurnal(),
                cfg.start,
                hours,
                cfg.seed.wrapping_add(1),
            )?;
            events = events.merge(&bg)?;
        }
        n_events = events.len();
        write(&out.join("events.csv"), &io::events_to_csv(&events))?;
    }
    eprintln!(
        "simulated {} submissions, {} events, truncation rate {:.4}",
        syn.dataset.len(),
        n_events,
        syn.report.truncation_rate()
    );
    Ok(Outcome::Complete)
}

fn sniff_kind(path: &Path) -> Result<InputKind> {
    if is_jsonl(path) {
        return Ok(InputKind::Events);
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header = text.lines().find(|l| !l.trim_start().starts_with('#')).unwrap_or("");
    Ok(if header.contains("event_time") {
        InputKind::Events
    } else {
        InputKind::Series
    })
}

pub fn ingest(input: &Path, kind: Option<InputKind>, out: Option<&Path>) -> Result<Outcome> {
    let kind = match kind {
        Some(k) => k,
        None => sniff_kind(input)?,
    };
    let (text, outcome, summary) = match kind {
        InputKind::Events => {
            let (stream, outcome) = load_events(input)?;
            let summary = format!("{} events, {} submissions", stream.len(), stream.ids().len());
            (io::events_to_csv(&stream), outcome, summary)
        }
        InputKind::Series => {
            let (ds, outcome) = load_series(input)?;
            let summary = format!("{} submissions ({})", ds.len(), ds.unit());
            (io::series_to_csv(&ds), outcome, summary)
        }
    };
    eprintln!("{}: {summary}", input.display());
    if let Some(out) = out {
        write(out, &text)?;
    }
    Ok(outcome)
}

pub fn timebase(cfg: &RunConfig, events: &Path, series: Option<&Path>, out: &Path) -> Result<Outcome> {
    let (stream, mut outcome) = load_events(events)?;
    let unit = match (cfg.unit_events, cfg.split) {
        (Some(u), _) => Some(u),
        (None, SplitChoice::ByTime(cut)) => Some(
            stream
                .mean_hourly_rate(stream.span().0, cut)
                .context("measuring the training-period event rate")?,
        ),
        (None, SplitChoice::RandomHalf) => None,
    };
    let tb = build_timebase(&stream, unit, cfg.knots)?;
    write(&out.join("timebase.csv"), &io::timebase_to_csv(&tb))?;

    let profile = build_activity_profile(&stream, 1.0, true, cfg.tz_offset)?;
    let mut csv = String::from("bucket_start,events_per_hour\n");
    for (t, r) in &profile.rates {
        let _ = writeln!(csv, "{},{}", t.0, r);
    }
    write(&out.join("activity.csv"), &csv)?;
    let week = profile.week_folded.unwrap_or_default();
    let mut csv = String::from("hour_of_week,events_per_hour\n");
    for (h, r) in week.iter().enumerate() {
        let _ = writeln!(csv, "{h},{r}");
    }
    write(&out.join("activity_week.csv"), &csv)?;
    if cfg.plots {
        write_svg(
            out,
            "activity_week.svg",
            &Chart {
                title: "Events per hour by hour of week".into(),
                x_label: "hour of week".into(),
                y_label: "events per hour".into(),
                lines: vec![Line {
                    label: "rate".into(),
                    points: week.iter().enumerate().map(|(h, &r)| (h as f64, r)).collect(),
                    band: None,
                }],
                scatter: false,
                log_y: false,
            },
        )?;
    }

    if let Some(series) = series {
        let (ds, o) = load_series(series)?;
        outcome = worse(outcome, o);
        let cells = popularity_by_promotion_hour(&ds, &[1.0, 24.0], cfg.tz_offset)?;
        let mut csv = String::from("promotion_hour,offset_hours,mean_popularity,count\n");
        for c in &cells {
            let _ = writeln!(csv, "{},{},{},{}", c.hour, c.offset_hours, c.mean, c.count);
        }
        write(&out.join("promotion_hours.csv"), &csv)?;
        let rebased = rebase_dataset(&ds, &tb)?;
        write(&out.join("series_digg.csv"), &io::series_to_csv(&rebased))?;
    }
    eprintln!(
        "timebase: {} knots, {} events per unit",
        tb.knots().len(),
        tb.events_per_unit()
    );
    Ok(outcome)
}

pub fn fit(
    cfg: &RunConfig,
    series: &Path,
    models: &[String],
    t_i: Option<f64>,
    out: &Path,
) -> Result<Outcome> {
    let (ds, outcome) = load_series(series)?;
    let ds = covering(ds, cfg.t_r)?;
    let mut sweep_cfg = cfg.sweep();
    sweep_cfg.models = parse_models(models, &cfg.models)?;
    let grid = match t_i {
        None => fit_grid(&ds, &sweep_cfg)?,
        Some(t_i) => {
            let set = ds.pairs_at(t_i, cfg.t_r)?;
            let mut pairs = set.pairs;
            if sweep_cfg.cluster.applies_at(t_i) && pairs.len() >= 2 {
                pairs = cluster_filter(&pairs, sweep_cfg.cluster.max_iter, sweep_cfg.cluster.seed)?.upper;
            }
            let fits = sweep_cfg
                .models
                .iter()
                .map(|&k| Fitted::fit(k, &pairs, t_i, cfg.t_r))
                .collect::<Result<Vec<_>, _>>()?;
            let mut grid = FittedGrid::from_fits(fits)?;
            grid.points[0].n_train = pairs.len();
            grid.points[0].zero_excluded = set.zero_excluded;
            grid
        }
    };
    write(out, &io::params_to_csv(&grid))?;
    Ok(outcome)
}

pub fn predict(params: &Path, queries: &Path, models: &[String], out: &Path) -> Result<Outcome> {
    let fits = io::read_params_csv(open(params)?)
        .with_context(|| format!("reading parameters {}", params.display()))?;
    let grid = FittedGrid::from_fits(fits)?;
    let available: Vec<ModelKind> = ModelKind::ALL
        .into_iter()
        .filter(|k| grid.fits().any(|f| f.kind() == *k))
        .collect();
    let models = parse_models(models, &available)?;

    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(queries)?);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{}: missing column `{name}`", queries.display()))
    };
    let (c_id, c_ti, c_ni) = (col("submission_id")?, col("t_i")?, col("n_i")?);
    let mut text = String::from("submission_id,model,t_i,t_r,n_hat\n");
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let id = &rec[c_id];
        let t_i: f64 = rec[c_ti]
            .parse()
            .with_context(|| format!("{}:{line}: bad t_i", queries.display()))?;
        let n_i: f64 = rec[c_ni]
            .parse()
            .with_context(|| format!("{}:{line}: bad n_i", queries.display()))?;
        let point = grid
            .point(t_i)
            .with_context(|| format!("{}:{line}: no parameters fitted at t_i = {t_i}", queries.display()))?;
        for &kind in &models {
            let fit = point
                .get(kind)
                .with_context(|| format!("{}:{line}: no {kind} parameters at t_i = {t_i}", queries.display()))?;
            let n_hat = fit
                .predict(n_i)
                .with_context(|| format!("{}:{line}", queries.display()))?;
            let _ = writeln!(text, "{id},{kind},{t_i},{},{n_hat}", grid.t_r);
        }
        rows += 1;
    }
    if rows == 0 {
        bail!("{}: no queries", queries.display());
    }
    write(out, &text)?;
    Ok(Outcome::Complete)
}

pub fn evaluate(cfg: &RunConfig, series: &Path, out: &Path) -> Result<Outcome> {
    let (ds, outcome) = load_series(series)?;
    let ds = covering(ds, cfg.t_r)?;
    let (train, test) = split(&ds, cfg.split_spec())?;
    let sweep_cfg = cfg.sweep();
    let grid = fit_grid(&train, &sweep_cfg)?;
    let ages = sweep_cfg.grid();
    let forecasters: Vec<_> = sweep_cfg.models.iter().map(|&k| grid.forecaster(k)).collect();
    let refs: Vec<&dyn Forecaster> = forecasters.iter().map(|f| f as &dyn Forecaster).collect();
    let curves = sweep(&test, cfg.t_r, &ages, &refs)?;
    let saturation = error_vs_saturation(&test, cfg.t_r, &ages, &refs, cfg.bins)?;

    write(&out.join("params.csv"), &io::params_to_csv(&grid))?;
    let all: Vec<_> = curves.iter().flat_map(|c| [&c.qse, &c.qre]).collect();
    write(&out.join("curves.csv"), &io::curves_to_csv(&all))?;
    write(&out.join("saturation.csv"), &io::saturation_to_csv(&saturation))?;
    let split_text = format!(
        "set,submissions\ntraining,{}\ntest,{}\n",
        train.len(),
        test.len()
    );
    write(&out.join("split.csv"), &split_text)?;

    if cfg.plots {
        for measure in [Measure::Qse, Measure::Qre] {
            let lines = curves
                .iter()
                .map(|c| {
                    let curve = if measure == Measure::Qse { &c.qse } else { &c.qre };
                    Line {
                        label: curve.model.clone(),
                        points: curve.points.iter().map(|p| (p.t_i, p.mean)).collect(),
                        band: Some(curve.points.iter().map(|p| p.stddev).collect()),
                    }
                })
                .collect();
            write_svg(
                out,
                &format!("{}.svg", measure.as_str()),
                &Chart {
                    title: format!("{} by indicator age", measure.as_str().to_uppercase()),
                    x_label: "indicator age (hours)".into(),
                    y_label: measure.as_str().into(),
                    lines,
                    scatter: false,
                    log_y: true,
                },
            )?;
        }
        let lines = saturation
            .iter()
            .map(|s| Line {
                label: s.model.clone(),
                points: s.bins.iter().map(|b| (b.upper, b.mean)).collect(),
                band: Some(s.bins.iter().map(|b| b.stddev).collect()),
            })
            .collect();
        write_svg(
            out,
            "saturation.svg",
            &Chart {
                title: "QRE by fraction of reference popularity".into(),
                x_label: "n(t_i) / n(t_r)".into(),
                y_label: "qre".into(),
                lines,
                scatter: false,
                log_y: true,
            },
        )?;
    }
    Ok(outcome)
}

pub fn diagnose(cfg: &RunConfig, series: &Path, t_i: f64, out: &Path) -> Result<Outcome> {
    let (ds, outcome) = load_series(series)?;
    let ds = covering(ds, cfg.t_r)?;
    let sweep_cfg = cfg.sweep();

    let mut csv = String::from("t_i,pearson_log,pairs\n");
    for age in sweep_cfg.grid() {
        let set = ds.pairs_at(age, cfg.t_r)?;
        if let Ok(r) = pearson_log(&set.pairs) {
            let _ = writeln!(csv, "{age},{r},{}", set.pairs.len());
        }
    }
    write(&out.join("correlations.csv"), &csv)?;

    let set = ds.pairs_at(t_i, cfg.t_r)?;
    let all = set.pairs;
    let (upper, lower, degenerate) = if sweep_cfg.cluster.applies_at(t_i) && all.len() >= 2 {
        let s = cluster_filter(&all, sweep_cfg.cluster.max_iter, sweep_cfg.cluster.seed)?;
        (s.upper, s.lower, s.degenerate)
    } else {
        (all.clone(), Vec::new(), false)
    };
    let mut csv = String::from("submission_id,n_i,n_r,cluster\n");
    for (p, name) in upper
        .iter()
        .map(|p| (p, "upper"))
        .chain(lower.iter().map(|p| (p, "lower")))
    {
        let _ = writeln!(csv, "{},{},{},{name}", p.id, p.n_i, p.n_r);
    }
    write(&out.join("pairs.csv"), &csv)?;

    let fit = fit_slope1(&upper)?;
    let jb = jarque_bera(&fit.residuals);
    let qq = qq_data(&fit.residuals)?;
    let bins = homoscedasticity_bins(&upper, &fit, 50)?;

    let mut summary = String::from("key,value\n");
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(summary, "{k},{v}");
    };
    kv("t_i", t_i.to_string());
    kv("t_r", cfg.t_r.to_string());
    kv("pairs", all.len().to_string());
    kv("zero_excluded", set.zero_excluded.to_string());
    kv("upper", upper.len().to_string());
    kv("lower", lower.len().to_string());
    kv("cluster_degenerate", degenerate.to_string());
    kv("pearson_log_all", pearson_log(&all).map_or(String::new(), |r| r.to_string()));
    kv("pearson_log_upper", pearson_log(&upper).map_or(String::new(), |r| r.to_string()));
    kv("beta0", fit.beta0.to_string());
    kv("sigma0_sq", fit.sigma0_sq.to_string());
    match &jb {
        Ok(jb) => {
            kv("jb_statistic", jb.statistic.to_string());
            kv("skewness", jb.skewness.to_string());
            kv("kurtosis", jb.kurtosis.to_string());
            kv("jb_reject_5pct", jb.reject_at_5pct.to_string());
        }
        Err(e) => kv("jb_error", e.to_string()),
    }
    write(&out.join("summary.csv"), &summary)?;

    let mut csv = String::from("theoretical,empirical\n");
    for (t, e) in &qq {
        let _ = writeln!(csv, "{t},{e}");
    }
    write(&out.join("qq.csv"), &csv)?;
    let mut csv = String::from("bin,lower_ln_n_i,upper_ln_n_i,mean,variance,count\n");
    for b in &bins {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            b.index, b.lower, b.upper, b.mean, b.variance, b.count
        );
    }
    write(&out.join("residual_bins.csv"), &csv)?;

    if cfg.plots {
        let log_points = |v: &[popcast_core::PopPair]| v.iter().map(|p| (p.n_i.ln(), p.n_r.ln())).collect();
        write_svg(
            out,
            "pairs.svg",
            &Chart {
                title: format!("ln n(t_r) against ln n({t_i})"),
                x_label: "ln n_i".into(),
                y_label: "ln n_r".into(),
                lines: vec![
                    Line {
                        label: "upper".into(),
                        points: log_points(&upper),
                        band: None,
                    },
                    Line {
                        label: "lower".into(),
                        points: log_points(&lower),
                        band: None,
                    },
                ],
                scatter: true,
                log_y: false,
            },
        )?;
        write_svg(
            out,
            "qq.svg",
            &Chart {
                title: "Residual QQ plot".into(),
                x_label: "normal quantile".into(),
                y_label: "residual".into(),
                lines: vec![Line {
                    label: "residuals".into(),
                    points: qq,
                    band: None,
                }],
                scatter: true,
                log_y: false,
            },
        )?;
    }
    Ok(outcome)
}

pub fn profile(cfg: &RunConfig, series: &Path, out: &Path) -> Result<Outcome> {
    let (ds, outcome) = load_series(series)?;
    let ds = covering(ds, cfg.t_r)?;
    let gp = growth_profile_curve(&ds, cfg.t_r, cfg.grid_step)?;
    write(out, &io::profile_to_csv(&gp))?;
    if cfg.plots {
        let svg = out.with_extension("svg");
        write(
            &svg,
            &Chart {
                title: "Average normalized popularity".into(),
                x_label: "age (hours)".into(),
                y_label: "n(t) / n(t_r)".into(),
                lines: vec![Line {
                    label: "profile".into(),
                    points: gp.profile.clone(),
                    band: None,
                }],
                scatter: false,
                log_y: false,
            }
            .to_svg(),
        )?;
    }
    Ok(outcome)
}
