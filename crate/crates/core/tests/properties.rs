use popcast_core::diagnostics::{
    cluster_filter, fit_slope1, jarque_bera, pearson_log, ResidualFit,
};
use popcast_core::evaluation::{indicator_grid, sweep, Forecast, Forecaster};
use popcast_core::predictors::{fit_cs, fit_gp_point, fit_ln, Fitted, ModelKind};
use popcast_core::synthgen::{GroundTruth, MuProfile};
use popcast_core::timebase::{build_timebase, Timebase};
use popcast_core::{
    generate, Dataset, EventStream, GrowthConfig, KnotPolicy, PopPair, PopularitySeries, Sample,
    Submission, TimeUnit, Timestamp,
};
use proptest::prelude::*;

fn series_strategy() -> impl Strategy<Value = PopularitySeries> {
    prop::collection::vec((0.01f64..10.0, 0u64..1000), 1..20).prop_map(|steps| {
        let mut age = 0.0;
        let mut count = 0;
        let samples = steps
            .into_iter()
            .map(|(da, dc)| {
                age += da;
                count += dc;
                Sample::new(age, count)
            })
            .collect();
        PopularitySeries::new(Submission::new("s", Timestamp(0.0)), samples).unwrap()
    })
}

fn growth_pairs() -> impl Strategy<Value = Vec<PopPair>> {
    prop::collection::vec((1u64..100_000, 0u64..1_000_000), 3..60).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(k, (n_i, extra))| PopPair::new(format!("p{k}"), n_i as f64, (n_i + extra) as f64).unwrap())
            .collect()
    })
}

fn rse(pairs: &[PopPair], c: f64) -> f64 {
    pairs
        .iter()
        .map(|p| {
            let d = c * p.ratio() - 1.0;
            d * d
        })
        .sum()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn timebase_strategy() -> impl Strategy<Value = Timebase> {
    prop::collection::vec((1.0f64..600.0, 0u64..50), 1..40).prop_map(|steps| {
        let mut t = 1_000_000.0;
        let mut c = 0;
        let mut knots = vec![(Timestamp(t), 0)];
        for (dt, dc) in steps {
            t += dt;
            c += dc;
            knots.push((Timestamp(t), c));
        }
        Timebase::from_knots(knots, 10.0).unwrap()
    })
}

proptest! {
    #[test]
    fn popularity_is_monotone_and_exact_at_samples(s in series_strategy(), fracs in prop::collection::vec(0.0f64..=1.0, 2..30)) {
        for smp in s.samples() {
            prop_assert_eq!(s.popularity_at(smp.age).unwrap(), smp.count as f64);
        }
        let last = s.last_age();
        let mut ages: Vec<f64> = fracs.iter().map(|f| f * last).collect();
        ages.sort_by(f64::total_cmp);
        let values: Vec<f64> = ages.iter().map(|&a| s.popularity_at(a).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn popularity_between_samples_is_bracketed(s in series_strategy(), f in 0.0f64..=1.0) {
        let mut prev = Sample::new(0.0, 0);
        for smp in s.samples() {
            let age = prev.age + f * (smp.age - prev.age);
            let v = s.popularity_at(age).unwrap();
            prop_assert!(v >= prev.count as f64 && v <= smp.count as f64, "{v} outside [{}, {}]", prev.count, smp.count);
            prev = *smp;
        }
    }

    #[test]
    fn digg_time_is_nonnegative_additive_and_monotone(tb in timebase_strategy(), a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
        let (lo, hi) = tb.range();
        let mut ts = [a, b, c].map(|f| Timestamp(lo.0 + f * (hi.0 - lo.0)));
        ts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let ab = tb.to_digg_time(ts[0], ts[1]).unwrap();
        let bc = tb.to_digg_time(ts[1], ts[2]).unwrap();
        let ac = tb.to_digg_time(ts[0], ts[2]).unwrap();
        prop_assert!(ab >= 0.0 && bc >= 0.0);
        prop_assert!((ab + bc - ac).abs() <= 1e-9 * ac.max(1.0));
        prop_assert!(ac >= ab);
    }

    #[test]
    fn default_unit_maps_span_to_its_length(times in prop::collection::vec(0.0f64..1e6, 2..300)) {
        let stream = EventStream::from_pairs(times.iter().map(|&t| (Timestamp(t), "x")), None).unwrap();
        let (s, e) = stream.span();
        prop_assume!(e.0 > s.0);
        let tb = build_timebase(&stream, None, KnotPolicy::PerEvent).unwrap();
        let d = tb.to_digg_time(s, e).unwrap();
        prop_assert!(close(d, e.hours_since(s), 1e-12), "{d} vs {}", e.hours_since(s));
    }

    #[test]
    fn slope1_residuals_sum_to_zero_and_beta0_is_optimal(pairs in growth_pairs(), eps in 1e-6f64..1.0) {
        let fit = fit_slope1(&pairs).unwrap();
        let sum: f64 = fit.residuals.iter().sum();
        let scale: f64 = fit.residuals.iter().map(|r| r.abs()).sum::<f64>().max(fit.beta0.abs());
        prop_assert!(sum.abs() <= 1e-9 * scale.max(1e-12) * pairs.len() as f64);
        let at = ResidualFit::log_sse(&pairs, fit.beta0);
        prop_assert!(ResidualFit::log_sse(&pairs, fit.beta0 + eps) > at);
        prop_assert!(ResidualFit::log_sse(&pairs, fit.beta0 - eps) > at);
    }

    #[test]
    fn log_pearson_ignores_axis_scaling(pairs in growth_pairs(), a in 0.01f64..100.0, b in 0.01f64..100.0) {
        let Ok(r) = pearson_log(&pairs) else { return Ok(()) };
        let scaled: Vec<PopPair> = pairs.iter().map(|p| PopPair::new(p.id.clone(), p.n_i * a, p.n_r * b).unwrap()).collect();
        let r2 = pearson_log(&scaled).unwrap();
        prop_assert!((r - r2).abs() < 1e-8, "{r} vs {r2}");
    }

    #[test]
    fn cluster_assignment_depends_on_direction_only(
        logs in prop::collection::vec((0.1f64..5.0, 0.1f64..9.0), 4..40),
        k in prop::sample::select(vec![0.5f64, 2.0, 3.0]),
    ) {
        let make = |s: f64| -> Vec<PopPair> {
            logs.iter().enumerate().map(|(i, (x, y))| PopPair::new(format!("{i}"), (s * x).exp(), (s * y).exp()).unwrap()).collect()
        };
        let (a, b) = (make(1.0), make(k));
        let sa = cluster_filter(&a, 100, 3).unwrap();
        let sb = cluster_filter(&b, 100, 3).unwrap();
        let ids = |v: &[PopPair]| { let mut x: Vec<String> = v.iter().map(|p| p.id.clone()).collect(); x.sort(); x };
        let (ua, la) = (ids(&sa.upper), ids(&sa.lower));
        let (ub, lb) = (ids(&sb.upper), ids(&sb.lower));
        prop_assert!((ua == ub && la == lb) || (ua == lb && la == ub));
    }

    #[test]
    fn jarque_bera_is_affine_invariant(xs in prop::collection::vec(-100.0f64..100.0, 8..200), shift in -1e3f64..1e3, scale in 0.01f64..100.0) {
        let Ok(a) = jarque_bera(&xs) else { return Ok(()) };
        prop_assume!(a.statistic.is_finite());
        let ys: Vec<f64> = xs.iter().map(|x| shift + scale * x).collect();
        let b = jarque_bera(&ys).unwrap();
        prop_assert!(close(a.statistic, b.statistic, 1e-6) || (a.statistic - b.statistic).abs() < 1e-9, "{} vs {}", a.statistic, b.statistic);
    }

    #[test]
    fn predictions_are_linear_in_n_i(pairs in growth_pairs(), n in 1.0f64..1e6, k in 1.0f64..1e3) {
        for kind in ModelKind::ALL {
            let fit = Fitted::fit(kind, &pairs, 1.0, 2.0).unwrap();
            let c = fit.scale();
            prop_assert!(close(fit.predict(n).unwrap(), c * n, 1e-15));
            prop_assert!(close(fit.predict(k * n).unwrap(), k * fit.predict(n).unwrap(), 1e-12));
        }
    }

    #[test]
    fn cs_minimizes_relative_error_over_constants(pairs in growth_pairs(), other in 0.01f64..100.0) {
        let cs = fit_cs(&pairs, 1.0, 2.0).unwrap();
        let ln = fit_ln(&pairs, 1.0, 2.0).unwrap();
        let gp = fit_gp_point(&pairs, 1.0, 2.0).unwrap();
        let best = rse(&pairs, cs.alpha);
        for c in [cs.alpha * 0.9, cs.alpha * 1.1, ln.scale(), 1.0 / gp.p, other] {
            if close(c, cs.alpha, 1e-12) {
                continue;
            }
            prop_assert!(best <= rse(&pairs, c), "alpha {} rse {} beaten by {c}: {}", cs.alpha, best, rse(&pairs, c));
        }
    }

    #[test]
    fn ln_minimizes_log_error_over_intercepts(pairs in growth_pairs()) {
        let ln = fit_ln(&pairs, 1.0, 2.0).unwrap();
        let cs = fit_cs(&pairs, 1.0, 2.0).unwrap();
        let gp = fit_gp_point(&pairs, 1.0, 2.0).unwrap();
        let best = ResidualFit::log_sse(&pairs, ln.beta0);
        for b in [ln.beta0 - 0.01, ln.beta0 + 0.01, cs.alpha.ln(), -gp.p.ln()] {
            if close(b, ln.beta0, 1e-12) {
                continue;
            }
            prop_assert!(best <= ResidualFit::log_sse(&pairs, b));
        }
    }

    #[test]
    fn count_scaling_leaves_parameters_unchanged(pairs in growth_pairs(), s in 1u64..1000, n in 1.0f64..1e4) {
        let scaled: Vec<PopPair> = pairs
            .iter()
            .map(|p| PopPair::new(p.id.clone(), p.n_i * s as f64, p.n_r * s as f64).unwrap())
            .collect();
        for kind in ModelKind::ALL {
            let a = Fitted::fit(kind, &pairs, 1.0, 2.0).unwrap();
            let b = Fitted::fit(kind, &scaled, 1.0, 2.0).unwrap();
            prop_assert_eq!(&a, &b);
            let s = s as f64;
            prop_assert!(close(b.predict(s * n).unwrap(), s * a.predict(n).unwrap(), 1e-12));
        }
    }

    #[test]
    fn cumulative_data_gives_growth_factors_at_least_one(pairs in growth_pairs(), n in 1.0f64..1e4) {
        let cs = fit_cs(&pairs, 1.0, 2.0).unwrap();
        let gp = fit_gp_point(&pairs, 1.0, 2.0).unwrap();
        prop_assert!(cs.alpha >= 1.0);
        prop_assert!(gp.p <= 1.0);
        for kind in ModelKind::ALL {
            prop_assert!(Fitted::fit(kind, &pairs, 1.0, 2.0).unwrap().predict(n).unwrap() >= n * (1.0 - 1e-15));
        }
    }

    #[test]
    fn truth_moments_are_additive(mu in prop::collection::vec(-1.0f64..1.0, 4..40), a in 0usize..40, b in 0usize..40, c in 0usize..40) {
        let n = mu.len();
        let mut idx = [a % (n + 1), b % (n + 1), c % (n + 1)];
        idx.sort();
        let gt = GroundTruth { step: 1.0, var: mu.iter().map(|m| m * m).collect(), mu };
        let [x, y, z] = idx.map(|k| k as f64);
        let m = |p, q| gt.true_ln_r(p, q).unwrap();
        let v = |p, q| gt.true_variance(p, q).unwrap();
        prop_assert!((m(x, y) + m(y, z) - m(x, z)).abs() < 1e-12);
        prop_assert!((v(x, y) + v(y, z) - v(x, z)).abs() < 1e-12);
        prop_assert!(v(x, z) >= 0.0);
        let (c_ln, c_cs) = gt.optimal_constants(x, z).unwrap();
        prop_assert!(c_cs <= c_ln);
    }

    #[test]
    fn csv_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = format!("{x}");
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}

/// Predicts a fixed scale for every submission.
struct Constant(f64);

impl Forecaster for Constant {
    fn label(&self) -> String {
        "constant".into()
    }

    fn forecast(&self, _: &PopularitySeries, _: f64, _: f64) -> Option<Forecast> {
        Some(Forecast::Scaled(self.0))
    }
}

/// Predicts the actual reference popularity.
struct Oracle(f64);

impl Forecaster for Oracle {
    fn label(&self) -> String {
        "oracle".into()
    }

    fn forecast(&self, s: &PopularitySeries, _: f64, _: f64) -> Option<Forecast> {
        Some(Forecast::Value(s.popularity_at(self.0).ok()?))
    }
}

fn small_dataset(seed: u64) -> Dataset {
    generate(&GrowthConfig {
        n_submissions: 60,
        horizon: 24.0,
        n0_log_mean: 1.0,
        n0_log_sd: 1.2,
        mu_profile: MuProfile::DiggLike { a: 0.4, tau0: 4.0 },
        seed,
        ..Default::default()
    })
    .unwrap()
    .dataset
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ensemble_qre_recomputes_from_ratios(seed in 0u64..1000, c in 0.5f64..5.0) {
        let ds = small_dataset(seed);
        let grid = indicator_grid(24.0, 1.0);
        let curves = sweep(&ds, 24.0, &grid, &[&Constant(c)]).unwrap();
        for p in &curves[0].qre.points {
            let set = ds.pairs_at(p.t_i, 24.0).unwrap();
            prop_assert_eq!(p.count, set.pairs.len());
            prop_assert_eq!(p.excluded, set.zero_excluded);
            let direct: f64 = set.pairs.iter().map(|q| (c * q.ratio() - 1.0).powi(2)).sum::<f64>() / set.pairs.len() as f64;
            prop_assert!(close(p.mean, direct, 1e-12), "{} vs {direct}", p.mean);
        }
    }

    #[test]
    fn oracle_forecasts_have_zero_error(seed in 0u64..1000) {
        let ds = small_dataset(seed);
        let grid = indicator_grid(24.0, 1.0);
        let curves = sweep(&ds, 24.0, &grid, &[&Oracle(24.0)]).unwrap();
        for p in curves[0].qre.points.iter().chain(&curves[0].qse.points) {
            prop_assert_eq!(p.mean, 0.0);
            prop_assert_eq!(p.stddev, 0.0);
        }
    }

    #[test]
    fn generated_series_are_cumulative(seed in any::<u64>()) {
        for s in small_dataset(seed).series() {
            for w in s.samples().windows(2) {
                prop_assert!(w[0].age < w[1].age && w[0].count <= w[1].count);
            }
        }
    }
}

#[test]
fn qse_is_qre_times_square_when_references_agree() {
    let series: Vec<PopularitySeries> = [5u64, 20, 40, 80]
        .iter()
        .enumerate()
        .map(|(k, &n_i)| {
            PopularitySeries::new(
                Submission::new(format!("s{k}"), Timestamp(0.0)),
                vec![Sample::new(1.0, n_i), Sample::new(2.0, 100)],
            )
            .unwrap()
        })
        .collect();
    let ds = Dataset::new(series, TimeUnit::WallHours).unwrap();
    let curves = sweep(&ds, 2.0, &[1.0], &[&Constant(3.0)]).unwrap();
    let (qse, qre) = (&curves[0].qse.points[0], &curves[0].qre.points[0]);
    assert!(close(qse.mean, qre.mean * 100.0 * 100.0, 1e-12));
}
