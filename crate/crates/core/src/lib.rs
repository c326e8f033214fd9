//! Forecasting long-term popularity of online content from early
//! measurements.
//!
//! The crate covers the whole pipeline: turning raw vote or view events into
//! per-submission popularity series, an optional event-count clock that
//! removes daily activity cycles, three predictors (log-linear, constant
//! scaling and growth profile), residual diagnostics, error sweeps over the
//! indicator age, and a synthetic generator with known ground truth.

pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod predictors;
pub mod series;
pub mod synthgen;
pub mod timebase;

pub use error::{Error, Result};
pub use evaluation::{
    error_vs_saturation, fit_grid, split, sweep, ErrorCurve, Forecast, Forecaster, FittedGrid,
    Measure, SplitSpec, SweepConfig,
};
pub use predictors::{Fitted, GpParams, ModelKind, Prediction};
pub use series::{Dataset, PopPair, PopularitySeries, Sample, Submission, TimeUnit, Timestamp};
pub use synthgen::{generate, GrowthConfig, Synthetic};
pub use timebase::{build_timebase, rebase_dataset, EventStream, KnotPolicy, Timebase};
