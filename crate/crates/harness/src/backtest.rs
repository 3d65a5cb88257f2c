//! Strategies and calibration on an observed price series.

use goodexec::calibration::{calibrate, Calibration, MidPriceSeries};
use goodexec::pathcalc::{SampledPath, TimeGrid};
use goodexec::pricemodels::variance_path;
use goodexec::rng::path_seed;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{HarnessError, Result};
use crate::scenario::{run_with_sampler, RunArtifact};

/// Parameters of a calibration, in a form fit for a JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub source: String,
    pub observations: usize,
    pub start_time: f64,
    pub span: f64,
    pub window: f64,
    pub k: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub persistence: f64,
    /// Mean reversion at the resolvable limit; `alpha` is then a lower bound.
    pub boundary: bool,
    pub lambda: f64,
    pub mark_size: f64,
    pub jumps: usize,
}

impl CalibrationReport {
    pub fn new(series: &MidPriceSeries, cal: &Calibration, window: f64, k: f64) -> CalibrationReport {
        CalibrationReport {
            source: series.source.clone(),
            observations: cal.target.len(),
            start_time: cal.start_time,
            span: cal.target.grid().horizon(),
            window,
            k,
            alpha: cal.fit.ou.alpha,
            sigma: cal.fit.ou.sigma,
            persistence: cal.fit.ou.persistence,
            boundary: cal.fit.ou.boundary,
            lambda: cal.fit.jumps.intensity,
            mark_size: cal.fit.jumps.mark_size,
            jumps: cal.fit.jumps.indices.len(),
        }
    }
}

/// Runs the configured strategies on an observed series.
///
/// The series is calibrated, its span becomes the horizon, and both the
/// observed prices (held constant between observations) and the fitted
/// forecast `exp(target)` are sampled on a uniform grid of `config.grid`
/// intervals.
pub fn backtest(
    config: &ScenarioConfig,
    series: &MidPriceSeries,
    window: f64,
    k: f64,
) -> Result<(RunArtifact, Calibration)> {
    let cal = calibrate(series, window, k)?;
    let observed = series.to_path()?;
    let span = observed.grid().horizon();
    if !(span > 0.0) {
        return Err(HarnessError::Invalid("series spans no time".into()));
    }
    let mut config = config.clone();
    config.params.horizon = span;
    config.paths = 1;
    config.validate()?;
    let grid = TimeGrid::uniform(span, config.grid)?;
    let realized = SampledPath::from_fn(&grid, |t| observed.cadlag(t))?;
    let expected = SampledPath::from_fn(&grid, |t| cal.target.linear(t).exp())?;
    let model = cal.model();
    let variance = variance_path(&model, &grid, config.variance_paths, path_seed(config.seed, 1))?;
    let artifact = run_with_sampler(&config, &grid, &expected, &variance, |_| Ok(realized.clone()))?;
    Ok((artifact, cal))
}
