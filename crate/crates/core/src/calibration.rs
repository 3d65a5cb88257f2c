//! Fitting the mean-reverting jump model to an observed mid-price series.
//!
//! The log-price is split into a slowly varying target (a moving average),
//! a mean-reverting residual and a jump component. Jumps are found one step
//! at a time against the one-step-ahead residual forecast, and the residual
//! parameters are re-fitted with the jumps removed.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::pathcalc::{SampledPath, TimeGrid};
use crate::pricemodels::{MarkDistribution, OuJumpParams, PriceModel, TimeFn};

/// Persistence below which the mean-reversion estimate is flagged as
/// sitting at the edge of what the sampling can resolve.
const PERSISTENCE_FLOOR: f64 = 1e-3;
/// Normal consistency constant for the median absolute deviation.
const MAD_SCALE: f64 = 0.674_489_750_196_081_7;

#[derive(Debug, Clone, PartialEq)]
pub struct MidPriceSeries {
    times: Vec<f64>,
    prices: Vec<f64>,
    pub source: String,
}

impl MidPriceSeries {
    /// Times must be non-decreasing and prices positive.
    pub fn new(times: Vec<f64>, prices: Vec<f64>, source: impl Into<String>) -> Result<MidPriceSeries> {
        if times.len() != prices.len() {
            return domain("times and prices differ in length");
        }
        if times.is_empty() {
            return domain("empty price series");
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
            return domain("series times must be finite and non-decreasing");
        }
        if let Some(i) = prices.iter().position(|p| !(*p > 0.0) || !p.is_finite()) {
            return domain(format!("price {} at row {i} is not positive", prices[i]));
        }
        Ok(MidPriceSeries {
            times,
            prices,
            source: source.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Repeated timestamps collapsed to their last price.
    pub fn deduplicated(&self) -> MidPriceSeries {
        let mut times: Vec<f64> = Vec::with_capacity(self.times.len());
        let mut prices: Vec<f64> = Vec::with_capacity(self.times.len());
        for (&t, &p) in self.times.iter().zip(&self.prices) {
            if times.last() == Some(&t) {
                *prices.last_mut().expect("non-empty") = p;
            } else {
                times.push(t);
                prices.push(p);
            }
        }
        MidPriceSeries {
            times,
            prices,
            source: self.source.clone(),
        }
    }

    /// The series as a sampled path on times shifted to start at zero.
    pub fn to_path(&self) -> Result<SampledPath> {
        let d = self.deduplicated();
        let t0 = d.times[0];
        let grid = TimeGrid::new(d.times.iter().map(|t| t - t0).collect())?;
        SampledPath::new(grid, d.prices)
    }
}

/// Moving average of log-price over windows of length `window`.
///
/// Each window is centred on its sample time and slid inwards where it
/// would cross either end of the series. The result lives on the series
/// times shifted to start at zero.
pub fn extract_target(series: &MidPriceSeries, window: f64) -> Result<SampledPath> {
    let path = series.to_path()?;
    if path.len() < 3 {
        return domain("series too short to extract a target");
    }
    let span = path.grid().horizon();
    if !(window > 0.0) {
        return domain(format!("window must be positive, got {window}"));
    }
    if window > span * (1.0 + 1e-12) {
        return domain(format!("window {window} is longer than the series span {span}"));
    }
    let times = path.times();
    let logs: Vec<f64> = path.values().iter().map(|p| p.ln()).collect();
    let mut prefix = vec![0.0; logs.len() + 1];
    for (i, l) in logs.iter().enumerate() {
        prefix[i + 1] = prefix[i] + l;
    }
    let tol = 1e-12 * span;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut target = Vec::with_capacity(times.len());
    for &t in times {
        let start = (t - 0.5 * window).clamp(0.0, (span - window).max(0.0));
        let end = start + window;
        while lo < times.len() && times[lo] < start - tol {
            lo += 1;
        }
        while hi < times.len() && times[hi] <= end + tol {
            hi += 1;
        }
        target.push((prefix[hi] - prefix[lo]) / (hi - lo) as f64);
    }
    SampledPath::new(path.grid().clone(), target)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuFit {
    pub alpha: f64,
    pub sigma: f64,
    /// One-step autocorrelation `exp(-alpha dt)` at the mean step.
    pub persistence: f64,
    /// The persistence fell below the resolvable floor; `alpha` is a lower bound.
    pub boundary: bool,
}

/// Mean-reversion speed and volatility of a residual path, from the exact
/// discretization `Y_i = exp(-alpha dt) Y_{i-1} + noise`.
pub fn fit_ou(residual: &SampledPath) -> Result<OuFit> {
    fit_ou_masked(residual, &vec![false; residual.len()])
}

/// As `fit_ou`, ignoring steps `i` (from `i - 1` to `i`) with `skip[i]` set.
fn fit_ou_masked(residual: &SampledPath, skip: &[bool]) -> Result<OuFit> {
    let t = residual.times();
    let y = residual.values();
    let steps: Vec<usize> = (1..y.len()).filter(|&i| !skip[i]).collect();
    if steps.len() < 2 {
        return Err(Error::Estimation("too few usable steps".into()));
    }
    if steps.iter().all(|&i| y[i] == 0.0 && y[i - 1] == 0.0) {
        return Err(Error::Estimation("residual has no variation".into()));
    }
    let dts: Vec<f64> = steps.iter().map(|&i| t[i] - t[i - 1]).collect();
    let mean_dt = dts.iter().sum::<f64>() / dts.len() as f64;
    let (min_dt, max_dt) = dts
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
    if max_dt - min_dt <= 1e-9 * mean_dt {
        fit_uniform(y, &steps, mean_dt)
    } else {
        fit_irregular(t, y, &steps, mean_dt, min_dt)
    }
}

fn fit_uniform(y: &[f64], steps: &[usize], dt: f64) -> Result<OuFit> {
    let sxy: f64 = steps.iter().map(|&i| y[i - 1] * y[i]).sum();
    let sxx: f64 = steps.iter().map(|&i| y[i - 1] * y[i - 1]).sum();
    if sxx == 0.0 {
        return Err(Error::Estimation("residual has no variation".into()));
    }
    let slope = sxy / sxx;
    if slope >= 1.0 {
        return Err(Error::Estimation(format!(
            "no mean reversion: persistence {slope} is not below one"
        )));
    }
    let boundary = slope < PERSISTENCE_FLOOR;
    let rho = slope.max(PERSISTENCE_FLOOR);
    let alpha = -rho.ln() / dt;
    let sse: f64 = steps.iter().map(|&i| (y[i] - slope * y[i - 1]).powi(2)).sum();
    let noise_var = sse / steps.len() as f64;
    let sigma = (2.0 * alpha * noise_var / (1.0 - rho * rho)).sqrt();
    Ok(OuFit {
        alpha,
        sigma,
        persistence: slope,
        boundary,
    })
}

fn fit_irregular(t: &[f64], y: &[f64], steps: &[usize], mean_dt: f64, min_dt: f64) -> Result<OuFit> {
    // Profile likelihood over log(alpha) with the volatility concentrated out.
    let n = steps.len() as f64;
    let profile = |log_alpha: f64| -> (f64, f64) {
        let alpha = log_alpha.exp();
        let mut ss = 0.0;
        let mut log_det = 0.0;
        for &i in steps {
            let dt = t[i] - t[i - 1];
            let rho = (-alpha * dt).exp();
            let unit_var = -(-2.0 * alpha * dt).exp_m1() / (2.0 * alpha);
            ss += (y[i] - rho * y[i - 1]).powi(2) / unit_var;
            log_det += unit_var.ln();
        }
        let sigma_sq = ss / n;
        (n * sigma_sq.ln() + log_det, sigma_sq)
    };
    let span: f64 = t[t.len() - 1] - t[0];
    let lo = (1e-6 / span).ln();
    let hi = ((1.0 / PERSISTENCE_FLOOR).ln() / min_dt).ln();
    let (mut a, mut b) = (lo, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (profile(c).0, profile(d).0);
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = profile(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = profile(d).0;
        }
        if b - a < 1e-10 {
            break;
        }
    }
    let log_alpha = 0.5 * (a + b);
    if log_alpha - lo < 1e-6 {
        return Err(Error::Estimation("no mean reversion detected".into()));
    }
    let (_, sigma_sq) = profile(log_alpha);
    if !(sigma_sq > 0.0) {
        return Err(Error::Estimation("residual has no variation".into()));
    }
    let alpha = log_alpha.exp();
    Ok(OuFit {
        alpha,
        sigma: sigma_sq.sqrt(),
        persistence: (-alpha * mean_dt).exp(),
        boundary: hi - log_alpha < 1e-6,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpFit {
    /// Grid indices `i` such that the jump happened between `i - 1` and `i`.
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
    /// Excess one-step displacement at each detected jump.
    pub marks: Vec<f64>,
    /// Detected jumps per unit time.
    pub intensity: f64,
    /// Mean absolute mark, the size of the fitted symmetric two-point law.
    pub mark_size: f64,
}

/// Flags steps whose displacement from the one-step forecast exceeds
/// `k sigma sqrt((1 - exp(-2 alpha dt)) / alpha)`.
pub fn detect_jumps(residual: &SampledPath, alpha: f64, sigma: f64, k: f64) -> Result<JumpFit> {
    detect(residual, alpha, sigma, k, None)
}

/// With `lattice` set, the running jump level advances by the nearest
/// multiple of that size instead of the raw displacement, and flagged steps
/// that round to zero are not counted as jumps.
fn detect(residual: &SampledPath, alpha: f64, sigma: f64, k: f64, lattice: Option<f64>) -> Result<JumpFit> {
    if !(alpha > 0.0) || !(sigma >= 0.0) || !(k > 0.0) {
        return domain("jump detection needs positive alpha and k and non-negative sigma");
    }
    let t = residual.times();
    let r = residual.values();
    let mut level = 0.0;
    let mut fit = JumpFit {
        indices: vec![],
        times: vec![],
        marks: vec![],
        intensity: 0.0,
        mark_size: 0.0,
    };
    for i in 1..r.len() {
        let dt = t[i] - t[i - 1];
        let rho = (-alpha * dt).exp();
        let excess = r[i] - rho * r[i - 1] - (1.0 - rho) * level;
        let threshold = k * sigma * (-(-2.0 * alpha * dt).exp_m1() / alpha).sqrt();
        if excess.abs() > threshold {
            let step = match lattice {
                Some(size) if size > 0.0 => (excess / size).round() * size,
                _ => excess,
            };
            // Closer to no jump than to any lattice point: a diffusive outlier.
            if step == 0.0 {
                continue;
            }
            fit.indices.push(i);
            fit.times.push(t[i]);
            fit.marks.push(excess);
            level += step;
        }
    }
    let span = t[t.len() - 1] - t[0];
    fit.intensity = fit.indices.len() as f64 / span;
    if !fit.marks.is_empty() {
        fit.mark_size = fit.marks.iter().map(|m| m.abs()).sum::<f64>() / fit.marks.len() as f64;
    }
    Ok(fit)
}

impl JumpFit {
    /// Cumulative jump level on a grid of `len` points, with each mark
    /// rounded to the nearest multiple of `mark_size`.
    pub fn level(&self, len: usize) -> Vec<f64> {
        let mut level = vec![0.0; len];
        let mut next = 0;
        for i in 1..len {
            level[i] = level[i - 1];
            while next < self.indices.len() && self.indices[next] == i {
                let mark = self.marks[next];
                level[i] += (mark / self.mark_size).round() * self.mark_size;
                next += 1;
            }
        }
        level
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualFit {
    pub ou: OuFit,
    pub jumps: JumpFit,
}

/// Alternates jump detection and the mean-reversion fit on a de-trended
/// log-price residual.
pub fn fit_residual(residual: &SampledPath, k: f64, rounds: usize) -> Result<ResidualFit> {
    let r = residual.values();
    let (mut alpha, mut sigma) = robust_start(residual)?;
    let mut lattice = None;
    let mut last = None;
    for _ in 0..rounds.max(1) {
        let jumps = detect(residual, alpha, sigma, k, lattice)?;
        let size = jumps.mark_size;
        let mut skip = vec![false; r.len()];
        for &i in &jumps.indices {
            skip[i] = true;
        }
        let level = jumps.level(r.len());
        let cleaned = SampledPath::new(
            residual.grid().clone(),
            r.iter().zip(&level).map(|(a, b)| a - b).collect(),
        )?;
        let ou = fit_ou_masked(&cleaned, &skip)?;
        alpha = ou.alpha;
        sigma = ou.sigma;
        lattice = if size > 0.0 { Some(size) } else { None };
        last = Some(ResidualFit { ou, jumps });
    }
    Ok(last.expect("at least one round"))
}

/// Near-random-walk dynamics with the volatility from the median absolute
/// deviation of the increments, which jumps barely move.
fn robust_start(residual: &SampledPath) -> Result<(f64, f64)> {
    let t = residual.times();
    let r = residual.values();
    if r.len() < 4 {
        return Err(Error::Estimation("residual too short".into()));
    }
    let mut incr: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_dt = (t[t.len() - 1] - t[0]) / (r.len() - 1) as f64;
    let med = median(&mut incr.clone());
    for v in incr.iter_mut() {
        *v = (*v - med).abs();
    }
    let mad = median(&mut incr);
    if mad == 0.0 {
        return Err(Error::Estimation("residual has no variation".into()));
    }
    Ok((1e-6 / mean_dt, mad / MAD_SCALE / mean_dt.sqrt()))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone)]
pub struct Calibration {
    /// Target log-price on the shifted series times.
    pub target: SampledPath,
    /// Time of the first observation; model time zero.
    pub start_time: f64,
    pub fit: ResidualFit,
}

impl Calibration {
    /// Jump model with the fitted parameters and symmetric two-point marks.
    pub fn model(&self) -> PriceModel {
        PriceModel::OuJump(OuJumpParams {
            target: TimeFn::interpolate(&self.target),
            alpha: self.fit.ou.alpha,
            sigma: self.fit.ou.sigma,
            lambda: self.fit.jumps.intensity,
            marks: MarkDistribution::TwoPoint {
                size: self.fit.jumps.mark_size,
            },
            initial_deviation: 0.0,
        })
    }
}

/// Full pipeline: target extraction, then alternating jump detection and
/// mean-reversion fitting on the residual.
///
/// Jumps do not revert, so a moving average of the raw log-price partly
/// follows the jump level and leaves a slow drift in the residual. The
/// target is therefore extracted a second time from the log-price with the
/// jump level removed, where the jumps are first located on the raw
/// log-price increments.
pub fn calibrate(series: &MidPriceSeries, window: f64, k: f64) -> Result<Calibration> {
    let path = series.to_path()?;
    let raw = path.map(|_, p| p.ln());
    let (alpha, sigma) = robust_start(&raw)?;
    let level = detect(&raw, alpha, sigma, k, None)?.level(path.len());
    let adjusted: Vec<f64> = path.values().iter().zip(&level).map(|(p, l)| p * (-l).exp()).collect();
    let adjusted = MidPriceSeries::new(path.times().to_vec(), adjusted, series.source.clone())?;
    let target = extract_target(&adjusted, window)?;
    let residual = path.zip_with(&target, |p, m| p.ln() - m)?;
    let fit = fit_residual(&residual, k, 3)?;
    Ok(Calibration {
        target,
        start_time: series.times()[0],
        fit,
    })
}
