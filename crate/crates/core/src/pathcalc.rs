//! Sampled paths, Young and Stieltjes sums, p-variation and kernel convolution.
//!
//! Every integral here is a finite left-point sum over the sampling grid, so
//! for smooth integrands the Young and Stieltjes sums agree with the
//! integration-by-parts identity up to the product of increments.

use std::sync::Arc;

use crate::error::{domain, Error, Result};

/// Largest grid on which `PVarMode::Auto` runs the exact dynamic program.
pub const EXACT_PVAR_LIMIT: usize = 1 << 12;

/// Strictly increasing sampling times starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    min_step: f64,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Arc<TimeGrid>> {
        if times.len() < 2 {
            return domain("a time grid needs at least two points");
        }
        if times[0] != 0.0 {
            return domain(format!("a time grid must start at 0, got {}", times[0]));
        }
        let mut min_step = f64::INFINITY;
        for w in times.windows(2) {
            let step = w[1] - w[0];
            if !(step > 0.0) || !w[1].is_finite() {
                return domain("grid times must be finite and strictly increasing");
            }
            min_step = min_step.min(step);
        }
        Ok(Arc::new(TimeGrid { times, min_step }))
    }

    /// `intervals + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: f64, intervals: usize) -> Result<Arc<TimeGrid>> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return domain(format!("horizon must be positive, got {horizon}"));
        }
        if intervals == 0 {
            return domain("a uniform grid needs at least one interval");
        }
        let n = intervals as f64;
        let mut times: Vec<f64> = (0..=intervals).map(|k| horizon * (k as f64) / n).collect();
        times[intervals] = horizon;
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn min_step(&self) -> f64 {
        self.min_step
    }

    /// Largest spacing between consecutive points.
    pub fn mesh(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index of the grid point equal to `t` (up to a tiny fraction of the
    /// smallest step).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * self.min_step;
        let k = self.times.partition_point(|&x| x < t - tol);
        if k < self.times.len() && (self.times[k] - t).abs() <= tol {
            Ok(k)
        } else {
            Err(Error::OffGrid(t))
        }
    }

    /// Index of the last grid point at or before `t`; `t` is clamped to the grid.
    pub fn floor_index(&self, t: f64) -> usize {
        let tol = 1e-9 * self.min_step;
        let k = self.times.partition_point(|&x| x <= t + tol);
        k.saturating_sub(1)
    }

    /// Every `stride`-th point; the last point must be kept.
    pub fn subsample(&self, stride: usize) -> Result<Arc<TimeGrid>> {
        if stride == 0 || (self.times.len() - 1) % stride != 0 {
            return domain(format!(
                "stride {stride} does not divide {} intervals",
                self.times.len() - 1
            ));
        }
        TimeGrid::new(self.times.iter().step_by(stride).copied().collect())
    }

    fn interval(&self, s: f64, t: f64) -> Result<(usize, usize)> {
        if !(s <= t) {
            return Err(Error::BadInterval(s, t));
        }
        let i = self.index_of(s).map_err(|_| Error::BadInterval(s, t))?;
        let j = self.index_of(t).map_err(|_| Error::BadInterval(s, t))?;
        Ok((i, j))
    }
}

/// Values of a path at the points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>) -> Result<SampledPath> {
        if values.len() != grid.len() {
            return domain(format!("{} values for a grid of {} points", values.len(), grid.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("path values must be finite");
        }
        Ok(SampledPath { grid, values })
    }

    pub fn from_fn(grid: &Arc<TimeGrid>, f: impl Fn(f64) -> f64) -> Result<SampledPath> {
        let values = grid.times().iter().map(|&t| f(t)).collect();
        SampledPath::new(grid.clone(), values)
    }

    pub fn constant(grid: &Arc<TimeGrid>, value: f64) -> Result<SampledPath> {
        SampledPath::new(grid.clone(), vec![value; grid.len()])
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn same_grid(&self, other: &SampledPath) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.times == other.grid.times
    }

    pub fn check_grid(&self, other: &SampledPath) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Value at grid time `t`.
    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid.index_of(t)?])
    }

    /// Right-continuous piecewise-constant reading at any time in the span.
    pub fn cadlag(&self, t: f64) -> f64 {
        self.values[self.grid.floor_index(t)]
    }

    /// Piecewise-linear reading, clamped to the end values outside the span.
    pub fn linear(&self, t: f64) -> f64 {
        let times = self.grid.times();
        if t <= times[0] {
            return self.values[0];
        }
        if t >= self.grid.horizon() {
            return self.last();
        }
        let k = times.partition_point(|&x| x <= t) - 1;
        let w = (t - times[k]) / (times[k + 1] - times[k]);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> SampledPath {
        let values = self.times().iter().zip(&self.values).map(|(&t, &v)| f(t, v)).collect();
        SampledPath {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn zip_with(&self, other: &SampledPath, f: impl Fn(f64, f64) -> f64) -> Result<SampledPath> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(SampledPath {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn subsample(&self, stride: usize) -> Result<SampledPath> {
        let grid = self.grid.subsample(stride)?;
        let values = self.values.iter().step_by(stride).copied().collect();
        Ok(SampledPath { grid, values })
    }

    /// Sup-norm distance to another path on the same grid.
    pub fn sup_distance(&self, other: &SampledPath) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Left-point sum of `integrand` against the increments of `integrator` over
/// the grid points of `[s, t]`.
pub fn young_integral(integrand: &SampledPath, integrator: &SampledPath, s: f64, t: f64) -> Result<f64> {
    integrand.check_grid(integrator)?;
    let (i, j) = integrand.grid.interval(s, t)?;
    let x = integrand.values();
    let y = integrator.values();
    Ok((i..j).map(|k| x[k] * (y[k + 1] - y[k])).sum())
}

/// Left-point sum of the price against the increments of a trading control.
pub fn stieltjes_integral(price: &SampledPath, control: &SampledPath, s: f64, t: f64) -> Result<f64> {
    young_integral(price, control, s, t)
}

/// Sum of products of increments; the amount by which the two left-point sums
/// miss the integration-by-parts identity.
pub fn ibp_residual(a: &SampledPath, b: &SampledPath, s: f64, t: f64) -> Result<f64> {
    a.check_grid(b)?;
    let (i, j) = a.grid.interval(s, t)?;
    let x = a.values();
    let y = b.values();
    Ok((i..j).map(|k| (x[k + 1] - x[k]) * (y[k + 1] - y[k])).sum())
}

/// Running left-point Young sums from time zero.
pub fn cumulative_young(integrand: &SampledPath, integrator: &SampledPath) -> Result<SampledPath> {
    integrand.check_grid(integrator)?;
    let x = integrand.values();
    let y = integrator.values();
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 0..x.len() - 1 {
        acc += x[k] * (y[k + 1] - y[k]);
        out.push(acc);
    }
    SampledPath::new(integrand.grid.clone(), out)
}

/// Running trapezoid integral from time zero.
pub fn cumulative_trapezoid(path: &SampledPath) -> SampledPath {
    let t = path.times();
    let v = path.values();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 0..v.len() - 1 {
        acc += 0.5 * (t[k + 1] - t[k]) * (v[k] + v[k + 1]);
        out.push(acc);
    }
    SampledPath {
        grid: path.grid.clone(),
        values: out,
    }
}

/// Trapezoid integral over the whole grid.
pub fn trapezoid(path: &SampledPath) -> f64 {
    trapezoid_values(path.times(), path.values())
}

pub(crate) fn trapezoid_values(t: &[f64], v: &[f64]) -> f64 {
    (0..v.len() - 1)
        .map(|k| 0.5 * (t[k + 1] - t[k]) * (v[k] + v[k + 1]))
        .sum()
}

/// How to evaluate the supremum over partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PVarMode {
    /// Dynamic program over all sub-partitions of the grid.
    Exact,
    /// The single partition made of every grid point; a lower bound.
    GridSum,
    /// Exact up to `EXACT_PVAR_LIMIT` points, grid sum beyond.
    Auto,
}

/// p-variation `(sup sum |x_{t_{i+1}} - x_{t_i}|^p)^(1/p)` over partitions
/// drawn from the sampling grid.
pub fn p_variation(path: &SampledPath, p: f64, mode: PVarMode) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("p-variation needs p >= 1, got {p}"));
    }
    let exact = match mode {
        PVarMode::Exact => {
            if path.len() > EXACT_PVAR_LIMIT {
                return domain(format!(
                    "exact p-variation is limited to {EXACT_PVAR_LIMIT} points, got {}",
                    path.len()
                ));
            }
            true
        }
        PVarMode::GridSum => false,
        PVarMode::Auto => path.len() <= EXACT_PVAR_LIMIT,
    };
    let x = path.values();
    let power = if exact || p == 1.0 {
        exact_pvar_power(x, p)
    } else {
        x.windows(2).map(|w| (w[1] - w[0]).abs().powf(p)).sum()
    };
    Ok(power.powf(1.0 / p))
}

fn exact_pvar_power(x: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        // Total variation is attained by the finest partition.
        return x.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    }
    let mut best = vec![0.0f64; x.len()];
    for j in 1..x.len() {
        let mut b = 0.0f64;
        for i in 0..j {
            b = b.max(best[i] + (x[j] - x[i]).abs().powf(p));
        }
        best[j] = b;
    }
    best[x.len() - 1]
}

/// Trapezoid approximation of `int_0^t kernel(t - u) path(u) du` for a grid time `t`.
pub fn convolve_kernel(path: &SampledPath, kernel: impl Fn(f64) -> f64, t: f64) -> Result<f64> {
    let j = path.grid.index_of(t)?;
    let times = path.times();
    let v = path.values();
    let tj = times[j];
    Ok((0..j)
        .map(|k| {
            let a = kernel(tj - times[k]) * v[k];
            let b = kernel(tj - times[k + 1]) * v[k + 1];
            0.5 * (times[k + 1] - times[k]) * (a + b)
        })
        .sum())
}

/// A map from intervals `[s, t]` to non-negative numbers.
#[derive(Clone)]
pub struct ControlFunction {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ControlFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ControlFunction")
    }
}

impl ControlFunction {
    pub fn new(eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> ControlFunction {
        ControlFunction { eval: Arc::new(eval) }
    }

    /// Total variation of the piecewise-linear interpolant over `[s, t]`.
    pub fn total_variation(path: &SampledPath) -> ControlFunction {
        let path = path.clone();
        ControlFunction::new(move |s, t| {
            let pts = restricted_values(&path, s, t, SampledPath::linear);
            pts.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
        })
    }

    /// p-th power of the p-variation of the piecewise-constant reading over `[s, t]`.
    pub fn p_variation_power(path: &SampledPath, p: f64) -> ControlFunction {
        let path = path.clone();
        ControlFunction::new(move |s, t| {
            let pts = restricted_values(&path, s, t, SampledPath::cadlag);
            exact_pvar_power(&pts, p)
        })
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        if s >= t {
            return 0.0;
        }
        (self.eval)(s, t)
    }

    /// Checks `w(s,u) + w(u,t) <= w(s,t)` on every triple, up to `tol`
    /// relative to `1 + w(s,t)`; returns the offending triples.
    pub fn superadditivity_failures(&self, triples: &[(f64, f64, f64)], tol: f64) -> Vec<(f64, f64, f64)> {
        triples
            .iter()
            .copied()
            .filter(|&(s, u, t)| {
                let whole = self.eval(s, t);
                self.eval(s, u) + self.eval(u, t) > whole + tol * (1.0 + whole)
            })
            .collect()
    }
}

fn restricted_values(path: &SampledPath, s: f64, t: f64, read: fn(&SampledPath, f64) -> f64) -> Vec<f64> {
    let times = path.times();
    let mut pts = vec![read(path, s)];
    let start = times.partition_point(|&x| x <= s);
    for (k, &x) in times.iter().enumerate().skip(start) {
        if x >= t {
            break;
        }
        pts.push(path.values()[k]);
    }
    pts.push(read(path, t));
    pts
}
