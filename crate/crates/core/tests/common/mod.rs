#![allow(dead_code)]

use std::sync::Arc;

use goodexec::pathcalc::{SampledPath, TimeGrid};
use goodexec::strategies::MarketParams;

pub fn grid(n: usize) -> Arc<TimeGrid> {
    TimeGrid::uniform(1.0, n).unwrap()
}

/// Parameters used in the jump-diffusion liquidation example.
pub fn params() -> MarketParams {
    MarketParams::new(1.35, 1.15, 10_000.0, 1.0).unwrap()
}

/// Direct O(n^2) trapezoid of `int_0^t kernel(t - u) f(u) du` at every grid point.
pub fn direct_convolution(path: &SampledPath, kernel: impl Fn(f64) -> f64) -> Vec<f64> {
    let t = path.times();
    let v = path.values();
    (0..t.len())
        .map(|j| {
            (0..j)
                .map(|k| 0.5 * (t[k + 1] - t[k]) * (kernel(t[j] - t[k]) * v[k] + kernel(t[j] - t[k + 1]) * v[k + 1]))
                .sum()
        })
        .collect()
}

/// Least-squares slope of log(err) against log(1 / mesh).
pub fn observed_order(meshes: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = meshes.iter().map(|h| -h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

/// Solves a tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
