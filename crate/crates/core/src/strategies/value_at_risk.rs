//! Good executions when the risk term is proportional to position value.

use super::{Certificate, ExecutionPlan, MarketParams, StrategyTag};
use crate::error::Result;
use crate::pathcalc::{trapezoid_values, SampledPath};

/// `G(t) = int_0^t S` and `H(t) = int_0^t (S - risk^2 G)`, both by trapezoid.
fn integrals(params: &MarketParams, path: &SampledPath) -> (Vec<f64>, Vec<f64>) {
    let t = path.times();
    let s = path.values();
    let n = s.len();
    let risk_sq = params.risk * params.risk;
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    for i in 0..n - 1 {
        let dt = t[i + 1] - t[i];
        g[i + 1] = g[i] + 0.5 * dt * (s[i] + s[i + 1]);
        let a = s[i] - risk_sq * g[i];
        let b = s[i + 1] - risk_sq * g[i + 1];
        h[i + 1] = h[i] + 0.5 * dt * (a + b);
    }
    (g, h)
}

/// Slope added to the linear schedule so terminal inventory is unbiased.
fn unbiased_slope(params: &MarketParams, expected: &SampledPath) -> f64 {
    let (_, h) = integrals(params, expected);
    h[h.len() - 1] / (params.two_impact_sq() * params.horizon)
}

pub fn good_exec_var_closed(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
) -> Result<ExecutionPlan> {
    params.check_paths(&[realized, expected])?;
    let slope = unbiased_slope(params, expected);
    let (g, h) = integrals(params, realized);
    let (x0, xt, horizon) = (params.initial_inventory, params.target_inventory, params.horizon);
    let scale = params.two_impact_sq();
    let risk_sq = params.risk * params.risk;
    let s = realized.values();
    let times = realized.times();
    let q = times
        .iter()
        .enumerate()
        .map(|(i, &t)| (1.0 - t / horizon) * x0 + (t / horizon) * xt - h[i] / scale + slope * t)
        .collect();
    let r = (0..s.len())
        .map(|i| (xt - x0) / horizon - (s[i] - risk_sq * g[i]) / scale + slope)
        .collect();
    let grid = realized.grid().clone();
    ExecutionPlan::new(
        StrategyTag::GoodVarClosed,
        SampledPath::new(grid.clone(), q)?,
        SampledPath::new(grid, r)?,
    )
}

/// Forward Euler on `q' = r`, `dr = (risk^2 S dt - dS) / (2 impact^2)`.
pub fn good_exec_var_ivp(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
) -> Result<ExecutionPlan> {
    params.check_paths(&[realized, expected])?;
    let (x0, xt, horizon) = (params.initial_inventory, params.target_inventory, params.horizon);
    let scale = params.two_impact_sq();
    let risk_sq = params.risk * params.risk;
    let times = expected.times();
    let e = expected.values();
    let s0 = e[0];
    let mut cum = 0.0;
    let mut inner = Vec::with_capacity(e.len());
    for i in 0..e.len() {
        if i > 0 {
            cum += 0.5 * (times[i] - times[i - 1]) * (e[i - 1] + e[i]);
        }
        inner.push(e[i] - s0 - risk_sq * cum);
    }
    let r0 = (xt - x0) / horizon + trapezoid_values(times, &inner) / (scale * horizon);

    let s = realized.values();
    let n = s.len();
    let mut q = vec![x0; n];
    let mut r = vec![r0; n];
    for i in 0..n - 1 {
        let dt = times[i + 1] - times[i];
        q[i + 1] = q[i] + r[i] * dt;
        r[i + 1] = r[i] + (risk_sq * s[i] * dt - (s[i + 1] - s[i])) / scale;
    }
    let grid = realized.grid().clone();
    ExecutionPlan::new(
        StrategyTag::GoodVarIvp,
        SampledPath::new(grid.clone(), q)?,
        SampledPath::new(grid, r)?,
    )
}

/// Pathwise certificate of the closed-form plan. The expected-cost part
/// `c` is the root mean square of `1 / xi` over paths, so it is left
/// infinite here and filled in by Monte Carlo callers.
pub fn certificate_var(params: &MarketParams, realized: &SampledPath, expected: &SampledPath) -> Result<Certificate> {
    params.check_paths(&[realized, expected])?;
    let slope = unbiased_slope(params, expected);
    let scale = params.two_impact_sq();
    let mass = trapezoid_values(realized.times(), realized.values());
    let xi_inv = scale * (params.target_inventory - params.initial_inventory) / params.horizon
        + scale * slope
        + params.risk * params.risk * mass;
    Ok(Certificate {
        c: f64::INFINITY,
        xi: 1.0 / xi_inv.abs(),
    })
}
