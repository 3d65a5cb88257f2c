//! Good executions when inventory risk grows linearly in time.
//!
//! The homogeneous solutions are `Ai(k t)` and `Bi(k t)` with
//! `k = (risk / impact)^(2/3)`; the price enters through
//! `phi(t) = 1/(2 impact^2) int_0^t Ai(k s)^-2 int_0^s Ai(k u) dS_u ds`.

use super::{airy_pair, closed_form_with_coefficient, ExecutionPlan, MarketParams, StrategyTag};
use crate::error::{domain, Result};
use crate::pathcalc::{trapezoid_values, SampledPath};

const AIRY_TOLERANCE: f64 = 1e-8;
/// Below this `k T` the Airy pair is numerically degenerate and the
/// zero-risk linear solution is used.
const DEGENERATE_ARG: f64 = 1e-6;

struct Basis {
    alpha: Vec<f64>,
    alpha_dot: Vec<f64>,
    beta: Vec<f64>,
    beta_dot: Vec<f64>,
}

impl Basis {
    fn new(params: &MarketParams, times: &[f64]) -> Result<Basis> {
        let k = params.risk_ratio().powf(2.0 / 3.0);
        let table = airy_pair(AIRY_TOLERANCE, k * params.horizon)?;
        let n = times.len();
        let mut b = Basis {
            alpha: Vec::with_capacity(n),
            alpha_dot: Vec::with_capacity(n),
            beta: Vec::with_capacity(n),
            beta_dot: Vec::with_capacity(n),
        };
        for &t in times {
            let v = table.eval((k * t).min(table.max_arg()))?;
            b.alpha.push(v.ai);
            b.alpha_dot.push(k * v.ai_prime);
            b.beta.push(v.bi);
            b.beta_dot.push(k * v.bi_prime);
        }
        Ok(b)
    }

    fn last(&self) -> usize {
        self.alpha.len() - 1
    }

    fn determinant(&self) -> f64 {
        let n = self.last();
        self.alpha[0] * self.beta[n] - self.alpha[n] * self.beta[0]
    }
}

/// Running Young sums `int_0^t Ai dS` and the driver `phi`.
fn driver(params: &MarketParams, basis: &Basis, path: &SampledPath) -> (Vec<f64>, Vec<f64>) {
    let t = path.times();
    let s = path.values();
    let n = s.len();
    let scale = params.two_impact_sq();
    let mut young = vec![0.0; n];
    for i in 0..n - 1 {
        young[i + 1] = young[i] + basis.alpha[i] * (s[i + 1] - s[i]);
    }
    let mut phi = vec![0.0; n];
    for i in 0..n - 1 {
        let a = young[i] / (basis.alpha[i] * basis.alpha[i]);
        let b = young[i + 1] / (basis.alpha[i + 1] * basis.alpha[i + 1]);
        phi[i + 1] = phi[i] + 0.5 * (t[i + 1] - t[i]) * (a + b) / scale;
    }
    (young, phi)
}

fn degenerate(params: &MarketParams) -> bool {
    params.risk_ratio().powf(2.0 / 3.0) * params.horizon < DEGENERATE_ARG
}

fn linear_fallback(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
    tag: StrategyTag,
) -> Result<ExecutionPlan> {
    let flat = MarketParams { risk: 0.0, ..*params };
    let coefficient = trapezoid_values(expected.times(), expected.values()) / flat.two_impact_sq();
    let mut plan = closed_form_with_coefficient(&flat, realized, coefficient, tag)?;
    plan.criterion = Some(super::Criterion::TimeWeighted);
    Ok(plan)
}

/// Good execution for the time-weighted criterion in closed form.
pub fn good_exec_time_closed(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
) -> Result<ExecutionPlan> {
    params.check_paths(&[realized, expected])?;
    if degenerate(params) {
        return linear_fallback(params, realized, expected, StrategyTag::GoodTimeClosed);
    }
    let times = realized.times();
    let basis = Basis::new(params, times)?;
    let n = basis.last();
    let (_, expected_phi) = driver(params, &basis, expected);
    let (young, phi) = driver(params, &basis, realized);
    let det = basis.determinant();
    if det.abs() < 1e-300 {
        return domain("degenerate Airy basis");
    }
    let x0 = params.initial_inventory;
    let end = params.target_inventory + basis.alpha[n] * expected_phi[n];
    let ca = (basis.beta[n] * x0 - basis.beta[0] * end) / det;
    let cb = (basis.alpha[0] * end - basis.alpha[n] * x0) / det;
    let scale = params.two_impact_sq();
    let q = (0..=n)
        .map(|i| ca * basis.alpha[i] + cb * basis.beta[i] - basis.alpha[i] * phi[i])
        .collect();
    let r = (0..=n)
        .map(|i| {
            ca * basis.alpha_dot[i] + cb * basis.beta_dot[i]
                - basis.alpha_dot[i] * phi[i]
                - young[i] / (scale * basis.alpha[i])
        })
        .collect();
    let grid = realized.grid().clone();
    ExecutionPlan::new(
        StrategyTag::GoodTimeClosed,
        SampledPath::new(grid.clone(), q)?,
        SampledPath::new(grid, r)?,
    )
}

/// Good execution for the time-weighted criterion by forward Euler on
/// `q' = r`, `dr = k^2 t q dt - dS / (2 impact^2)`.
pub fn good_exec_time_ivp(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
) -> Result<ExecutionPlan> {
    params.check_paths(&[realized, expected])?;
    if degenerate(params) {
        return linear_fallback(params, realized, expected, StrategyTag::GoodTimeIvp);
    }
    let times = realized.times();
    let basis = Basis::new(params, times)?;
    let n = basis.last();
    let det = basis.determinant();
    if det.abs() < 1e-300 {
        return domain("degenerate Airy basis");
    }
    let scale = params.two_impact_sq();
    let (a0, an, b0, bn) = (basis.alpha[0], basis.alpha[n], basis.beta[0], basis.beta[n]);
    let wronskian: Vec<f64> = (0..=n)
        .map(|i| basis.alpha[i] * basis.beta_dot[i] - basis.alpha_dot[i] * basis.beta[i])
        .collect();
    let weight: Vec<f64> = (0..=n)
        .map(|i| expected.values()[i] * (an * basis.beta_dot[i] - bn * basis.alpha_dot[i]) / wronskian[i])
        .collect();
    let adjustment =
        expected.first() * (an * b0 - a0 * bn) / (scale * wronskian[0]) + trapezoid_values(times, &weight) / scale;
    let end = params.target_inventory + adjustment;
    let x0 = params.initial_inventory;
    let ea = (bn * x0 - b0 * end) / det;
    let eb = (a0 * end - an * x0) / det;
    let r0 = ea * basis.alpha_dot[0] + eb * basis.beta_dot[0];

    let k_sq = params.risk_ratio().powi(2);
    let s = realized.values();
    let mut q = vec![x0; n + 1];
    let mut r = vec![r0; n + 1];
    for i in 0..n {
        let dt = times[i + 1] - times[i];
        q[i + 1] = q[i] + r[i] * dt;
        r[i + 1] = r[i] + k_sq * times[i] * q[i] * dt - (s[i + 1] - s[i]) / scale;
    }
    let grid = realized.grid().clone();
    ExecutionPlan::new(
        StrategyTag::GoodTimeIvp,
        SampledPath::new(grid.clone(), q)?,
        SampledPath::new(grid, r)?,
    )
}

/// Per-path sample of `S_T - 2 impact^2 (Ai phi)'(T)`, whose root mean
/// square is the reciprocal of the expected-cost certificate.
pub fn time_weighted_c_sample(params: &MarketParams, realized: &SampledPath) -> Result<f64> {
    params.check_paths(&[realized])?;
    if degenerate(params) {
        return Ok(realized.first());
    }
    let basis = Basis::new(params, realized.times())?;
    let n = basis.last();
    let (young, phi) = driver(params, &basis, realized);
    let derivative = basis.alpha_dot[n] * phi[n] + young[n] / (params.two_impact_sq() * basis.alpha[n]);
    Ok(realized.last() - params.two_impact_sq() * derivative)
}
