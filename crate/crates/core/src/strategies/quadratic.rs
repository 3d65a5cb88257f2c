use super::{Certificate, ExecutionPlan, Hyperbolic, MarketParams, StrategyTag};
use crate::error::{domain, Result};
use crate::pathcalc::{trapezoid_values, SampledPath};

/// Running trapezoid values of `int_0^t cosh(k (t - u)) S_u du` and
/// `int_0^t sinh(k (t - u)) S_u du` at every grid point.
///
/// Advances both integrals together with the addition formulas, which is
/// exactly the trapezoid rule on each full integral and costs one pass.
pub(crate) fn cosh_sinh_convolutions(path: &SampledPath, k: f64) -> (Vec<f64>, Vec<f64>) {
    let t = path.times();
    let s = path.values();
    let n = s.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n - 1 {
        let dt = t[i + 1] - t[i];
        let (ch, sh) = ((k * dt).cosh(), (k * dt).sinh());
        c[i + 1] = ch * c[i] + sh * d[i] + 0.5 * dt * (ch * s[i] + s[i + 1]);
        d[i + 1] = sh * c[i] + ch * d[i] + 0.5 * dt * (sh * s[i]);
    }
    (c, d)
}

/// Closed-form trajectory driven by `driver` with a given coefficient on
/// the terminal adjustment `sinh(k t) / sinh(k T)`.
pub(crate) fn closed_form_with_coefficient(
    params: &MarketParams,
    driver: &SampledPath,
    coefficient: f64,
    tag: StrategyTag,
) -> Result<ExecutionPlan> {
    let k = params.risk_ratio();
    let hyp = Hyperbolic::new(k, params.horizon);
    let (x0, xt) = (params.initial_inventory, params.target_inventory);
    let scale = params.two_impact_sq();
    let (c, d) = cosh_sinh_convolutions(driver, k);
    let s = driver.values();
    let times = driver.times();
    let mut q = Vec::with_capacity(s.len());
    let mut r = Vec::with_capacity(s.len());
    for (i, &t) in times.iter().enumerate() {
        let a = hyp.blend(t);
        q.push((1.0 - a) * x0 + a * xt - c[i] / scale + coefficient * hyp.sinh_ratio(t));
        r.push(-hyp.blend_dot(t) * (x0 - xt) - (s[i] + k * d[i]) / scale + coefficient * hyp.sinh_ratio_dot(t));
    }
    let grid = driver.grid().clone();
    ExecutionPlan::new(tag, SampledPath::new(grid.clone(), q)?, SampledPath::new(grid, r)?)
}

/// `int_0^T cosh(k (T - u)) E[S_u] du / (2 impact^2)`: the coefficient that
/// makes terminal inventory unbiased.
pub(crate) fn unbiased_coefficient(params: &MarketParams, expected: &SampledPath) -> f64 {
    let (c, _) = cosh_sinh_convolutions(expected, params.risk_ratio());
    c[c.len() - 1] / params.two_impact_sq()
}

/// Good execution for the quadratic criterion in closed form.
///
/// Inventory at `t` uses the realized path up to `t`; the terminal
/// adjustment uses only the expected path.
pub fn good_exec_quadratic_closed(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
) -> Result<ExecutionPlan> {
    params.check_paths(&[realized, expected])?;
    let coefficient = unbiased_coefficient(params, expected);
    closed_form_with_coefficient(params, realized, coefficient, StrategyTag::GoodQuadraticClosed)
}

/// Good execution for the quadratic criterion by forward Euler on
/// `q' = r`, `dr = k^2 (q - target) dt - dS / (2 impact^2)`.
pub fn good_exec_quadratic_ivp(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
) -> Result<ExecutionPlan> {
    params.check_paths(&[realized, expected])?;
    let r0 = quadratic_initial_rate(params, expected)?;
    quadratic_from_initial_rate(params, realized, r0)
}

/// Forward Euler trajectory of the quadratic system from a given initial rate.
pub fn quadratic_from_initial_rate(params: &MarketParams, realized: &SampledPath, r0: f64) -> Result<ExecutionPlan> {
    params.check_paths(&[realized])?;
    let k = params.risk_ratio();
    let scale = params.two_impact_sq();
    let xt = params.target_inventory;
    let t = realized.times();
    let s = realized.values();
    let n = s.len();
    let mut q = vec![params.initial_inventory; n];
    let mut r = vec![r0; n];
    for i in 0..n - 1 {
        let dt = t[i + 1] - t[i];
        q[i + 1] = q[i] + r[i] * dt;
        r[i + 1] = r[i] + k * k * (q[i] - xt) * dt - (s[i + 1] - s[i]) / scale;
    }
    let grid = realized.grid().clone();
    ExecutionPlan::new(
        StrategyTag::GoodQuadraticIvp,
        SampledPath::new(grid.clone(), q)?,
        SampledPath::new(grid, r)?,
    )
}

/// Initial rate that makes the forward-stepped trajectory unbiased.
fn quadratic_initial_rate(params: &MarketParams, expected: &SampledPath) -> Result<f64> {
    let k = params.risk_ratio();
    let horizon = params.horizon;
    let scale = params.two_impact_sq();
    let (x0, xt) = (params.initial_inventory, params.target_inventory);
    let s0 = expected.first();
    let times = expected.times();
    let e = expected.values();
    let hyp = Hyperbolic::new(k, horizon);
    if hyp.is_linear() {
        let mass = trapezoid_values(times, e);
        return Ok(-s0 / scale + ((xt - x0) + mass / scale) / horizon);
    }
    if k * horizon > 350.0 {
        return domain(format!(
            "risk ratio times horizon is {}; too large for the forward construction",
            k * horizon
        ));
    }
    let weighted = |f: fn(f64) -> f64| -> f64 {
        let v: Vec<f64> = times.iter().zip(e).map(|(&t, &s)| f(k * t) * s).collect();
        trapezoid_values(times, &v)
    };
    let (ch, sh) = ((k * horizon).cosh(), (k * horizon).sinh());
    let adjustment = (ch * weighted(f64::cosh) - sh * weighted(f64::sinh)) / scale;
    Ok(-s0 / scale + k / sh * ((xt - x0) * ch + adjustment))
}

/// Certificate of the quadratic good execution.
///
/// `c` comes from the pointwise price variance, `xi` from the realized path.
pub fn certificate_quadratic(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
    variance: &SampledPath,
) -> Result<Certificate> {
    params.check_paths(&[realized, expected, variance])?;
    let k = params.risk_ratio();
    let horizon = params.horizon;
    let hyp = Hyperbolic::new(k, horizon);
    let times = realized.times();
    let c_inv = if hyp.is_linear() {
        0.0
    } else {
        let v: Vec<f64> = times
            .iter()
            .zip(variance.values())
            .map(|(&t, &var)| (k * (horizon - t)).sinh() * var.max(0.0).sqrt())
            .collect();
        k * trapezoid_values(times, &v)
    };
    let (_, d_real) = cosh_sinh_convolutions(realized, k);
    let (c_exp, _) = cosh_sinh_convolutions(expected, k);
    let (d_t, c_t) = (d_real[d_real.len() - 1], c_exp[c_exp.len() - 1]);
    let two_impact_sq = params.two_impact_sq();
    let gap = params.target_inventory - params.initial_inventory;
    // sinh_ratio_dot(T) = k coth(k T) and 2 c1 c2 / sinh(k T) = 2 c1^2 k / sinh(k T).
    let xi_inv = two_impact_sq * gap * hyp.sinh_ratio_dot(0.0) - k * d_t + hyp.sinh_ratio_dot(horizon) * c_t;
    Ok(Certificate {
        c: 1.0 / c_inv,
        xi: 1.0 / xi_inv.abs(),
    })
}
