//! Reference strategies: deterministic schedules, the hindsight optimum and
//! the penalized-terminal-inventory optimum.

use std::sync::Arc;

use crate::error::{domain, Result};
use crate::pathcalc::{SampledPath, TimeGrid};
use crate::strategies::{
    good_exec_quadratic_closed, good_exec_time_closed, good_exec_var_closed, Criterion, ExecutionPlan, MarketParams,
    StrategyTag,
};

fn closed_form(
    criterion: Criterion,
    params: &MarketParams,
    driver: &SampledPath,
    forecast: &SampledPath,
) -> Result<ExecutionPlan> {
    match criterion {
        Criterion::Quadratic => good_exec_quadratic_closed(params, driver, forecast),
        Criterion::TimeWeighted => good_exec_time_closed(params, driver, forecast),
        Criterion::ValueAtRisk => good_exec_var_closed(params, driver, forecast),
    }
}

/// Best deterministic schedule: the good execution with the expected path
/// standing in for the realized one.
pub fn static_optimal(criterion: Criterion, params: &MarketParams, expected: &SampledPath) -> Result<ExecutionPlan> {
    let mut plan = closed_form(criterion, params, expected, expected)?;
    plan.tag = StrategyTag::Static;
    plan.criterion = Some(criterion);
    plan.fuel_constrained = true;
    Ok(plan)
}

/// Hindsight optimum that sees the whole realized path.
pub fn aposteriori_optimal(
    criterion: Criterion,
    params: &MarketParams,
    realized: &SampledPath,
) -> Result<ExecutionPlan> {
    let mut plan = closed_form(criterion, params, realized, realized)?;
    plan.tag = StrategyTag::APosteriori;
    plan.criterion = Some(criterion);
    plan.fuel_constrained = true;
    plan.anticipative = true;
    Ok(plan)
}

/// Straight-line schedule from the initial to the target inventory.
pub fn twap(params: &MarketParams, grid: &Arc<TimeGrid>) -> Result<ExecutionPlan> {
    params.validate()?;
    let (x0, xt, horizon) = (params.initial_inventory, params.target_inventory, params.horizon);
    let q = SampledPath::from_fn(grid, |t| x0 + (xt - x0) * t / horizon)?;
    let r = SampledPath::constant(grid, (xt - x0) / horizon)?;
    let mut plan = ExecutionPlan::new(StrategyTag::Twap, q, r)?;
    plan.fuel_constrained = true;
    Ok(plan)
}

/// Optimal deterministic schedule when the price is `A_t` plus a martingale
/// and terminal inventory is penalized by `terminal_penalty^2 (q_T - target)^2`
/// instead of being constrained.
pub fn terminal_penalty_optimal(params: &MarketParams, drift: &SampledPath) -> Result<ExecutionPlan> {
    params.check_paths(&[drift])?;
    if params.terminal_penalty == 0.0 {
        return domain("the penalized schedule needs a positive terminal penalty");
    }
    let k = params.risk_ratio();
    let pen_sq = params.penalty_ratio().powi(2);
    let horizon = params.horizon;
    let linear = k * horizon < 1e-8;
    // Profile cosh(k u) + pen^2 sinh(k u) / k and its derivative.
    let profile = |u: f64| {
        if linear {
            1.0 + pen_sq * u
        } else {
            (k * u).cosh() + pen_sq * (k * u).sinh() / k
        }
    };
    let profile_dot = |u: f64| {
        if linear {
            pen_sq
        } else {
            k * (k * u).sinh() + pen_sq * (k * u).cosh()
        }
    };
    let shape = |t: f64| if linear { t } else { (k * t).sinh() / k };
    let shape_dot = |t: f64| if linear { 1.0 } else { (k * t).cosh() };

    let times = drift.times();
    let a = drift.values();
    let n = times.len();
    let scale = params.two_impact_sq();
    let psi: Vec<f64> = times.iter().map(|&t| profile(horizon - t)).collect();
    let mut tail = vec![0.0; n];
    for i in (0..n - 1).rev() {
        tail[i] = tail[i + 1] + psi[i] * (a[i + 1] - a[i]);
    }
    let v: Vec<f64> = (0..n).map(|i| tail[i] / (scale * psi[i])).collect();
    let mut acc = vec![0.0; n];
    for i in 0..n - 1 {
        acc[i + 1] = acc[i] + 0.5 * (times[i + 1] - times[i]) * (v[i] / psi[i] + v[i + 1] / psi[i + 1]);
    }
    let x0 = params.initial_inventory;
    let end_weight = pen_sq * params.target_inventory / profile(horizon);
    let q = (0..n)
        .map(|i| psi[i] * (x0 / psi[0] + acc[i]) + end_weight * shape(times[i]))
        .collect();
    let r = (0..n)
        .map(|i| -profile_dot(horizon - times[i]) * (x0 / psi[0] + acc[i]) + v[i] + end_weight * shape_dot(times[i]))
        .collect();
    let grid = drift.grid().clone();
    ExecutionPlan::new(
        StrategyTag::TerminalPenalty,
        SampledPath::new(grid.clone(), q)?,
        SampledPath::new(grid, r)?,
    )
}
