//! Running-cost functionals, the F-weight seminorm, tubular neighbourhoods
//! and summary statistics for liquidation errors.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::pathcalc::{trapezoid_values, SampledPath};
use crate::rng::{path_seed, substream};
use crate::strategies::{finite_difference_rate, Criterion, ExecutionPlan, Hyperbolic, MarketParams};

/// `F(t, S, q, r)` for one criterion.
pub fn running_cost(criterion: Criterion, params: &MarketParams, t: f64, price: f64, q: f64, r: f64) -> f64 {
    let impact_term = params.impact * params.impact * r * r;
    let risk_sq = params.risk * params.risk;
    let risk_term = match criterion {
        Criterion::Quadratic => {
            let d = q - params.target_inventory;
            risk_sq * d * d
        }
        Criterion::TimeWeighted => risk_sq * t * q * q,
        Criterion::ValueAtRisk => risk_sq * q * price,
    };
    r * price + impact_term + risk_term
}

/// Trapezoid integral of the running cost along a plan.
pub fn cost_j(
    criterion: Criterion,
    params: &MarketParams,
    realized: &SampledPath,
    plan: &ExecutionPlan,
) -> Result<f64> {
    cost_of(criterion, params, realized, &plan.inventory, &plan.rate)
}

fn cost_of(
    criterion: Criterion,
    params: &MarketParams,
    realized: &SampledPath,
    inventory: &SampledPath,
    rate: &SampledPath,
) -> Result<f64> {
    realized.check_grid(inventory)?;
    realized.check_grid(rate)?;
    let times = realized.times();
    let values: Vec<f64> = (0..times.len())
        .map(|i| {
            running_cost(
                criterion,
                params,
                times[i],
                realized.values()[i],
                inventory.values()[i],
                rate.values()[i],
            )
        })
        .collect();
    Ok(trapezoid_values(times, &values))
}

/// Squared F-weight `|eta|_F^2` with the rate taken from finite differences.
pub fn pathwise_f_weight(criterion: Criterion, params: &MarketParams, eta: &SampledPath) -> Result<f64> {
    let rate = finite_difference_rate(eta);
    pathwise_f_weight_with_rate(criterion, params, eta, &rate)
}

/// Squared F-weight `|eta|_F^2` given the rate of `eta`.
pub fn pathwise_f_weight_with_rate(
    criterion: Criterion,
    params: &MarketParams,
    eta: &SampledPath,
    rate: &SampledPath,
) -> Result<f64> {
    eta.check_grid(rate)?;
    let c1sq = params.impact * params.impact;
    let c2sq = params.risk * params.risk;
    let times = eta.times();
    let values: Vec<f64> = (0..times.len())
        .map(|i| {
            let (e, de) = (eta.values()[i], rate.values()[i]);
            let level = match criterion {
                Criterion::Quadratic => c2sq * e * e,
                Criterion::TimeWeighted => c2sq * times[i] * e * e,
                Criterion::ValueAtRisk => 0.0,
            };
            level + c1sq * de * de
        })
        .collect();
    Ok(trapezoid_values(times, &values))
}

/// Whether `candidate` lies in the tubular set `|e_T| <= xi |e|_F^2` around
/// `plan`, with `e` their difference.
pub fn tubular_member(
    criterion: Criterion,
    params: &MarketParams,
    plan: &ExecutionPlan,
    candidate: &ExecutionPlan,
    xi: f64,
) -> Result<bool> {
    let e = candidate.inventory.zip_with(&plan.inventory, |a, b| a - b)?;
    let de = candidate.rate.zip_with(&plan.rate, |a, b| a - b)?;
    let weight = pathwise_f_weight_with_rate(criterion, params, &e, &de)?;
    Ok(member(e.last().abs(), weight, xi))
}

fn member(end_gap: f64, weight: f64, xi: f64) -> bool {
    if weight == 0.0 {
        return end_gap == 0.0;
    }
    end_gap <= xi * weight
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub perturbations: usize,
    pub seed: u64,
    /// Number of sine modes in each perturbation.
    pub modes: usize,
    /// Standard deviation of the leading mode coefficient; mode `m` is scaled by `1/m`.
    pub amplitude: f64,
    /// Add a random multiple of `t / T` to half of the perturbations.
    pub endpoint_bump: bool,
}

impl AuditOptions {
    pub fn new(params: &MarketParams, perturbations: usize, seed: u64) -> AuditOptions {
        let scale = params
            .initial_inventory
            .abs()
            .max((params.initial_inventory - params.target_inventory).abs())
            .max(1.0);
        AuditOptions {
            perturbations,
            seed,
            modes: 16,
            amplitude: 0.05 * scale,
            endpoint_bump: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub sampled: usize,
    pub members: usize,
    pub violations: usize,
    /// Smallest `J(candidate) - J(plan)` over members.
    pub worst_margin: f64,
    pub tolerance: f64,
    pub plan_cost: f64,
}

/// Samples perturbations of `plan`, keeps those in the pathwise tubular set
/// and counts members whose cost falls below the plan's by more than
/// `1e-9 (1 + |J(plan)|)`.
pub fn audit_good_inequality(
    criterion: Criterion,
    params: &MarketParams,
    realized: &SampledPath,
    plan: &ExecutionPlan,
    options: &AuditOptions,
) -> Result<AuditReport> {
    if options.modes == 0 || !(options.amplitude > 0.0) {
        return domain("audit needs at least one mode and a positive amplitude");
    }
    let base = cost_j(criterion, params, realized, plan)?;
    let xi = plan.terminal_xi(params, realized)?;
    let tolerance = 1e-9 * (1.0 + base.abs());
    let times = realized.times().to_vec();
    let horizon = params.horizon;
    let outcomes: Vec<Option<f64>> = (0..options.perturbations as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let mut rng = substream(path_seed(options.seed, i), 0);
            let coefs: Vec<f64> = (1..=options.modes)
                .map(|m| options.amplitude / m as f64 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let bump = if options.endpoint_bump && rng.random::<bool>() {
                options.amplitude * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            let mut e = Vec::with_capacity(times.len());
            let mut de = Vec::with_capacity(times.len());
            for &t in &times {
                let mut v = bump * t / horizon;
                let mut dv = bump / horizon;
                for (j, c) in coefs.iter().enumerate() {
                    let w = (j + 1) as f64 * std::f64::consts::PI / horizon;
                    v += c * (w * t).sin();
                    dv += c * w * (w * t).cos();
                }
                e.push(v);
                de.push(dv);
            }
            let grid = realized.grid().clone();
            let e = SampledPath::new(grid.clone(), e)?;
            let de = SampledPath::new(grid, de)?;
            let weight = pathwise_f_weight_with_rate(criterion, params, &e, &de)?;
            // sin(m pi) is not exactly zero in floating point.
            let end_gap = if bump == 0.0 { 0.0 } else { e.last().abs() };
            if !member(end_gap, weight, xi) {
                return Ok(None);
            }
            let q = plan.inventory.zip_with(&e, |a, b| a + b)?;
            let r = plan.rate.zip_with(&de, |a, b| a + b)?;
            Ok(Some(cost_of(criterion, params, realized, &q, &r)? - base))
        })
        .collect::<Result<_>>()?;
    let margins: Vec<f64> = outcomes.into_iter().flatten().collect();
    Ok(AuditReport {
        sampled: options.perturbations,
        members: margins.len(),
        violations: margins.iter().filter(|&&m| m < -tolerance).count(),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
        tolerance,
        plan_cost: base,
    })
}

/// Sum that does not depend on the order of its inputs.
pub fn order_free_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in sorted {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Mean, unbiased variance and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

impl SampleStats {
    pub fn new(values: &[f64]) -> SampleStats {
        let n = values.len();
        if n == 0 {
            return SampleStats {
                count: 0,
                mean: f64::NAN,
                variance: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = order_free_sum(values) / n as f64;
        let variance = if n > 1 {
            let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            order_free_sum(&sq) / (n - 1) as f64
        } else {
            0.0
        };
        SampleStats {
            count: n,
            mean,
            variance,
            stderr: (variance / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiquidationStats {
    /// Statistics of `q_T - target` over plans.
    pub error: SampleStats,
    /// Standard error of the variance estimate.
    pub variance_stderr: f64,
    pub variance_bound: Option<f64>,
    /// Sample variance at most the bound plus two standard errors.
    pub within_bound: Option<bool>,
}

pub fn liquidation_stats(plans: &[ExecutionPlan], target: f64, variance_bound: Option<f64>) -> LiquidationStats {
    let terminal: Vec<f64> = plans.iter().map(|p| p.terminal_inventory()).collect();
    terminal_liquidation_stats(&terminal, target, variance_bound)
}

/// As `liquidation_stats`, from terminal inventories alone.
pub fn terminal_liquidation_stats(terminal: &[f64], target: f64, variance_bound: Option<f64>) -> LiquidationStats {
    let errors: Vec<f64> = terminal.iter().map(|q| q - target).collect();
    let error = SampleStats::new(&errors);
    let n = errors.len();
    let variance_stderr = if n > 1 {
        let fourth: Vec<f64> = errors.iter().map(|e| (e - error.mean).powi(4)).collect();
        let m4 = order_free_sum(&fourth) / n as f64;
        ((m4 - error.variance * error.variance).max(0.0) / n as f64).sqrt()
    } else {
        f64::NAN
    };
    LiquidationStats {
        error,
        variance_stderr,
        variance_bound,
        within_bound: variance_bound.map(|b| error.variance <= b + 2.0 * variance_stderr),
    }
}

/// Upper bound on `Var(q_T)` of the quadratic good execution:
/// `T / (4 impact^4) int cosh^2(k (T - t)) Var(S_t) dt`.
pub fn quadratic_variance_bound(params: &MarketParams, variance: &SampledPath) -> Result<f64> {
    params.check_paths(&[variance])?;
    let k = params.risk_ratio();
    let hyp = Hyperbolic::new(k, params.horizon);
    let times = variance.times();
    let v: Vec<f64> = times
        .iter()
        .zip(variance.values())
        .map(|(&t, &var)| {
            let ch = if hyp.is_linear() {
                1.0
            } else {
                (k * (params.horizon - t)).cosh()
            };
            ch * ch * var
        })
        .collect();
    Ok(params.horizon / (4.0 * params.impact.powi(4)) * trapezoid_values(times, &v))
}

/// Upper bound on `Var(q_T)` of the value-at-risk good execution:
/// `T / (2 impact^4) int (risk^4 t int_0^t Var(S_u) du + Var(S_t)) dt`.
pub fn var_variance_bound(params: &MarketParams, variance: &SampledPath) -> Result<f64> {
    params.check_paths(&[variance])?;
    let times = variance.times();
    let var = variance.values();
    let risk4 = params.risk.powi(4);
    let mut inner = 0.0;
    let mut v = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        if i > 0 {
            inner += 0.5 * (times[i] - times[i - 1]) * (var[i - 1] + var[i]);
        }
        v.push(risk4 * times[i] * inner + var[i]);
    }
    Ok(params.horizon / (2.0 * params.impact.powi(4)) * trapezoid_values(times, &v))
}
