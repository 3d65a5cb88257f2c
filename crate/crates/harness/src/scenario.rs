//! Monte Carlo runs of several strategies on common price paths.

use std::sync::Arc;

use goodexec::baselines::{aposteriori_optimal, static_optimal, terminal_penalty_optimal, twap};
use goodexec::costs::{
    audit_good_inequality, cost_j, quadratic_variance_bound, terminal_liquidation_stats, var_variance_bound,
    AuditOptions, LiquidationStats, SampleStats,
};
use goodexec::pathcalc::{SampledPath, TimeGrid};
use goodexec::pricemodels::{expected_path, sample_path, variance_path};
use goodexec::rng::path_seed;
use goodexec::strategies::{
    certificate_quadratic, good_exec_quadratic_closed, good_exec_quadratic_ivp, good_exec_time_closed,
    good_exec_time_ivp, good_exec_var_closed, good_exec_var_ivp, l2_certificate, time_weighted_c_sample, Criterion,
    ExecutionPlan, MarketParams, StrategyTag,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::Result;

/// Sub-seed stream for the perturbation audit, kept apart from price paths.
const AUDIT_STREAM: u64 = 0x5eed_a0d1;
/// Sub-seed for the Monte Carlo price variance.
const VARIANCE_STREAM: u64 = 0x5eed_0a71;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    /// Expected-cost certificate; absent when unbounded.
    pub c: Option<f64>,
    /// Pathwise certificates `1 / |S_T + 2 impact^2 r_T|`.
    pub xi: SampleStats,
    pub xi_min: f64,
    pub xi_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub sampled: usize,
    pub members: usize,
    pub violations: usize,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub tag: StrategyTag,
    /// Cost under the scenario criterion.
    pub cost: SampleStats,
    pub liquidation: LiquidationStats,
    pub certificate: Option<CertificateSummary>,
    pub audit: Option<AuditSummary>,
}

/// One plot panel: price against forecast and three inventory schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPanel {
    pub path_index: usize,
    pub times: Vec<f64>,
    pub price: Vec<f64>,
    pub expected_price: Vec<f64>,
    pub q_static: Vec<f64>,
    pub q_good: Vec<f64>,
    pub q_aposteriori: Vec<f64>,
    pub rate_good: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub model: String,
    pub criterion: Criterion,
    pub seed: u64,
    pub grid: usize,
    pub paths: usize,
    pub strategies: Vec<StrategySummary>,
    /// Strategy whose schedule fills the `q_good` panel column.
    pub panel_strategy: Option<StrategyTag>,
    #[serde(skip)]
    pub trajectories: Vec<TrajectoryPanel>,
}

impl RunArtifact {
    pub fn empty(model: &str, criterion: Criterion, seed: u64, grid: usize) -> RunArtifact {
        RunArtifact {
            model: model.to_string(),
            criterion,
            seed,
            grid,
            paths: 0,
            strategies: Vec::new(),
            panel_strategy: None,
            trajectories: Vec::new(),
        }
    }

    pub fn strategy(&self, tag: &StrategyTag) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| &s.tag == tag)
    }
}

/// Builds one strategy's plan on a realized path.
pub fn build_plan(
    tag: &StrategyTag,
    criterion: Criterion,
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
) -> Result<ExecutionPlan> {
    let plan = match tag {
        StrategyTag::GoodQuadraticClosed => good_exec_quadratic_closed(params, realized, expected)?,
        StrategyTag::GoodQuadraticIvp => good_exec_quadratic_ivp(params, realized, expected)?,
        StrategyTag::GoodTimeClosed => good_exec_time_closed(params, realized, expected)?,
        StrategyTag::GoodTimeIvp => good_exec_time_ivp(params, realized, expected)?,
        StrategyTag::GoodVarClosed => good_exec_var_closed(params, realized, expected)?,
        StrategyTag::GoodVarIvp => good_exec_var_ivp(params, realized, expected)?,
        StrategyTag::Static => static_optimal(criterion, params, expected)?,
        StrategyTag::APosteriori => aposteriori_optimal(criterion, params, realized)?,
        StrategyTag::Twap => twap(params, realized.grid())?,
        StrategyTag::TerminalPenalty => {
            let s0 = expected.first();
            terminal_penalty_optimal(params, &expected.map(|_, v| v - s0))?
        }
        StrategyTag::Other(name) => {
            return Err(crate::error::HarnessError::Invalid(format!(
                "unknown strategy '{name}'"
            )));
        }
    };
    Ok(plan)
}

struct PathOutcome {
    costs: Vec<f64>,
    terminal: Vec<f64>,
    xi: Vec<Option<f64>>,
    c_sample: Vec<Option<f64>>,
    audits: Vec<Option<AuditSummary>>,
    panel: Option<TrajectoryPanel>,
}

/// Samples `paths` price paths from the configured model and runs every
/// listed strategy on each.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunArtifact> {
    config.validate()?;
    let model = config.model.build()?;
    let grid = TimeGrid::uniform(config.params.horizon, config.grid)?;
    let expected = expected_path(&model, &grid)?;
    let variance = variance_path(
        &model,
        &grid,
        config.variance_paths,
        path_seed(config.seed, VARIANCE_STREAM),
    )?;
    run_with_sampler(config, &grid, &expected, &variance, |i| {
        Ok(sample_path(&model, &grid, path_seed(config.seed, i as u64))?)
    })
}

/// Runs the listed strategies on paths drawn by `sampler`, which maps a path
/// index to its realized prices on `grid`.
pub fn run_with_sampler(
    config: &ScenarioConfig,
    grid: &Arc<TimeGrid>,
    expected: &SampledPath,
    variance: &SampledPath,
    sampler: impl Fn(usize) -> Result<SampledPath> + Sync,
) -> Result<RunArtifact> {
    let params = config.params;
    let criterion = config.criterion;
    let static_plan = static_optimal(criterion, &params, expected)?;
    let panel_tag = config
        .strategies
        .iter()
        .find(|t| t.criterion().is_some())
        .cloned()
        .unwrap_or(StrategyTag::good_closed(criterion));

    let outcomes: Vec<PathOutcome> = (0..config.paths)
        .into_par_iter()
        .map(|i| -> Result<PathOutcome> {
            let realized = sampler(i)?;
            realized.check_grid(expected)?;
            let mut out = PathOutcome {
                costs: Vec::new(),
                terminal: Vec::new(),
                xi: Vec::new(),
                c_sample: Vec::new(),
                audits: Vec::new(),
                panel: None,
            };
            let mut panel_plan = None;
            for tag in &config.strategies {
                let plan = build_plan(tag, criterion, &params, &realized, expected)?;
                out.costs.push(cost_j(criterion, &params, &realized, &plan)?);
                let good = tag.criterion();
                out.xi.push(match good {
                    Some(_) => Some(plan.terminal_xi(&params, &realized)?),
                    None => None,
                });
                out.c_sample.push(match good {
                    Some(Criterion::TimeWeighted) => Some(time_weighted_c_sample(&params, &realized)?),
                    _ => None,
                });
                out.audits.push(match good {
                    Some(own) if config.audit_perturbations > 0 => {
                        let options = AuditOptions::new(
                            &params,
                            config.audit_perturbations,
                            path_seed(config.seed ^ AUDIT_STREAM, i as u64),
                        );
                        let report = audit_good_inequality(own, &params, &realized, &plan, &options)?;
                        Some(AuditSummary {
                            sampled: report.sampled,
                            members: report.members,
                            violations: report.violations,
                            worst_margin: report.worst_margin,
                        })
                    }
                    _ => None,
                });
                out.terminal.push(plan.terminal_inventory());
                if config.dump_trajectories && tag == &panel_tag {
                    panel_plan = Some(plan);
                }
            }
            if config.dump_trajectories {
                let good = match panel_plan {
                    Some(plan) => plan,
                    None => build_plan(&panel_tag, criterion, &params, &realized, expected)?,
                };
                let hindsight = aposteriori_optimal(criterion, &params, &realized)?;
                out.panel = Some(TrajectoryPanel {
                    path_index: i,
                    times: grid.times().to_vec(),
                    price: realized.values().to_vec(),
                    expected_price: expected.values().to_vec(),
                    q_static: static_plan.inventory.values().to_vec(),
                    q_good: good.inventory.values().to_vec(),
                    q_aposteriori: hindsight.inventory.values().to_vec(),
                    rate_good: good.rate.values().to_vec(),
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut strategies = Vec::with_capacity(config.strategies.len());
    for (k, tag) in config.strategies.iter().enumerate() {
        let costs: Vec<f64> = outcomes.iter().map(|o| o.costs[k]).collect();
        let terminal: Vec<f64> = outcomes.iter().map(|o| o.terminal[k]).collect();
        let own = tag.criterion();
        let bound = match own {
            Some(Criterion::Quadratic) => Some(quadratic_variance_bound(&params, variance)?),
            Some(Criterion::ValueAtRisk) => Some(var_variance_bound(&params, variance)?),
            _ => None,
        };
        let certificate = match own {
            None => None,
            Some(c) => {
                let xi: Vec<f64> = outcomes.iter().filter_map(|o| o.xi[k]).collect();
                let expected_c = match c {
                    Criterion::Quadratic => certificate_quadratic(&params, expected, expected, variance)?.c,
                    Criterion::TimeWeighted => {
                        let samples: Vec<f64> = outcomes.iter().filter_map(|o| o.c_sample[k]).collect();
                        l2_certificate(&samples)?
                    }
                    Criterion::ValueAtRisk => f64::INFINITY,
                };
                Some(CertificateSummary {
                    c: expected_c.is_finite().then_some(expected_c),
                    xi: SampleStats::new(&xi),
                    xi_min: xi.iter().copied().fold(f64::INFINITY, f64::min),
                    xi_max: xi.iter().copied().fold(0.0, f64::max),
                })
            }
        };
        let audits: Vec<AuditSummary> = outcomes.iter().filter_map(|o| o.audits[k]).collect();
        let audit = (!audits.is_empty()).then(|| AuditSummary {
            sampled: audits.iter().map(|a| a.sampled).sum(),
            members: audits.iter().map(|a| a.members).sum(),
            violations: audits.iter().map(|a| a.violations).sum(),
            worst_margin: audits.iter().map(|a| a.worst_margin).fold(f64::INFINITY, f64::min),
        });
        strategies.push(StrategySummary {
            tag: tag.clone(),
            cost: SampleStats::new(&costs),
            liquidation: terminal_liquidation_stats(&terminal, params.target_inventory, bound),
            certificate,
            audit,
        });
    }

    Ok(RunArtifact {
        model: config.model.name().to_string(),
        criterion,
        seed: config.seed,
        grid: config.grid,
        paths: config.paths,
        strategies,
        panel_strategy: config.dump_trajectories.then_some(panel_tag),
        trajectories: outcomes.into_iter().filter_map(|o| o.panel).collect(),
    })
}
