//! Trading trajectories for the three risk criteria.
//!
//! Each criterion has a closed-form construction and an initial-value
//! construction that steps the Euler-Lagrange system forward from a fitted
//! initial rate. Both are adapted to the realized price path and unbiased in
//! terminal inventory.

mod airy;
mod hyperbolic;
mod quadratic;
mod terminal;
mod time_weighted;
mod value_at_risk;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::pathcalc::SampledPath;

pub use airy::{airy_pair, AiryTable, AiryValues};
pub(crate) use hyperbolic::Hyperbolic;
pub(crate) use quadratic::closed_form_with_coefficient;
pub use quadratic::{
    certificate_quadratic, good_exec_quadratic_closed, good_exec_quadratic_ivp, quadratic_from_initial_rate,
};
pub use terminal::{alt_terminal_k, good_exec_quadratic_with_rule, TerminalRule};
pub use time_weighted::{good_exec_time_closed, good_exec_time_ivp, time_weighted_c_sample};
pub use value_at_risk::{certificate_var, good_exec_var_closed, good_exec_var_ivp};

/// Cost and inventory parameters shared by every strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Temporary impact coefficient; the running cost includes `impact^2 r^2`.
    pub impact: f64,
    /// Inventory risk coefficient.
    pub risk: f64,
    /// Terminal inventory penalty, used only by the penalized baseline.
    pub terminal_penalty: f64,
    pub initial_inventory: f64,
    pub target_inventory: f64,
    pub horizon: f64,
}

impl MarketParams {
    pub fn new(impact: f64, risk: f64, initial_inventory: f64, horizon: f64) -> Result<MarketParams> {
        let p = MarketParams {
            impact,
            risk,
            terminal_penalty: 0.0,
            initial_inventory,
            target_inventory: 0.0,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_target(mut self, target: f64) -> Result<MarketParams> {
        self.target_inventory = target;
        self.validate()?;
        Ok(self)
    }

    pub fn with_terminal_penalty(mut self, penalty: f64) -> Result<MarketParams> {
        self.terminal_penalty = penalty;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.impact > 0.0) || !self.impact.is_finite() {
            return domain(format!("impact coefficient must be positive, got {}", self.impact));
        }
        if !(self.risk >= 0.0) || !self.risk.is_finite() {
            return domain(format!("risk coefficient must be non-negative, got {}", self.risk));
        }
        if !(self.terminal_penalty >= 0.0) || !self.terminal_penalty.is_finite() {
            return domain(format!(
                "terminal penalty must be non-negative, got {}",
                self.terminal_penalty
            ));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return domain(format!("horizon must be positive, got {}", self.horizon));
        }
        if !self.initial_inventory.is_finite() || !self.target_inventory.is_finite() {
            return domain("inventories must be finite");
        }
        Ok(())
    }

    /// `risk / impact`, the rate of the hyperbolic solutions.
    pub fn risk_ratio(&self) -> f64 {
        self.risk / self.impact
    }

    /// `terminal_penalty / impact`.
    pub fn penalty_ratio(&self) -> f64 {
        self.terminal_penalty / self.impact
    }

    /// `2 impact^2`, the factor in front of the price terms.
    pub(crate) fn two_impact_sq(&self) -> f64 {
        2.0 * self.impact * self.impact
    }

    pub(crate) fn check_paths(&self, paths: &[&SampledPath]) -> Result<()> {
        self.validate()?;
        let first = paths[0];
        for p in &paths[1..] {
            first.check_grid(p)?;
        }
        let horizon = first.grid().horizon();
        if (horizon - self.horizon).abs() > 1e-9 * self.horizon {
            return domain(format!("grid ends at {horizon} but the horizon is {}", self.horizon));
        }
        Ok(())
    }
}

/// Running cost `F(t, S, q, r) = r S + impact^2 r^2 + risk term`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Risk term `risk^2 (q - target)^2`.
    Quadratic,
    /// Risk term `risk^2 t q^2`.
    TimeWeighted,
    /// Risk term `risk^2 q S`.
    ValueAtRisk,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Quadratic, Criterion::TimeWeighted, Criterion::ValueAtRisk];

    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::Quadratic => "quadratic",
            Criterion::TimeWeighted => "time-weighted",
            Criterion::ValueAtRisk => "value-at-risk",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Criterion> {
        match s {
            "quadratic" => Ok(Criterion::Quadratic),
            "time-weighted" | "time" => Ok(Criterion::TimeWeighted),
            "value-at-risk" | "var" => Ok(Criterion::ValueAtRisk),
            _ => domain(format!("unknown criterion '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StrategyTag {
    GoodQuadraticClosed,
    GoodQuadraticIvp,
    GoodTimeClosed,
    GoodTimeIvp,
    GoodVarClosed,
    GoodVarIvp,
    Static,
    APosteriori,
    TerminalPenalty,
    Twap,
    Other(String),
}

impl StrategyTag {
    pub fn as_str(&self) -> &str {
        match self {
            StrategyTag::GoodQuadraticClosed => "good-quadratic-closed",
            StrategyTag::GoodQuadraticIvp => "good-quadratic-ivp",
            StrategyTag::GoodTimeClosed => "good-time-closed",
            StrategyTag::GoodTimeIvp => "good-time-ivp",
            StrategyTag::GoodVarClosed => "good-var-closed",
            StrategyTag::GoodVarIvp => "good-var-ivp",
            StrategyTag::Static => "static",
            StrategyTag::APosteriori => "aposteriori",
            StrategyTag::TerminalPenalty => "terminal-penalty",
            StrategyTag::Twap => "twap",
            StrategyTag::Other(name) => name,
        }
    }

    /// Closed-form good execution for a criterion.
    pub fn good_closed(criterion: Criterion) -> StrategyTag {
        match criterion {
            Criterion::Quadratic => StrategyTag::GoodQuadraticClosed,
            Criterion::TimeWeighted => StrategyTag::GoodTimeClosed,
            Criterion::ValueAtRisk => StrategyTag::GoodVarClosed,
        }
    }

    pub fn good_ivp(criterion: Criterion) -> StrategyTag {
        match criterion {
            Criterion::Quadratic => StrategyTag::GoodQuadraticIvp,
            Criterion::TimeWeighted => StrategyTag::GoodTimeIvp,
            Criterion::ValueAtRisk => StrategyTag::GoodVarIvp,
        }
    }

    /// Criterion a good execution was built for.
    pub fn criterion(&self) -> Option<Criterion> {
        match self {
            StrategyTag::GoodQuadraticClosed | StrategyTag::GoodQuadraticIvp => Some(Criterion::Quadratic),
            StrategyTag::GoodTimeClosed | StrategyTag::GoodTimeIvp => Some(Criterion::TimeWeighted),
            StrategyTag::GoodVarClosed | StrategyTag::GoodVarIvp => Some(Criterion::ValueAtRisk),
            _ => None,
        }
    }
}

impl fmt::Display for StrategyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<StrategyTag> {
        let tag = match s {
            "good-quadratic-closed" => StrategyTag::GoodQuadraticClosed,
            "good-quadratic-ivp" => StrategyTag::GoodQuadraticIvp,
            "good-time-closed" => StrategyTag::GoodTimeClosed,
            "good-time-ivp" => StrategyTag::GoodTimeIvp,
            "good-var-closed" => StrategyTag::GoodVarClosed,
            "good-var-ivp" => StrategyTag::GoodVarIvp,
            "static" => StrategyTag::Static,
            "aposteriori" => StrategyTag::APosteriori,
            "terminal-penalty" => StrategyTag::TerminalPenalty,
            "twap" => StrategyTag::Twap,
            _ => return domain(format!("unknown strategy '{s}'")),
        };
        Ok(tag)
    }
}

impl From<StrategyTag> for String {
    fn from(tag: StrategyTag) -> String {
        tag.as_str().to_string()
    }
}

impl TryFrom<String> for StrategyTag {
    type Error = Error;

    fn try_from(s: String) -> Result<StrategyTag> {
        s.parse()
    }
}

/// Bounds attached to a good execution.
///
/// `c` bounds the expected improvement any competitor can achieve; `xi`
/// bounds the pathwise improvement for the realized path. Either can be
/// infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub c: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionPlan {
    pub tag: StrategyTag,
    pub criterion: Option<Criterion>,
    pub inventory: SampledPath,
    pub rate: SampledPath,
    /// `inventory` hits the target on every path, not only on average.
    pub fuel_constrained: bool,
    /// Uses price information from after the time it is evaluated at.
    pub anticipative: bool,
    pub certificate: Option<Certificate>,
}

impl ExecutionPlan {
    pub fn new(tag: StrategyTag, inventory: SampledPath, rate: SampledPath) -> Result<ExecutionPlan> {
        inventory.check_grid(&rate)?;
        Ok(ExecutionPlan {
            criterion: tag.criterion(),
            tag,
            inventory,
            rate,
            fuel_constrained: false,
            anticipative: false,
            certificate: None,
        })
    }

    /// Plan whose rate is the central difference of its inventory.
    pub fn from_inventory(tag: StrategyTag, inventory: SampledPath) -> Result<ExecutionPlan> {
        let rate = finite_difference_rate(&inventory);
        ExecutionPlan::new(tag, inventory, rate)
    }

    pub fn terminal_inventory(&self) -> f64 {
        self.inventory.last()
    }

    pub fn initial_rate(&self) -> f64 {
        self.rate.first()
    }

    /// Pathwise certificate `1 / |S_T + 2 impact^2 r_T|` from the plan's own
    /// terminal rate.
    pub fn terminal_xi(&self, params: &MarketParams, realized: &SampledPath) -> Result<f64> {
        self.inventory.check_grid(realized)?;
        let f_end = realized.last() + params.two_impact_sq() * self.rate.last();
        Ok(1.0 / f_end.abs())
    }
}

/// Central differences inside the grid, one-sided at the ends.
pub fn finite_difference_rate(path: &SampledPath) -> SampledPath {
    let t = path.times();
    let v = path.values();
    let n = v.len();
    let rate: Vec<f64> = (0..n)
        .map(|k| {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            (v[b] - v[a]) / (t[b] - t[a])
        })
        .collect();
    SampledPath::new(path.grid().clone(), rate).expect("finite differences of a finite path")
}

/// `1 / sqrt(mean(v^2))`: the certificate from Monte Carlo samples of the
/// terminal first-order term. Infinite when every sample is zero.
pub fn l2_certificate(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return domain("no samples for the certificate");
    }
    let ms = samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64;
    Ok(1.0 / ms.sqrt())
}
