//! Alternative choices of the terminal adjustment of the quadratic good
//! execution.
//!
//! Inventory is `q_t = base_t + K s(t)` with `s(t) = sinh(k t)` (or `t` when
//! the risk ratio vanishes). The default `K` makes `E[q_T]` hit the target;
//! the window rules instead target the inventory over `[start, T]`.

use super::quadratic::{closed_form_with_coefficient, cosh_sinh_convolutions};
use super::{ExecutionPlan, Hyperbolic, MarketParams, StrategyTag};
use crate::error::{domain, Result};
use crate::pathcalc::{trapezoid_values, SampledPath};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalRule {
    /// `E[q_T]` equals the target.
    Unbiased,
    /// Minimizes the time average of `E[(q_t - target)^2]` over `[start, T]`.
    MeanSquareWindow { start: f64 },
    /// Makes the time average of `E[q_t]` over `[start, T]` equal the target.
    WindowAverage { start: f64 },
}

/// Coefficient `K` of `s(t)` selected by `rule`.
pub fn alt_terminal_k(params: &MarketParams, expected: &SampledPath, rule: TerminalRule) -> Result<f64> {
    params.check_paths(&[expected])?;
    let k = params.risk_ratio();
    let hyp = Hyperbolic::new(k, params.horizon);
    let scale = params.two_impact_sq();
    let (c, _) = cosh_sinh_convolutions(expected, k);
    let n = c.len() - 1;
    let start = match rule {
        TerminalRule::Unbiased => return Ok(c[n] / scale / hyp.shape(params.horizon)),
        TerminalRule::MeanSquareWindow { start } | TerminalRule::WindowAverage { start } => start,
    };
    if !(start >= 0.0) || start >= params.horizon {
        return domain(format!("window start {start} must lie in [0, {})", params.horizon));
    }
    let grid = expected.grid();
    let first = grid.floor_index(start);
    if first >= n {
        return domain(format!("window starting at {start} contains a single grid point"));
    }
    let times = &grid.times()[first..];
    let gap = params.initial_inventory - params.target_inventory;
    // Expected distance of the unadjusted trajectory below the target.
    let shortfall: Vec<f64> = times
        .iter()
        .zip(&c[first..])
        .map(|(&t, &ct)| ct / scale - (1.0 - hyp.blend(t)) * gap)
        .collect();
    let shape: Vec<f64> = times.iter().map(|&t| hyp.shape(t)).collect();
    match rule {
        TerminalRule::MeanSquareWindow { .. } => {
            let num: Vec<f64> = shape.iter().zip(&shortfall).map(|(a, b)| a * b).collect();
            let den: Vec<f64> = shape.iter().map(|a| a * a).collect();
            Ok(trapezoid_values(times, &num) / trapezoid_values(times, &den))
        }
        _ => Ok(trapezoid_values(times, &shortfall) / trapezoid_values(times, &shape)),
    }
}

/// Quadratic good execution with the terminal adjustment chosen by `rule`.
pub fn good_exec_quadratic_with_rule(
    params: &MarketParams,
    realized: &SampledPath,
    expected: &SampledPath,
    rule: TerminalRule,
) -> Result<ExecutionPlan> {
    params.check_paths(&[realized, expected])?;
    let k_coef = alt_terminal_k(params, expected, rule)?;
    let hyp = Hyperbolic::new(params.risk_ratio(), params.horizon);
    closed_form_with_coefficient(
        params,
        realized,
        k_coef * hyp.shape(params.horizon),
        StrategyTag::GoodQuadraticClosed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathcalc::TimeGrid;

    #[test]
    fn zero_price_and_inventory_give_zero() {
        let p = MarketParams::new(1.0, 2.0, 0.0, 1.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 20).unwrap();
        let e = SampledPath::constant(&grid, 0.0).unwrap();
        for rule in [
            TerminalRule::Unbiased,
            TerminalRule::MeanSquareWindow { start: 0.5 },
            TerminalRule::WindowAverage { start: 0.0 },
        ] {
            assert_eq!(alt_terminal_k(&p, &e, rule).unwrap(), 0.0);
        }
    }

    #[test]
    fn window_must_start_before_horizon() {
        let p = MarketParams::new(1.0, 2.0, 10.0, 1.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 20).unwrap();
        let e = SampledPath::constant(&grid, 3.0).unwrap();
        assert!(alt_terminal_k(&p, &e, TerminalRule::WindowAverage { start: 1.0 }).is_err());
        assert!(alt_terminal_k(&p, &e, TerminalRule::MeanSquareWindow { start: -0.1 }).is_err());
    }
}
