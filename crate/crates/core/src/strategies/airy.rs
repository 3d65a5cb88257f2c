//! Airy functions `Ai`, `Bi` and their derivatives on `[0, max_arg]`,
//! integrated from their values at zero with classical Runge-Kutta.

use crate::error::{domain, Result};

// 3^(-2/3) / Gamma(2/3), -3^(-1/3) / Gamma(1/3), 3^(-1/6) / Gamma(2/3), 3^(1/6) / Gamma(1/3).
const AI0: f64 = 0.355_028_053_887_817_24;
const AI1: f64 = -0.258_819_403_792_806_8;
const BI0: f64 = 0.614_926_627_446_000_7;
const BI1: f64 = 0.448_288_357_353_826_36;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

impl AiryValues {
    /// `Ai Bi' - Ai' Bi`, equal to `1 / pi`.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Tabulated solution of `u'' = x u`; values between nodes come from one
/// more Runge-Kutta step from the node below.
#[derive(Debug, Clone)]
pub struct AiryTable {
    step: f64,
    max_arg: f64,
    nodes: Vec<[f64; 4]>,
}

/// Builds the table on `[0, max_arg]`. Smaller `tolerance` means finer steps.
pub fn airy_pair(tolerance: f64, max_arg: f64) -> Result<AiryTable> {
    if !(tolerance > 0.0 && tolerance <= 1e-4) {
        return domain(format!("airy tolerance must lie in (0, 1e-4], got {tolerance}"));
    }
    if !(max_arg >= 0.0) || !max_arg.is_finite() {
        return domain(format!("airy range must be finite and non-negative, got {max_arg}"));
    }
    let target_step = (tolerance * 1e-8).powf(0.25).clamp(1e-4, 1e-2);
    let steps = ((max_arg / target_step).ceil() as usize).max(1);
    let step = max_arg / steps as f64;
    let mut nodes = Vec::with_capacity(steps + 1);
    let mut y = [AI0, AI1, BI0, BI1];
    nodes.push(y);
    for i in 0..steps {
        y = rk4(y, i as f64 * step, step);
        nodes.push(y);
    }
    Ok(AiryTable { step, max_arg, nodes })
}

fn deriv(x: f64, y: [f64; 4]) -> [f64; 4] {
    [y[1], x * y[0], y[3], x * y[2]]
}

fn rk4(y: [f64; 4], x: f64, h: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], w: f64| -> [f64; 4] {
        [a[0] + w * b[0], a[1] + w * b[1], a[2] + w * b[2], a[3] + w * b[3]]
    };
    let k1 = deriv(x, y);
    let k2 = deriv(x + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = deriv(x + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = deriv(x + h, add(y, k3, h));
    let mut out = y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

impl AiryTable {
    pub fn max_arg(&self) -> f64 {
        self.max_arg
    }

    pub fn eval(&self, x: f64) -> Result<AiryValues> {
        if !(x >= 0.0) || x > self.max_arg * (1.0 + 1e-12) + 1e-300 {
            return domain(format!("airy argument {x} outside [0, {}]", self.max_arg));
        }
        let y = if self.step == 0.0 {
            self.nodes[0]
        } else {
            let i = ((x / self.step).floor() as usize).min(self.nodes.len() - 1);
            let x_node = i as f64 * self.step;
            let h = x - x_node;
            if h == 0.0 {
                self.nodes[i]
            } else {
                rk4(self.nodes[i], x_node, h)
            }
        };
        Ok(AiryValues {
            ai: y[0],
            ai_prime: y[1],
            bi: y[2],
            bi_prime: y[3],
        })
    }
}
