//! Flat `key = value` scenario configuration.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Unknown keys and repeated keys are errors. Recognized keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `model` | `brownian`, `exponential`, `bridge` or `ou-jump` | `bridge` |
//! | `s0` | initial price (`brownian`, `exponential`, `bridge`) | 103.893 for `bridge`, else 100 |
//! | `sigma` | price volatility; OU volatility for `ou-jump` | bridge 1.1642, brownian 1, exponential 0.2, ou-jump 0.02 |
//! | `face_value`, `maturity` | bridge end point and its time | 100, 1 |
//! | `target_level`, `target_drift` | log reversion target `level + drift t` (`ou-jump`) | ln 100, 0 |
//! | `alpha`, `lambda` | mean reversion speed and jump intensity (`ou-jump`) | 5, 10 |
//! | `mark_size`, `marks` | jump size and law `two-point` or `normal` (`ou-jump`) | 0.01, `two-point` |
//! | `initial_deviation` | initial log deviation from the target (`ou-jump`) | 0 |
//! | `variance_paths` | Monte Carlo paths for the `ou-jump` price variance | 2000 |
//! | `impact`, `risk`, `terminal_penalty` | cost coefficients | 0.05855, 0.07341, 0 |
//! | `initial_inventory`, `target_inventory` | boundary inventories | 1000, 0 |
//! | `horizon` | liquidation horizon | 1 |
//! | `criterion` | `quadratic`, `time-weighted` or `value-at-risk` | `quadratic` |
//! | `grid` | number of grid intervals | 1024 |
//! | `paths` | number of simulated paths | 1 |
//! | `seed` | base seed | 0 |
//! | `strategies` | comma-separated strategy tags | good-quadratic-closed, good-quadratic-ivp, static, aposteriori |
//! | `out` | output directory | `out` |
//! | `dump_trajectories` | write one CSV per path | false |
//! | `audit_perturbations` | perturbations per path for the pathwise audit, 0 to skip | 0 |

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use goodexec::pricemodels::{MarkDistribution, OuJumpParams, PriceModel, TimeFn};
use goodexec::strategies::{Criterion, MarketParams, StrategyTag};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Brownian {
        s0: f64,
        sigma: f64,
    },
    Exponential {
        s0: f64,
        sigma: f64,
    },
    Bridge {
        s0: f64,
        face_value: f64,
        sigma: f64,
        maturity: f64,
    },
    OuJump {
        target_level: f64,
        target_drift: f64,
        alpha: f64,
        sigma: f64,
        lambda: f64,
        mark_size: f64,
        normal_marks: bool,
        initial_deviation: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<PriceModel> {
        let model = match *self {
            ModelSpec::Brownian { s0, sigma } => PriceModel::ArithmeticBrownian { s0, sigma },
            ModelSpec::Exponential { s0, sigma } => PriceModel::ExponentialMartingale { s0, sigma },
            ModelSpec::Bridge {
                s0,
                face_value,
                sigma,
                maturity,
            } => PriceModel::BrownianBridge {
                s0,
                face_value,
                sigma,
                maturity,
            },
            ModelSpec::OuJump {
                target_level,
                target_drift,
                alpha,
                sigma,
                lambda,
                mark_size,
                normal_marks,
                initial_deviation,
            } => PriceModel::OuJump(OuJumpParams {
                target: TimeFn::new(move |t| target_level + target_drift * t),
                alpha,
                sigma,
                lambda,
                marks: if normal_marks {
                    MarkDistribution::Normal { std: mark_size }
                } else {
                    MarkDistribution::TwoPoint { size: mark_size }
                },
                initial_deviation,
            }),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Brownian { .. } => "brownian",
            ModelSpec::Exponential { .. } => "exponential",
            ModelSpec::Bridge { .. } => "bridge",
            ModelSpec::OuJump { .. } => "ou-jump",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub model: ModelSpec,
    pub params: MarketParams,
    pub criterion: Criterion,
    /// Number of grid intervals.
    pub grid: usize,
    pub paths: usize,
    pub seed: u64,
    pub strategies: Vec<StrategyTag>,
    pub out: PathBuf,
    pub dump_trajectories: bool,
    pub audit_perturbations: usize,
    pub variance_paths: usize,
}

impl Default for ScenarioConfig {
    /// Bridge scenario: 1000 shares, price pulled from 103.893 to a face value of 100.
    fn default() -> ScenarioConfig {
        ScenarioConfig::parse("").expect("defaults are valid")
    }
}

const KEYS: &[&str] = &[
    "model",
    "s0",
    "sigma",
    "face_value",
    "maturity",
    "target_level",
    "target_drift",
    "alpha",
    "lambda",
    "mark_size",
    "marks",
    "initial_deviation",
    "variance_paths",
    "impact",
    "risk",
    "terminal_penalty",
    "initial_inventory",
    "target_inventory",
    "horizon",
    "criterion",
    "grid",
    "paths",
    "seed",
    "strategies",
    "out",
    "dump_trajectories",
    "audit_perturbations",
];

struct Entries {
    values: HashMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.values.get(key)
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some((line, text)) => text.parse().map_err(|_| HarnessError::Config {
                line: *line,
                message: format!("cannot parse '{text}' for {key}"),
            }),
        }
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        ScenarioConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ScenarioConfig> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(HarnessError::Config {
                    line,
                    message: format!("expected key = value, got '{content}'"),
                });
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(HarnessError::Config {
                    line,
                    message: format!("unknown key '{key}'"),
                });
            }
            if values
                .insert(key.to_string(), (line, value.trim().to_string()))
                .is_some()
            {
                return Err(HarnessError::Config {
                    line,
                    message: format!("'{key}' set twice"),
                });
            }
        }
        let e = Entries { values };

        let model_name: String = e.get("model", "bridge".to_string())?;
        let model = match model_name.as_str() {
            "brownian" => ModelSpec::Brownian {
                s0: e.get("s0", 100.0)?,
                sigma: e.get("sigma", 1.0)?,
            },
            "exponential" => ModelSpec::Exponential {
                s0: e.get("s0", 100.0)?,
                sigma: e.get("sigma", 0.2)?,
            },
            "bridge" => ModelSpec::Bridge {
                s0: e.get("s0", 103.893)?,
                face_value: e.get("face_value", 100.0)?,
                sigma: e.get("sigma", 1.1642)?,
                maturity: e.get("maturity", 1.0)?,
            },
            "ou-jump" => {
                let marks: String = e.get("marks", "two-point".to_string())?;
                let normal_marks = match marks.as_str() {
                    "two-point" => false,
                    "normal" => true,
                    other => {
                        let line = e.raw("marks").map_or(0, |r| r.0);
                        return Err(HarnessError::Config {
                            line,
                            message: format!("unknown mark law '{other}'"),
                        });
                    }
                };
                ModelSpec::OuJump {
                    target_level: e.get("target_level", 100f64.ln())?,
                    target_drift: e.get("target_drift", 0.0)?,
                    alpha: e.get("alpha", 5.0)?,
                    sigma: e.get("sigma", 0.02)?,
                    lambda: e.get("lambda", 10.0)?,
                    mark_size: e.get("mark_size", 0.01)?,
                    normal_marks,
                    initial_deviation: e.get("initial_deviation", 0.0)?,
                }
            }
            other => {
                let line = e.raw("model").map_or(0, |r| r.0);
                return Err(HarnessError::Config {
                    line,
                    message: format!("unknown model '{other}'"),
                });
            }
        };

        let params = MarketParams::new(
            e.get("impact", 0.058_55)?,
            e.get("risk", 0.073_41)?,
            e.get("initial_inventory", 1000.0)?,
            e.get("horizon", 1.0)?,
        )?
        .with_target(e.get("target_inventory", 0.0)?)?
        .with_terminal_penalty(e.get("terminal_penalty", 0.0)?)?;

        let criterion = match e.raw("criterion") {
            None => Criterion::Quadratic,
            Some((line, text)) => text.parse().map_err(|_| HarnessError::Config {
                line: *line,
                message: format!("unknown criterion '{text}'"),
            })?,
        };
        let strategies = match e.raw("strategies") {
            None => vec![
                StrategyTag::GoodQuadraticClosed,
                StrategyTag::GoodQuadraticIvp,
                StrategyTag::Static,
                StrategyTag::APosteriori,
            ],
            Some((line, text)) => {
                parse_strategies(text).map_err(|message| HarnessError::Config { line: *line, message })?
            }
        };

        let config = ScenarioConfig {
            model,
            params,
            criterion,
            grid: e.get("grid", 1024)?,
            paths: e.get("paths", 1)?,
            seed: e.get("seed", 0)?,
            strategies,
            out: PathBuf::from(e.get("out", "out".to_string())?),
            dump_trajectories: e.get("dump_trajectories", false)?,
            audit_perturbations: e.get("audit_perturbations", 0)?,
            variance_paths: e.get("variance_paths", 2000)?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths < 1 {
            return Err(HarnessError::Invalid("path count must be at least 1".into()));
        }
        if self.grid < 2 {
            return Err(HarnessError::Invalid("grid needs at least 2 intervals".into()));
        }
        if self.strategies.is_empty() {
            return Err(HarnessError::Invalid("no strategies listed".into()));
        }
        if let Some(tag) = self.strategies.iter().find(|t| matches!(t, StrategyTag::Other(_))) {
            return Err(HarnessError::Invalid(format!("unknown strategy '{}'", tag.as_str())));
        }
        if self.strategies.contains(&StrategyTag::TerminalPenalty) && self.params.terminal_penalty == 0.0 {
            return Err(HarnessError::Invalid(
                "terminal-penalty needs a positive terminal_penalty".into(),
            ));
        }
        self.params.validate()?;
        self.model.build()?;
        Ok(())
    }
}

/// Comma-separated strategy tags, without duplicates.
pub fn parse_strategies(text: &str) -> std::result::Result<Vec<StrategyTag>, String> {
    let mut tags: Vec<StrategyTag> = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let tag: StrategyTag = part.parse().map_err(|e: goodexec::Error| e.to_string())?;
        if tags.contains(&tag) {
            return Err(format!("strategy '{part}' listed twice"));
        }
        tags.push(tag);
    }
    Ok(tags)
}
