//! Price path models: sampling, expected paths and pointwise variances.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::pathcalc::{SampledPath, TimeGrid};
use crate::rng::{path_seed, substream};

const DIFFUSION_STREAM: u64 = 0;
const JUMP_STREAM: u64 = 1;

/// A deterministic function of time.
#[derive(Clone)]
pub struct TimeFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl TimeFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> TimeFn {
        TimeFn(Arc::new(f))
    }

    pub fn constant(c: f64) -> TimeFn {
        TimeFn::new(move |_| c)
    }

    /// Piecewise-linear interpolation of a sampled path.
    pub fn interpolate(path: &SampledPath) -> TimeFn {
        let path = path.clone();
        TimeFn::new(move |t| path.linear(t))
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

impl fmt::Debug for TimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TimeFn")
    }
}

/// Distribution of log-price jump sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarkDistribution {
    /// `+size` or `-size` with equal probability.
    TwoPoint { size: f64 },
    /// Centred normal.
    Normal { std: f64 },
}

impl MarkDistribution {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            MarkDistribution::TwoPoint { size } => {
                if rng.random::<bool>() {
                    size
                } else {
                    -size
                }
            }
            MarkDistribution::Normal { std } => std * rng.sample::<f64, _>(StandardNormal),
        }
    }
}

/// `log S_t = target(t) + Y_t + N_t` with `Y` mean-reverting to zero and `N`
/// a compound Poisson process.
#[derive(Debug, Clone)]
pub struct OuJumpParams {
    pub target: TimeFn,
    pub alpha: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub marks: MarkDistribution,
    pub initial_deviation: f64,
}

#[derive(Debug, Clone)]
pub enum PriceModel {
    /// `S_t = s0 + sigma W_t`.
    ArithmeticBrownian {
        s0: f64,
        sigma: f64,
    },
    /// `S_t = s0 exp(sigma W_t - sigma^2 t / 2)`.
    ExponentialMartingale {
        s0: f64,
        sigma: f64,
    },
    OuJump(OuJumpParams),
    /// Brownian motion pinned to `face_value` at `maturity`.
    BrownianBridge {
        s0: f64,
        face_value: f64,
        sigma: f64,
        maturity: f64,
    },
    Deterministic(TimeFn),
}

/// A jump realized by the sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    /// First grid index whose value includes the jump.
    pub index: usize,
    pub time: f64,
    pub mark: f64,
}

impl PriceModel {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                domain(format!("{name} must be finite and non-negative, got {v}"))
            }
        };
        match self {
            PriceModel::ArithmeticBrownian { s0, sigma } => {
                if !s0.is_finite() {
                    return domain("initial price must be finite");
                }
                finite_nonneg("sigma", *sigma)
            }
            PriceModel::ExponentialMartingale { s0, sigma } => {
                if !(*s0 > 0.0) || !s0.is_finite() {
                    return domain(format!("initial price must be positive, got {s0}"));
                }
                finite_nonneg("sigma", *sigma)
            }
            PriceModel::OuJump(p) => {
                if !(p.alpha > 0.0) || !p.alpha.is_finite() {
                    return domain(format!("mean-reversion speed must be positive, got {}", p.alpha));
                }
                finite_nonneg("sigma", p.sigma)?;
                finite_nonneg("jump intensity", p.lambda)?;
                match p.marks {
                    MarkDistribution::TwoPoint { size } => finite_nonneg("jump size", size)?,
                    MarkDistribution::Normal { std } => finite_nonneg("jump std", std)?,
                }
                if !p.initial_deviation.is_finite() {
                    return domain("initial deviation must be finite");
                }
                Ok(())
            }
            PriceModel::BrownianBridge {
                s0,
                face_value,
                sigma,
                maturity,
            } => {
                if !s0.is_finite() || !face_value.is_finite() {
                    return domain("bridge end points must be finite");
                }
                if !(*maturity > 0.0) || !maturity.is_finite() {
                    return domain(format!("bridge maturity must be positive, got {maturity}"));
                }
                finite_nonneg("sigma", *sigma)
            }
            PriceModel::Deterministic(_) => Ok(()),
        }
    }

    fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        self.validate()?;
        if let PriceModel::BrownianBridge { maturity, .. } = self {
            if grid.horizon() > *maturity * (1.0 + 1e-12) {
                return domain(format!(
                    "grid horizon {} exceeds bridge maturity {maturity}",
                    grid.horizon()
                ));
            }
        }
        Ok(())
    }

    /// Price at time zero.
    pub fn initial_price(&self) -> f64 {
        match self {
            PriceModel::ArithmeticBrownian { s0, .. }
            | PriceModel::ExponentialMartingale { s0, .. }
            | PriceModel::BrownianBridge { s0, .. } => *s0,
            PriceModel::OuJump(p) => (p.target.eval(0.0) + p.initial_deviation).exp(),
            PriceModel::Deterministic(f) => f.eval(0.0),
        }
    }
}

/// One sampled price path.
pub fn sample_path(model: &PriceModel, grid: &Arc<TimeGrid>, seed: u64) -> Result<SampledPath> {
    Ok(sample_path_with_jumps(model, grid, seed)?.0)
}

/// One sampled price path together with the jumps it contains.
///
/// Diffusion and jump randomness come from separate sub-streams of `seed`,
/// so switching jumps on or off leaves the diffusive part unchanged.
pub fn sample_path_with_jumps(
    model: &PriceModel,
    grid: &Arc<TimeGrid>,
    seed: u64,
) -> Result<(SampledPath, Vec<JumpEvent>)> {
    model.check_grid(grid)?;
    let times = grid.times();
    let n = times.len();
    let mut rng = substream(seed, DIFFUSION_STREAM);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let mut jumps = Vec::new();
    let values = match model {
        PriceModel::ArithmeticBrownian { s0, sigma } => {
            let mut v = Vec::with_capacity(n);
            let mut s = *s0;
            v.push(s);
            for k in 1..n {
                s += sigma * (times[k] - times[k - 1]).sqrt() * normal();
                v.push(s);
            }
            v
        }
        PriceModel::ExponentialMartingale { s0, sigma } => {
            let mut v = Vec::with_capacity(n);
            let mut w = 0.0;
            v.push(*s0);
            for k in 1..n {
                w += (times[k] - times[k - 1]).sqrt() * normal();
                v.push(s0 * (sigma * w - 0.5 * sigma * sigma * times[k]).exp());
            }
            v
        }
        PriceModel::OuJump(p) => {
            jumps = sample_jumps(p, grid, seed);
            let mut v = Vec::with_capacity(n);
            let mut y = p.initial_deviation;
            let mut level = 0.0;
            let mut next = 0;
            v.push((p.target.eval(0.0) + y).exp());
            for k in 1..n {
                let dt = times[k] - times[k - 1];
                let rho = (-p.alpha * dt).exp();
                let sd = p.sigma * (-(-2.0 * p.alpha * dt).exp_m1() / (2.0 * p.alpha)).sqrt();
                y = rho * y + sd * normal();
                while next < jumps.len() && jumps[next].index == k {
                    level += jumps[next].mark;
                    next += 1;
                }
                v.push((p.target.eval(times[k]) + y + level).exp());
            }
            v
        }
        PriceModel::BrownianBridge {
            s0,
            face_value,
            sigma,
            maturity,
        } => {
            let mut v = Vec::with_capacity(n);
            let mut s = *s0;
            v.push(s);
            for k in 1..n {
                let left = maturity - times[k - 1];
                let remaining = (maturity - times[k]).max(0.0);
                if remaining <= 1e-12 * maturity {
                    s = *face_value;
                } else {
                    let dt = times[k] - times[k - 1];
                    let mean = s + (face_value - s) * dt / left;
                    let sd = sigma * (dt * remaining / left).sqrt();
                    s = mean + sd * normal();
                }
                v.push(s);
            }
            v
        }
        PriceModel::Deterministic(f) => times.iter().map(|&t| f.eval(t)).collect(),
    };
    Ok((SampledPath::new(grid.clone(), values)?, jumps))
}

fn sample_jumps(p: &OuJumpParams, grid: &TimeGrid, seed: u64) -> Vec<JumpEvent> {
    let mut out = Vec::new();
    if p.lambda <= 0.0 {
        return out;
    }
    let mut rng = substream(seed, JUMP_STREAM);
    let arrivals = Exp::new(p.lambda).expect("positive intensity");
    let horizon = grid.horizon();
    let times = grid.times();
    let mut t = 0.0;
    loop {
        t += arrivals.sample(&mut rng);
        if t > horizon {
            break;
        }
        // The jump shows from the first grid point at or after its time.
        let index = times.partition_point(|&x| x < t).clamp(1, times.len() - 1);
        let mark = p.marks.sample(&mut rng);
        out.push(JumpEvent { index, time: t, mark });
    }
    out
}

/// Deterministic forecast path used as `E[S_t]`.
///
/// For the jump model this is `exp(target(t))`, the price with the
/// mean-reverting and jump parts switched off.
pub fn expected_path(model: &PriceModel, grid: &Arc<TimeGrid>) -> Result<SampledPath> {
    model.check_grid(grid)?;
    match model {
        PriceModel::ArithmeticBrownian { s0, .. } | PriceModel::ExponentialMartingale { s0, .. } => {
            SampledPath::constant(grid, *s0)
        }
        PriceModel::OuJump(p) => SampledPath::from_fn(grid, |t| p.target.eval(t).exp()),
        PriceModel::BrownianBridge {
            s0,
            face_value,
            maturity,
            ..
        } => SampledPath::from_fn(grid, |t| face_value + (s0 - face_value) * (maturity - t) / maturity),
        PriceModel::Deterministic(f) => SampledPath::from_fn(grid, |t| f.eval(t)),
    }
}

/// Pointwise variance of `S_t`.
///
/// Closed form where one exists; the jump model is estimated from
/// `mc_paths` sampled paths drawn from `seed`.
pub fn variance_path(model: &PriceModel, grid: &Arc<TimeGrid>, mc_paths: usize, seed: u64) -> Result<SampledPath> {
    model.check_grid(grid)?;
    match model {
        PriceModel::ArithmeticBrownian { sigma, .. } => SampledPath::from_fn(grid, |t| sigma * sigma * t),
        PriceModel::ExponentialMartingale { s0, sigma } => {
            SampledPath::from_fn(grid, |t| s0 * s0 * (sigma * sigma * t).exp_m1())
        }
        PriceModel::BrownianBridge { sigma, maturity, .. } => {
            SampledPath::from_fn(grid, |t| (sigma * sigma * t * (maturity - t) / maturity).max(0.0))
        }
        PriceModel::Deterministic(_) => SampledPath::constant(grid, 0.0),
        PriceModel::OuJump(_) => {
            if mc_paths < 2 {
                return domain("variance estimation needs at least two sample paths");
            }
            let n = grid.len();
            // Shifting by the forecast keeps deterministic points exactly zero.
            let shift = expected_path(model, grid)?.into_values();
            let (sum, sum_sq) = (0..mc_paths as u64)
                .into_par_iter()
                .map(|i| {
                    let s = sample_path(model, grid, path_seed(seed, i)).expect("validated model");
                    let v: Vec<f64> = s.values().iter().zip(&shift).map(|(a, b)| a - b).collect();
                    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
                    (v, sq)
                })
                .reduce(
                    || (vec![0.0; n], vec![0.0; n]),
                    |(mut a, mut b), (c, d)| {
                        for k in 0..n {
                            a[k] += c[k];
                            b[k] += d[k];
                        }
                        (a, b)
                    },
                );
            let m = mc_paths as f64;
            let values = sum
                .iter()
                .zip(&sum_sq)
                .map(|(s, q)| ((q - s * s / m) / (m - 1.0)).max(0.0))
                .collect();
            SampledPath::new(grid.clone(), values)
        }
    }
}
