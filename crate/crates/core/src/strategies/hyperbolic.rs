//! Ratios of hyperbolic functions that stay finite for tiny and large rates.

/// Below this value of `rate * horizon` the linear limits are used.
const LINEAR_LIMIT: f64 = 1e-8;
/// Above this value the ratios are formed from decaying exponentials.
const LARGE_LIMIT: f64 = 20.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Hyperbolic {
    pub rate: f64,
    pub horizon: f64,
}

impl Hyperbolic {
    pub fn new(rate: f64, horizon: f64) -> Hyperbolic {
        Hyperbolic { rate, horizon }
    }

    pub fn is_linear(&self) -> bool {
        self.rate * self.horizon < LINEAR_LIMIT
    }

    /// `sinh(rate t) / sinh(rate T)`, tending to `t / T`.
    pub fn sinh_ratio(&self, t: f64) -> f64 {
        let (k, h) = (self.rate, self.horizon);
        if self.is_linear() {
            t / h
        } else if k * h > LARGE_LIMIT {
            (k * (t - h)).exp() * (-(-2.0 * k * t).exp_m1()) / (-(-2.0 * k * h).exp_m1())
        } else {
            (k * t).sinh() / (k * h).sinh()
        }
    }

    /// Time derivative of `sinh_ratio`.
    pub fn sinh_ratio_dot(&self, t: f64) -> f64 {
        let (k, h) = (self.rate, self.horizon);
        if self.is_linear() {
            1.0 / h
        } else if k * h > LARGE_LIMIT {
            k * (k * (t - h)).exp() * (1.0 + (-2.0 * k * t).exp()) / (-(-2.0 * k * h).exp_m1())
        } else {
            k * (k * t).cosh() / (k * h).sinh()
        }
    }

    /// Weight moving inventory from the start to the target:
    /// `1 - sinh(rate (T - t)) / sinh(rate T)`.
    pub fn blend(&self, t: f64) -> f64 {
        1.0 - self.sinh_ratio(self.horizon - t)
    }

    pub fn blend_dot(&self, t: f64) -> f64 {
        self.sinh_ratio_dot(self.horizon - t)
    }

    /// `sinh(rate t)`, or `t` in the linear limit.
    pub fn shape(&self, t: f64) -> f64 {
        if self.is_linear() {
            t
        } else {
            (self.rate * t).sinh()
        }
    }
}
