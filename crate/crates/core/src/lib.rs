//! Pathwise optimal execution.
//!
//! Price paths are treated as sampled rough paths. Trading trajectories are
//! built from closed forms or by integrating the Euler-Lagrange system, and
//! carry certificates bounding how far any competing trajectory can improve
//! on them for the realized path.

pub mod baselines;
pub mod calibration;
pub mod costs;
mod error;
pub mod pathcalc;
pub mod pricemodels;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
