use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::hmm_smc::LgssmPosterior;
use crate::state::State;

/// Where a target puts its mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportKind {
    PositiveIntegers,
    Integers,
    RealVector(usize),
}

/// User-supplied log-density, used through [`TargetSpec::Custom`].
pub trait LogDensity: Send + Sync + fmt::Debug {
    /// Log-density up to an additive constant; `-inf` off support.
    fn log_density(&self, x: &State) -> f64;
    fn support(&self) -> SupportKind;
}

/// The distribution `pi` the marginal chain targets.
///
/// Densities are unnormalised unless stated otherwise; kernels only ever use
/// differences of log-densities.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    /// `pi(m) ∝ ratio^m` on the positive integers, `0 < ratio < 1`.
    /// `ratio = 1/2` gives `pi(m) = 2^-m` exactly.
    Geometric { ratio: f64 },
    /// Isotropic Gaussian on `R^d`, `d = mean.len()`.
    Gaussian { mean: Vec<f64>, variance: f64 },
    /// Posterior of a linear-Gaussian state-space model.
    LgssmPosterior(LgssmPosterior),
    #[serde(skip)]
    Custom(Arc<dyn LogDensity>),
}

impl TargetSpec {
    /// `pi(m) = (1/2)^m` on the positive integers.
    pub fn half_geometric() -> Self {
        TargetSpec::Geometric { ratio: 0.5 }
    }

    pub fn standard_normal() -> Self {
        TargetSpec::Gaussian {
            mean: vec![0.0],
            variance: 1.0,
        }
    }

    pub fn support(&self) -> SupportKind {
        match self {
            TargetSpec::Geometric { .. } => SupportKind::PositiveIntegers,
            TargetSpec::Gaussian { mean, .. } => SupportKind::RealVector(mean.len()),
            TargetSpec::LgssmPosterior(_) => SupportKind::RealVector(4),
            TargetSpec::Custom(t) => t.support(),
        }
    }

    /// Log-density; `-inf` exactly off support or on a variant mismatch.
    pub fn log_density(&self, x: &State) -> f64 {
        match (self, x) {
            (TargetSpec::Geometric { ratio }, State::Integer(m)) => {
                if *m >= 1 {
                    *m as f64 * ratio.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            (TargetSpec::Gaussian { mean, variance }, State::Vector(v)) if v.len() == mean.len() => {
                let ss: f64 = v.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
                -0.5 * ss / variance
            }
            (TargetSpec::LgssmPosterior(post), State::Vector(v)) => post.log_density(v),
            (TargetSpec::Custom(t), _) => t.log_density(x),
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn in_support(&self, x: &State) -> bool {
        self.log_density(x) > f64::NEG_INFINITY
    }

    /// Normalised probability mass at `m`, for discrete targets with a
    /// closed-form normaliser.
    pub fn pmf(&self, m: i64) -> Option<f64> {
        match self {
            TargetSpec::Geometric { ratio } => Some(if m >= 1 {
                (1.0 - ratio) * ratio.powi((m - 1) as i32)
            } else {
                0.0
            }),
            _ => None,
        }
    }

    /// Normalised mass of `[lo, hi)` for one-dimensional continuous targets.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> Option<f64> {
        match self {
            TargetSpec::Gaussian { mean, variance } if mean.len() == 1 => {
                let n = Normal::new(mean[0], variance.sqrt()).ok()?;
                Some(n.cdf(hi) - n.cdf(lo))
            }
            _ => None,
        }
    }

    /// Scale used to lay out default histogram bins.
    pub fn location_scale(&self) -> Option<(f64, f64)> {
        match self {
            TargetSpec::Gaussian { mean, variance } if mean.len() == 1 => {
                Some((mean[0], variance.sqrt()))
            }
            _ => None,
        }
    }
}
