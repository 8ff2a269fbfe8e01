use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::State;

/// Random-walk proposal kernels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProposalSpec {
    /// `m -> m+1` with probability `theta`, `m -> m-1` otherwise.
    IntegerWalk { theta: f64 },
    /// Independent Gaussian increments; one variance per coordinate, or a
    /// single variance shared by all coordinates. A zero variance pins the
    /// coordinate.
    GaussianWalk { step_variance: Vec<f64> },
}

impl ProposalSpec {
    pub fn integer_walk(theta: f64) -> Self {
        ProposalSpec::IntegerWalk { theta }
    }

    pub fn gaussian_walk(step_variance: f64) -> Self {
        ProposalSpec::GaussianWalk {
            step_variance: vec![step_variance],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProposalSpec::IntegerWalk { theta } => {
                if !(*theta > 0.0 && *theta < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "integer walk theta must lie in (0,1), got {theta}"
                    )));
                }
            }
            ProposalSpec::GaussianWalk { step_variance } => {
                if step_variance.is_empty() || step_variance.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::InvalidInput(
                        "gaussian walk needs finite non-negative step variances".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Draw `Y ~ q(x, .)`.
    pub fn sample<R: Rng + ?Sized>(&self, x: &State, rng: &mut R) -> Result<State> {
        match (self, x) {
            (ProposalSpec::IntegerWalk { theta }, State::Integer(m)) => {
                let up = rng.random::<f64>() < *theta;
                Ok(State::Integer(if up { m + 1 } else { m - 1 }))
            }
            (ProposalSpec::GaussianWalk { step_variance }, State::Vector(v)) => {
                let sd = self.step_sd(step_variance, v.len())?;
                let y = v
                    .iter()
                    .zip(sd)
                    .map(|(xi, s)| {
                        let z: f64 = rng.sample(StandardNormal);
                        xi + s * z
                    })
                    .collect();
                Ok(State::Vector(y))
            }
            _ => Err(self.mismatch(x)),
        }
    }

    /// `log[q(y,x) / q(x,y)]`.
    pub fn log_density_ratio(&self, x: &State, y: &State) -> Result<f64> {
        match (self, x, y) {
            (ProposalSpec::IntegerWalk { theta }, State::Integer(a), State::Integer(b)) => {
                match b - a {
                    1 => Ok(((1.0 - theta) / theta).ln()),
                    -1 => Ok((theta / (1.0 - theta)).ln()),
                    _ => Err(Error::InvalidInput(format!(
                        "integer walk cannot move from {a} to {b}"
                    ))),
                }
            }
            (ProposalSpec::GaussianWalk { .. }, State::Vector(_), State::Vector(_)) => Ok(0.0),
            _ => Err(self.mismatch(x)),
        }
    }

    /// Finite neighbour set `{(y, q(x,y))}` when the proposal is discrete.
    pub fn neighbors(&self, x: &State) -> Option<Vec<(State, f64)>> {
        match (self, x) {
            (ProposalSpec::IntegerWalk { theta }, State::Integer(m)) => Some(vec![
                (State::Integer(m + 1), *theta),
                (State::Integer(m - 1), 1.0 - theta),
            ]),
            _ => None,
        }
    }

    fn step_sd(&self, step_variance: &[f64], dim: usize) -> Result<Vec<f64>> {
        if step_variance.len() != 1 && step_variance.len() != dim {
            return Err(Error::InvalidInput(format!(
                "gaussian walk has {} variances for a {dim}-dimensional state",
                step_variance.len()
            )));
        }
        let broadcast = step_variance.len() == 1;
        Ok((0..dim)
            .map(|i| {
                let v = if broadcast { step_variance[0] } else { step_variance[i] };
                v.sqrt()
            })
            .collect())
    }

    fn mismatch(&self, x: &State) -> Error {
        Error::InvalidInput(format!("proposal {self:?} does not act on state {x}"))
    }
}
