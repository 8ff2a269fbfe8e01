use std::fmt;

use serde::{Deserialize, Serialize};

/// A point of the chain's state space.
///
/// Lattice examples live on the integers, continuous ones on `R^d`. One
/// experiment never mixes the two variants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum State {
    Integer(i64),
    Vector(Vec<f64>),
}

impl State {
    pub fn scalar(x: f64) -> Self {
        State::Vector(vec![x])
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            State::Integer(m) => Some(*m),
            State::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            State::Integer(_) => None,
            State::Vector(v) => Some(v),
        }
    }

    /// Coordinate `i` as a real number; integers expose themselves at index 0.
    pub fn coordinate(&self, i: usize) -> Option<f64> {
        match self {
            State::Integer(m) if i == 0 => Some(*m as f64),
            State::Integer(_) => None,
            State::Vector(v) => v.get(i).copied(),
        }
    }
}

impl From<i64> for State {
    fn from(m: i64) -> Self {
        State::Integer(m)
    }
}

impl From<Vec<f64>> for State {
    fn from(v: Vec<f64>) -> Self {
        State::Vector(v)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Integer(m) => write!(f, "{m}"),
            State::Vector(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}
