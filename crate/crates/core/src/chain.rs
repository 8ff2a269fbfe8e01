//! Generic chain runner shared by all kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{marginal_step, noisy_step, pseudo_marginal_step, KernelKind, KernelSpec};
use crate::rng::RngStream;
use crate::state::State;

/// A seeded realization of a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub kernel: KernelKind,
    pub stream: RngStream,
    pub iterations: usize,
    /// `iterations + 1` states starting at `x0`.
    pub states: Vec<State>,
    pub accepted: Vec<bool>,
    /// Weight carried by the pseudo-marginal chain at each recorded state.
    pub carried_weight: Option<Vec<f64>>,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Integer states, if the chain lives on the lattice.
    pub fn integer_states(&self) -> Option<Vec<i64>> {
        self.states.iter().map(State::as_integer).collect()
    }

    /// Coordinate `i` of every state (lattice states map to `f64`).
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.coordinate(i).unwrap_or(f64::NAN)).collect()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trace holds x0")
    }
}

/// Run `iterations` steps of `kernel` from `x0`.
///
/// The pseudo-marginal chain starts from a weight drawn at `x0`.
pub fn run_chain(kernel: &KernelSpec, x0: State, iterations: usize, stream: RngStream) -> Result<ChainTrace> {
    kernel.validate()?;
    let l0 = kernel.target.log_density(&x0);
    if !l0.is_finite() {
        return Err(Error::OffSupport(format!("initial state {x0} has log-density {l0}")));
    }
    let mut rng = stream.generator();
    let mut states = Vec::with_capacity(iterations + 1);
    let mut accepted = Vec::with_capacity(iterations);
    let mut carried = None;
    let mut x = x0;
    states.push(x.clone());
    match kernel.kind {
        KernelKind::Marginal => {
            for _ in 0..iterations {
                let (nx, info) = marginal_step(kernel, &x, &mut rng)?;
                accepted.push(info.accepted);
                x = nx;
                states.push(x.clone());
            }
        }
        KernelKind::Noisy => {
            for _ in 0..iterations {
                let (nx, info) = noisy_step(kernel, &x, &mut rng)?;
                accepted.push(info.accepted);
                x = nx;
                states.push(x.clone());
            }
        }
        KernelKind::PseudoMarginal => {
            let mut lw = kernel.weights.sample_log(&x, kernel.n, &mut rng)?;
            let mut ws = Vec::with_capacity(iterations + 1);
            ws.push(lw.exp());
            for _ in 0..iterations {
                let ((nx, nw), info) = pseudo_marginal_step(kernel, &x, lw, &mut rng)?;
                accepted.push(info.accepted);
                x = nx;
                lw = nw;
                states.push(x.clone());
                ws.push(lw.exp());
            }
            carried = Some(ws);
        }
    }
    Ok(ChainTrace {
        kernel: kernel.kind,
        stream,
        iterations,
        states,
        accepted,
        carried_weight: carried,
    })
}
