//! Marginal, pseudo-marginal and noisy Metropolis–Hastings samplers with
//! pluggable weight models, exact birth-death chain analysis, a particle
//! filter example and convergence diagnostics.

pub mod chain;
pub mod diagnostics;
pub mod discrete_walk;
pub mod error;
pub mod experiment;
pub mod hmm_smc;
pub mod kernels;
pub mod presets;
pub mod proposal;
pub mod rng;
pub mod state;
pub mod target;
pub mod verify;
pub mod weights;

pub use chain::{run_chain, ChainTrace};
pub use error::{Error, Result};
pub use kernels::{KernelKind, KernelSpec};
pub use proposal::ProposalSpec;
pub use rng::{split_stream, RngStream};
pub use state::State;
pub use target::TargetSpec;
pub use weights::{EvalMode, Estimate, WeightModel};
