//! Marginal, pseudo-marginal and noisy Metropolis–Hastings kernels.
//!
//! All three kernels consume randomness in the same order: the proposal,
//! then the weight draws (none for unit weights or the marginal kernel),
//! then exactly one uniform for the accept decision. With unit weights the
//! three kernels therefore produce identical chains from the same stream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proposal::ProposalSpec;
use crate::state::State;
use crate::target::TargetSpec;
use crate::weights::{EvalMode, Estimate, WeightModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Marginal,
    PseudoMarginal,
    Noisy,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Marginal, KernelKind::PseudoMarginal, KernelKind::Noisy];

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Marginal => "marginal",
            KernelKind::PseudoMarginal => "pseudo_marginal",
            KernelKind::Noisy => "noisy",
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn default_n() -> usize {
    1
}

fn default_weights() -> WeightModel {
    WeightModel::Unit
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub target: TargetSpec,
    pub proposal: ProposalSpec,
    /// Ignored by the marginal kernel.
    #[serde(default = "default_weights")]
    pub weights: WeightModel,
    #[serde(default = "default_n", alias = "N")]
    pub n: usize,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, target: TargetSpec, proposal: ProposalSpec, weights: WeightModel, n: usize) -> Self {
        KernelSpec {
            kind,
            target,
            proposal,
            weights,
            n,
        }
    }

    pub fn with_kind(&self, kind: KernelKind) -> Self {
        KernelSpec { kind, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.proposal.validate()?;
        self.weights.validate()?;
        if self.n == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        Ok(())
    }

    /// Weight model in effect: unit for the marginal kernel.
    pub fn effective_weights(&self) -> &WeightModel {
        const UNIT: WeightModel = WeightModel::Unit;
        match self.kind {
            KernelKind::Marginal => &UNIT,
            _ => &self.weights,
        }
    }
}

/// `log[pi(y) q(y,x) / (pi(x) q(x,y))]`, `-inf` when `y` is off support.
pub fn log_mh_ratio(target: &TargetSpec, proposal: &ProposalSpec, x: &State, y: &State) -> Result<f64> {
    let lx = target.log_density(x);
    if !lx.is_finite() {
        return Err(Error::OffSupport(format!("current state {x} has log-density {lx}")));
    }
    let ly = target.log_density(y);
    if ly == f64::NEG_INFINITY || ly.is_nan() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ly - lx + proposal.log_density_ratio(x, y)?)
}

/// `log min{1, pi(y) q(y,x) / (pi(x) q(x,y))}`.
pub fn marginal_log_alpha(target: &TargetSpec, proposal: &ProposalSpec, x: &State, y: &State) -> Result<f64> {
    Ok(log_mh_ratio(target, proposal, x, y)?.min(0.0))
}

/// `min{1, pi(y) u q(y,x) / (pi(x) w q(x,y))}`.
pub fn bar_alpha(
    x: &State,
    w: f64,
    y: &State,
    u: f64,
    target: &TargetSpec,
    proposal: &ProposalSpec,
) -> Result<f64> {
    for v in [w, u] {
        if !(v > 0.0) {
            return Err(Error::NonPositiveWeight(v));
        }
    }
    let lr = log_mh_ratio(target, proposal, x, y)?;
    Ok((lr + u.ln() - w.ln()).min(0.0).exp())
}

/// Per-step record: the weights used (log scale) and the acceptance probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub accepted: bool,
    /// Weight at the current state (carried or fresh).
    pub log_w: f64,
    /// Weight at the proposal; NaN when the proposal was off support.
    pub log_u: f64,
    pub alpha: f64,
}

fn decide<R: Rng + ?Sized>(log_alpha: f64, rng: &mut R) -> bool {
    let v: f64 = rng.random();
    v < log_alpha.exp()
}

/// One step of the noisy kernel: fresh weights at both points every call.
pub fn noisy_step<R: Rng + ?Sized>(spec: &KernelSpec, x: &State, rng: &mut R) -> Result<(State, StepInfo)> {
    let weights = spec.effective_weights();
    let y = spec.proposal.sample(x, rng)?;
    let lr = log_mh_ratio(&spec.target, &spec.proposal, x, &y)?;
    let log_w = weights.sample_log(x, spec.n, rng)?;
    let (log_alpha, log_u) = if lr == f64::NEG_INFINITY {
        (f64::NEG_INFINITY, f64::NAN)
    } else {
        let lu = weights.sample_log(&y, spec.n, rng)?;
        ((lr + lu - log_w).min(0.0), lu)
    };
    let accepted = decide(log_alpha, rng);
    let info = StepInfo {
        accepted,
        log_w,
        log_u,
        alpha: log_alpha.exp(),
    };
    Ok((if accepted { y } else { x.clone() }, info))
}

/// One step of the pseudo-marginal kernel on `(x, w)`; the weight is carried
/// on rejection.
pub fn pseudo_marginal_step<R: Rng + ?Sized>(
    spec: &KernelSpec,
    x: &State,
    log_w: f64,
    rng: &mut R,
) -> Result<((State, f64), StepInfo)> {
    if log_w.is_nan() || log_w == f64::INFINITY || log_w == f64::NEG_INFINITY {
        return Err(Error::NonPositiveWeight(log_w.exp()));
    }
    let weights = spec.effective_weights();
    let y = spec.proposal.sample(x, rng)?;
    let lr = log_mh_ratio(&spec.target, &spec.proposal, x, &y)?;
    let (log_alpha, log_u) = if lr == f64::NEG_INFINITY {
        (f64::NEG_INFINITY, f64::NAN)
    } else {
        let lu = weights.sample_log(&y, spec.n, rng)?;
        ((lr + lu - log_w).min(0.0), lu)
    };
    let accepted = decide(log_alpha, rng);
    let info = StepInfo {
        accepted,
        log_w,
        log_u,
        alpha: log_alpha.exp(),
    };
    let next = if accepted { (y, log_u) } else { (x.clone(), log_w) };
    Ok((next, info))
}

/// One step of the marginal (exact) Metropolis–Hastings kernel.
pub fn marginal_step<R: Rng + ?Sized>(spec: &KernelSpec, x: &State, rng: &mut R) -> Result<(State, StepInfo)> {
    let y = spec.proposal.sample(x, rng)?;
    let log_alpha = marginal_log_alpha(&spec.target, &spec.proposal, x, &y)?;
    let accepted = decide(log_alpha, rng);
    let info = StepInfo {
        accepted,
        log_w: 0.0,
        log_u: if log_alpha == f64::NEG_INFINITY { f64::NAN } else { 0.0 },
        alpha: log_alpha.exp(),
    };
    Ok((if accepted { y } else { x.clone() }, info))
}

/// `E[bar_alpha(x, W; y, U)]` with independent `W ~ Q_{x,N}`, `U ~ Q_{y,N}`.
/// For the marginal kernel this is the exact acceptance probability.
pub fn tilde_alpha(spec: &KernelSpec, x: &State, y: &State, mode: EvalMode) -> Result<Estimate> {
    let lr = log_mh_ratio(&spec.target, &spec.proposal, x, y)?;
    if lr == f64::NEG_INFINITY {
        return Ok(Estimate::exact(0.0));
    }
    let weights = spec.effective_weights();
    if weights.is_unit() {
        return Ok(Estimate::exact(lr.min(0.0).exp()));
    }
    // E[min{1, r U/W}] = E[min{1, k U/W}] with k the unclipped ratio
    weights.expected_min_ratio(x, y, spec.n, lr.exp(), mode)
}

/// Rejection probability `1 - sum_y q(x,y) tilde_alpha(x,y)` for proposals
/// with finitely many neighbours.
pub fn tilde_rho(spec: &KernelSpec, x: &State, mode: EvalMode) -> Result<Estimate> {
    let nbrs = spec
        .proposal
        .neighbors(x)
        .ok_or_else(|| Error::Unsupported("rejection probability needs a discrete proposal".into()))?;
    let mut acc = 0.0;
    let mut var = 0.0;
    let mut exact = true;
    for (y, q) in nbrs {
        let a = tilde_alpha(spec, x, &y, mode)?;
        acc += q * a.value;
        var += (q * a.std_error).powi(2);
        exact &= a.exact;
    }
    Ok(Estimate {
        value: 1.0 - acc,
        std_error: var.sqrt(),
        exact,
    })
}
