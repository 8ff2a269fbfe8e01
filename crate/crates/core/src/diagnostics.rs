//! Chain diagnostics: autocorrelation, acceptance, empirical total
//! variation, drift ratios, one-step kernel distances and the coupling
//! rate bound for the noisy invariant distribution.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{marginal_step, noisy_step, tilde_alpha, tilde_rho, KernelKind, KernelSpec};
use crate::proposal::ProposalSpec;
use crate::state::State;
use crate::target::TargetSpec;
use crate::weights::{EvalMode, Estimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Acf {
    pub values: Vec<f64>,
    /// The trace has zero variance; `values` is then all ones.
    pub degenerate: bool,
}

/// Autocorrelation at lags `0..=max_lag`, normalised by `n` at every lag.
pub fn acf(trace: &[f64], max_lag: usize) -> Result<Acf> {
    let n = trace.len();
    if n <= max_lag {
        return Err(Error::InvalidInput(format!(
            "trace of length {n} is too short for lag {max_lag}"
        )));
    }
    let mean = trace.iter().sum::<f64>() / n as f64;
    let c0 = trace.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if !(c0 > 0.0) {
        return Ok(Acf {
            values: vec![1.0; max_lag + 1],
            degenerate: true,
        });
    }
    let values = (0..=max_lag)
        .map(|k| {
            if k == 0 {
                return 1.0;
            }
            let ck: f64 = trace[..n - k]
                .iter()
                .zip(&trace[k..])
                .map(|(a, b)| (a - mean) * (b - mean))
                .sum::<f64>()
                / n as f64;
            ck / c0
        })
        .collect();
    Ok(Acf {
        values,
        degenerate: false,
    })
}

/// Fraction of accepted proposals.
pub fn mean_acceptance(accepted: &[bool]) -> Result<f64> {
    if accepted.is_empty() {
        return Err(Error::InvalidInput("no transitions to average".into()));
    }
    Ok(accepted.iter().filter(|a| **a).count() as f64 / accepted.len() as f64)
}

/// How target mass is compared with the trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binning {
    /// Atom-by-atom comparison for discrete targets.
    ExactPmf,
    /// `k` equal-width bins on `[lo, hi)` plus one bin for everything outside.
    Bins { k: usize, lo: f64, hi: f64 },
    /// 50 bins spanning four target standard deviations either side.
    Default,
}

/// Half the L1 distance between the empirical law of `states[burnin..]`
/// and the target.
pub fn empirical_tv(states: &[State], target: &TargetSpec, burnin: usize, binning: Binning) -> Result<f64> {
    let post = states.get(burnin..).unwrap_or(&[]);
    if post.is_empty() {
        return Err(Error::InvalidInput("no states left after burn-in".into()));
    }
    let n = post.len() as f64;
    let binning = match binning {
        Binning::Default => match target.location_scale() {
            Some((m, s)) => Binning::Bins {
                k: 50,
                lo: m - 4.0 * s,
                hi: m + 4.0 * s,
            },
            None => Binning::ExactPmf,
        },
        b => b,
    };
    match binning {
        Binning::ExactPmf => {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for s in post {
                let m = s
                    .as_integer()
                    .ok_or_else(|| Error::InvalidInput("exact pmf comparison needs lattice states".into()))?;
                *counts.entry(m).or_default() += 1;
            }
            let mut l1 = 0.0;
            let mut seen = 0.0;
            for (&m, &c) in &counts {
                let pi = target
                    .pmf(m)
                    .ok_or_else(|| Error::Unsupported("target has no closed-form pmf".into()))?;
                l1 += (c as f64 / n - pi).abs();
                seen += pi;
            }
            Ok(0.5 * (l1 + (1.0 - seen).max(0.0)))
        }
        Binning::Bins { k, lo, hi } => {
            if k == 0 || !(hi > lo) {
                return Err(Error::InvalidInput("bins need k >= 1 and hi > lo".into()));
            }
            let width = (hi - lo) / k as f64;
            let mut counts = vec![0usize; k + 1];
            for s in post {
                let x = s
                    .coordinate(0)
                    .ok_or_else(|| Error::InvalidInput("binning needs a scalar state".into()))?;
                let i = if x >= lo && x < hi {
                    (((x - lo) / width) as usize).min(k - 1)
                } else {
                    k
                };
                counts[i] += 1;
            }
            let mut l1 = 0.0;
            let mut inside = 0.0;
            for (i, &c) in counts[..k].iter().enumerate() {
                let a = lo + i as f64 * width;
                let mass = target
                    .interval_mass(a, a + width)
                    .ok_or_else(|| Error::Unsupported("target has no interval masses".into()))?;
                inside += mass;
                l1 += (c as f64 / n - mass).abs();
            }
            l1 += (counts[k] as f64 / n - (1.0 - inside)).abs();
            Ok(0.5 * l1)
        }
        Binning::Default => unreachable!(),
    }
}

type VFn = Arc<dyn Fn(&State) -> f64 + Send + Sync>;

/// Candidate drift function `V >= 1`, evaluated on the log scale.
#[derive(Clone)]
pub enum DriftFunction {
    Unit,
    /// `V(m) = base^m`.
    Exponential { base: f64 },
    /// `V = pi^{-s}` from the target's log-density.
    PiPower { s: f64 },
    /// User-supplied `log V`.
    LogCustom(VFn),
}

impl std::fmt::Debug for DriftFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DriftFunction::Unit => f.write_str("Unit"),
            DriftFunction::Exponential { base } => write!(f, "Exponential({base})"),
            DriftFunction::PiPower { s } => write!(f, "PiPower({s})"),
            DriftFunction::LogCustom(_) => f.write_str("LogCustom"),
        }
    }
}

impl DriftFunction {
    pub fn log_value(&self, target: &TargetSpec, x: &State) -> f64 {
        match self {
            DriftFunction::Unit => 0.0,
            DriftFunction::Exponential { base } => x.coordinate(0).unwrap_or(f64::NAN) * base.ln(),
            DriftFunction::PiPower { s } => -s * target.log_density(x),
            DriftFunction::LogCustom(f) => f(x),
        }
    }
}

/// Geometric drift inequality `PV <= lambda V + b 1_C`.
#[derive(Clone)]
pub struct DriftSpec {
    pub v: DriftFunction,
    pub small_set: Arc<dyn Fn(&State) -> bool + Send + Sync>,
    pub lambda: f64,
    pub b: f64,
}

impl DriftSpec {
    /// Whether the inequality holds at `x`, using [`drift_ratio`].
    pub fn holds_at(&self, kernel: &KernelSpec, x: &State, mode: DriftMode) -> Result<bool> {
        let r = drift_ratio(kernel, &self.v, x, mode)?.value;
        let lv = self.v.log_value(&kernel.target, x);
        let slack = if (self.small_set)(x) { self.b * (-lv).exp() } else { 0.0 };
        Ok(r <= self.lambda + slack)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriftMode {
    /// Three-term sum for two-neighbour kernels with enumerable weights.
    ExactDiscrete,
    /// Average of `V(X_1)/V(x)` over simulated steps.
    MonteCarlo { draws: usize, rng: crate::rng::RngStream },
}

/// `(P V)(x) / V(x)` for the noisy (or marginal) kernel.
pub fn drift_ratio(kernel: &KernelSpec, v: &DriftFunction, x: &State, mode: DriftMode) -> Result<Estimate> {
    let lv = v.log_value(&kernel.target, x);
    if !lv.is_finite() || lv < -1e-12 {
        return Err(Error::InvalidInput(format!("drift function must be >= 1 at {x}")));
    }
    match mode {
        DriftMode::ExactDiscrete => {
            let nbrs = kernel
                .proposal
                .neighbors(x)
                .ok_or_else(|| Error::Unsupported("exact drift needs a discrete proposal".into()))?;
            let mut total = tilde_rho(kernel, x, EvalMode::Exact)?.value;
            for (y, q) in nbrs {
                let a = tilde_alpha(kernel, x, &y, EvalMode::Exact)?.value;
                if a > 0.0 {
                    total += q * a * (v.log_value(&kernel.target, &y) - lv).exp();
                }
            }
            Ok(Estimate::exact(total))
        }
        DriftMode::MonteCarlo { draws, rng } => {
            if draws < 2 {
                return Err(Error::InvalidInput("need at least two draws".into()));
            }
            let mut g = rng.generator();
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..draws {
                let next = match kernel.kind {
                    KernelKind::Noisy => noisy_step(kernel, x, &mut g)?.0,
                    KernelKind::Marginal => marginal_step(kernel, x, &mut g)?.0,
                    KernelKind::PseudoMarginal => {
                        return Err(Error::Unsupported(
                            "the pseudo-marginal kernel acts on (x, w), not on x alone".into(),
                        ))
                    }
                };
                let r = (v.log_value(&kernel.target, &next) - lv).exp();
                s += r;
                s2 += r * r;
            }
            let nf = draws as f64;
            let m = s / nf;
            let var = ((s2 - nf * m * m) / (nf - 1.0)).max(0.0);
            Ok(Estimate {
                value: m,
                std_error: (var / nf).sqrt(),
                exact: false,
            })
        }
    }
}

/// Total variation between `P_N(x, .)` of `kernel` and the marginal kernel
/// at `x`. Both kernels share the proposal, so the distance is
/// `(E_q|alpha_N - alpha| + |rho_N - rho|) / 2`.
///
/// Discrete proposals are summed exactly; a one-dimensional Gaussian walk is
/// integrated on `points` normal-weighted nodes. `mode` evaluates the noisy
/// acceptance probability at each node.
pub fn one_step_tv(kernel: &KernelSpec, x: &State, mode: EvalMode, points: usize) -> Result<Estimate> {
    let marginal = kernel.with_kind(KernelKind::Marginal);
    let noisy = kernel.with_kind(KernelKind::Noisy);
    let nodes: Vec<(State, f64)> = match (&kernel.proposal, x) {
        (p, _) if p.neighbors(x).is_some() => p.neighbors(x).unwrap(),
        (ProposalSpec::GaussianWalk { step_variance }, State::Vector(v)) if v.len() == 1 => {
            if points < 2 {
                return Err(Error::InvalidInput("need at least two quadrature nodes".into()));
            }
            let sd = step_variance[0].sqrt();
            let h = 12.0 / points as f64;
            let mut nodes: Vec<(State, f64)> = (0..points)
                .map(|i| {
                    let z = -6.0 + (i as f64 + 0.5) * h;
                    (State::scalar(v[0] + sd * z), (-0.5 * z * z).exp())
                })
                .collect();
            let total: f64 = nodes.iter().map(|n| n.1).sum();
            nodes.iter_mut().for_each(|n| n.1 /= total);
            nodes
        }
        _ => {
            return Err(Error::Unsupported(
                "one-step distance needs a discrete or one-dimensional Gaussian proposal".into(),
            ))
        }
    };
    let (mut abs_sum, mut signed, mut var) = (0.0, 0.0, 0.0);
    let mut exact = true;
    for (y, w) in &nodes {
        let a = tilde_alpha(&marginal, x, y, EvalMode::Exact)?.value;
        let at = tilde_alpha(&noisy, x, y, mode)?;
        abs_sum += w * (at.value - a).abs();
        signed += w * (at.value - a);
        var += (w * at.std_error).powi(2);
        exact &= at.exact;
    }
    Ok(Estimate {
        value: 0.5 * (abs_sum + signed.abs()),
        std_error: var.sqrt(),
        exact,
    })
}

/// Coupling constants `(R, tau)` of the simultaneous geometric bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvRateParams {
    pub big_r: f64,
    pub tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub bound: f64,
    pub n: u64,
}

/// `2 R tau^n + n / r`.
pub fn rate_objective(params: &TvRateParams, r: f64, n: u64) -> f64 {
    2.0 * params.big_r * params.tau.powi(n as i32) + n as f64 / r
}

/// Minimise `2 R tau^n + n / r` over integers `n >= 1`.
///
/// The continuous minimiser is `s* = log(2 R r log(1/tau)) / log(1/tau)`;
/// by convexity the integer minimum is at `floor(s*)` or `ceil(s*)`, ties
/// going to the smaller `n`.
pub fn tv_rate_bound(params: &TvRateParams, r: f64) -> Result<RateBound> {
    let TvRateParams { big_r, tau } = *params;
    if !(big_r > 0.0 && tau > 0.0 && tau < 1.0 && r > 0.0) || !(big_r.is_finite() && r.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need R > 0, tau in (0,1), r > 0; got R = {big_r}, tau = {tau}, r = {r}"
        )));
    }
    let lt = (1.0 / tau).ln();
    let head = (2.0 * big_r * r * lt).ln();
    if !(head >= 1.0) {
        return Err(Error::InconclusiveBound(format!(
            "log(2 R r log(1/tau)) = {head} is below 1; r is too small"
        )));
    }
    let s = head / lt;
    if s > i32::MAX as f64 {
        return Err(Error::InconclusiveBound(format!("minimising n = {s} is out of range")));
    }
    let lo = (s.floor() as u64).max(1);
    let hi = (s.ceil() as u64).max(1);
    let (fl, fh) = (rate_objective(params, r, lo), rate_objective(params, r, hi));
    Ok(if fh < fl {
        RateBound { bound: fh, n: hi }
    } else {
        RateBound { bound: fl, n: lo }
    })
}

/// [`tv_rate_bound`] with `r` given as a function of `N`.
pub fn tv_rate_bound_at(params: &TvRateParams, r: impl Fn(usize) -> f64, n: usize) -> Result<RateBound> {
    tv_rate_bound(params, r(n))
}

/// Constant `D` of the `D log(r)/r` form of the bound, valid for `r >= r_min`.
pub fn rate_shape_constant(params: &TvRateParams, r_min: f64) -> f64 {
    let lt = (1.0 / params.tau).ln();
    1.0 / lt + (1.0 + (params.tau + (2.0 * params.big_r * lt).ln().abs()) / lt) / r_min.ln()
}
