//! Exact analysis of nearest-neighbour chains on the positive integers.
//!
//! A chain with `p_m = P(m, {m+1})`, `q_m = P(m, {m-1})`, `q_1 = 0` is
//! classified from the two series
//!
//! ```text
//! S_rec = sum_{m>=2} prod_{i=2}^m q_i/p_i        (finite <=> transient)
//! S_pos = sum_{m>=2} prod_{i=2}^m p_{i-1}/q_i    (finite <=> positive recurrent)
//! ```
//!
//! and the tail limits (`lim p < lim q` gives geometric ergodicity).
//! Series are truncated at `M` and evaluated in log space.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{tilde_alpha, KernelKind, KernelSpec};
use crate::proposal::ProposalSpec;
use crate::rng::RngStream;
use crate::state::State;
use crate::target::TargetSpec;
use crate::weights::{EvalMode, Sequence, WeightModel};

type ProbFn = Arc<dyn Fn(i64) -> (f64, f64) + Send + Sync>;

/// Source of the one-step probabilities `(p_m, q_m)`.
#[derive(Clone)]
pub enum BirthDeathSpec {
    /// Exact enumeration of a lattice kernel with a two-neighbour proposal.
    /// The marginal kernel gives the exact marginal chain.
    Kernel(KernelSpec),
    /// Rows `m = 1, 2, ...`; the last row is reused beyond the table.
    Table { p: Vec<f64>, q: Vec<f64> },
    /// Constant `(p, q)` for `m >= 2`, `p_1 = p`, `q_1 = 0`.
    Constant { p: f64, q: f64 },
    Function(ProbFn),
}

impl std::fmt::Debug for BirthDeathSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BirthDeathSpec::Kernel(k) => f.debug_tuple("Kernel").field(&k.kind).finish(),
            BirthDeathSpec::Table { p, .. } => write!(f, "Table({} rows)", p.len()),
            BirthDeathSpec::Constant { p, q } => write!(f, "Constant(p={p}, q={q})"),
            BirthDeathSpec::Function(_) => f.write_str("Function"),
        }
    }
}

impl BirthDeathSpec {
    /// `(p_m, q_m)` for `m >= 1`.
    pub fn probs(&self, m: i64) -> Result<(f64, f64)> {
        if m < 1 {
            return Err(Error::InvalidInput(format!("birth-death index must be >= 1, got {m}")));
        }
        match self {
            BirthDeathSpec::Kernel(k) => {
                let x = State::Integer(m);
                let nbrs = k.proposal.neighbors(&x).ok_or_else(|| {
                    Error::Unsupported("birth-death analysis needs a two-neighbour proposal".into())
                })?;
                let (mut p, mut q) = (0.0, 0.0);
                for (y, prob) in nbrs {
                    let a = tilde_alpha(k, &x, &y, EvalMode::Exact)?.value;
                    match y.as_integer() {
                        Some(v) if v == m + 1 => p += prob * a,
                        Some(v) if v == m - 1 => q += prob * a,
                        _ => {}
                    }
                }
                Ok((p, q))
            }
            BirthDeathSpec::Table { p, q } => {
                let i = ((m - 1) as usize).min(p.len() - 1);
                Ok((p[i], if m == 1 { 0.0 } else { q[i] }))
            }
            BirthDeathSpec::Constant { p, q } => Ok((*p, if m == 1 { 0.0 } else { *q })),
            BirthDeathSpec::Function(f) => {
                let (p, q) = f(m);
                Ok((p, if m == 1 { 0.0 } else { q }))
            }
        }
    }

    /// `(p_m, q_m)` for `m = 1..=upto`, evaluated in parallel.
    pub fn probs_upto(&self, upto: i64) -> Result<Vec<(f64, f64)>> {
        (1..=upto).into_par_iter().map(|m| self.probs(m)).collect()
    }

    /// Read an `m,p,q` CSV. Rows must start at `m = 1` and be consecutive.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let (mut p, mut q) = (Vec::new(), Vec::new());
        for (i, rec) in r.deserialize::<(i64, f64, f64)>().enumerate() {
            let (m, pm, qm) = rec?;
            if m != i as i64 + 1 {
                return Err(Error::InvalidSpec(format!(
                    "rows must list m = 1, 2, ... in order; row {} has m = {m}",
                    i + 1
                )));
            }
            p.push(pm);
            q.push(qm);
        }
        if p.is_empty() {
            return Err(Error::InvalidSpec(format!("{} has no rows", path.display())));
        }
        Ok(BirthDeathSpec::Table { p, q })
    }
}

/// The exact noisy chain of a lattice target under `integer_walk(theta)`.
pub fn noisy_birth_death(target: TargetSpec, theta: f64, weights: WeightModel, n: usize) -> Result<BirthDeathSpec> {
    if !weights.is_enumerable() {
        return Err(Error::Unsupported(format!(
            "{} weights cannot be enumerated exactly",
            weights.family_name()
        )));
    }
    let spec = KernelSpec::new(KernelKind::Noisy, target, ProposalSpec::integer_walk(theta), weights, n);
    spec.validate()?;
    Ok(BirthDeathSpec::Kernel(spec))
}

/// The exact marginal chain of a lattice target under `integer_walk(theta)`.
pub fn marginal_birth_death(target: TargetSpec, theta: f64) -> Result<BirthDeathSpec> {
    let spec = KernelSpec::new(
        KernelKind::Marginal,
        target,
        ProposalSpec::integer_walk(theta),
        WeightModel::Unit,
        1,
    );
    spec.validate()?;
    Ok(BirthDeathSpec::Kernel(spec))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Transient,
    RecurrentNull,
    PositiveRecurrent,
    GeometricallyErgodic,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Transient => "transient",
            Verdict::RecurrentNull => "recurrent-null",
            Verdict::PositiveRecurrent => "positive-recurrent",
            Verdict::GeometricallyErgodic => "geometrically-ergodic",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Truncation `M`.
    pub m: i64,
    /// A series converges when its terms over the last `M/2` indices sum below this.
    pub cauchy_tol: f64,
    /// A series diverges when its partial sum exceeds this.
    pub divergence_level: f64,
    /// Spread allowed across the last few `p_m` (or `q_m`) for a limit to exist,
    /// and margin required in `lim p < lim q`.
    pub limit_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            m: 30_000,
            cauchy_tol: 1e-12,
            divergence_level: 1e12,
            limit_tol: 1e-6,
        }
    }
}

/// State of one truncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesStatus {
    Converges,
    Diverges,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvidence {
    /// `log S(M)`.
    pub log_partial_sum: f64,
    /// `log` of the terms summed over `M/2 < m <= M`.
    pub log_tail_sum: f64,
    /// Log of the largest term in the last window versus the window at `M/2`.
    pub log_last_term: f64,
    pub log_mid_term: f64,
    pub status: SeriesStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkClassification {
    pub verdict: Verdict,
    pub recurrence: SeriesEvidence,
    pub positivity: SeriesEvidence,
    /// Extrapolated `lim p_m`, when the tail of `p_m` settles.
    pub lim_p: Option<f64>,
    pub lim_q: Option<f64>,
    pub p_at_m: f64,
    pub q_at_m: f64,
    /// Mean of `log(q_m/p_m)` over 3-blocks in the last half; a negative
    /// value means the recurrence terms decay geometrically along blocks.
    pub block_log_ratio: f64,
    pub options: ClassifyOptions,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Window over which the largest term is compared; covers periods 1, 2, 3, 6.
const WINDOW: usize = 6;

/// Evaluate `sum_{m=2}^{M} exp(log_terms[m-2])`.
fn series(log_terms: &[f64], opts: &ClassifyOptions) -> SeriesEvidence {
    let n = log_terms.len();
    let half = n / 2;
    let mut total = f64::NEG_INFINITY;
    let mut tail = f64::NEG_INFINITY;
    for (i, &t) in log_terms.iter().enumerate() {
        total = log_add(total, t);
        if i >= half {
            tail = log_add(tail, t);
        }
    }
    let window_max = |end: usize| {
        log_terms[end.saturating_sub(WINDOW)..end]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let last = window_max(n);
    let mid = window_max(half.max(1));
    let status = if tail < opts.cauchy_tol.ln() {
        SeriesStatus::Converges
    } else if total > opts.divergence_level.ln() || (last >= mid && last > f64::NEG_INFINITY) {
        // partial sum past the divergence level, or terms not decaying at all
        SeriesStatus::Diverges
    } else {
        SeriesStatus::Undetermined
    };
    SeriesEvidence {
        log_partial_sum: total,
        log_tail_sum: tail,
        log_last_term: last,
        log_mid_term: mid,
        status,
    }
}

/// Richardson estimate `2 v(M) - v(M/2)` when the last window is flat.
fn tail_limit(values: &[f64], tol: f64) -> Option<f64> {
    let n = values.len();
    let w = &values[n - WINDOW..];
    let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo > tol {
        return None;
    }
    let l = 2.0 * values[n - 1] - values[n / 2 - 1];
    Some(l.clamp(0.0, 1.0))
}

pub fn classify(spec: &BirthDeathSpec, opts: &ClassifyOptions) -> Result<WalkClassification> {
    if opts.m < 1000 {
        return Err(Error::InvalidInput(format!("truncation M must be at least 1000, got {}", opts.m)));
    }
    let pq = spec.probs_upto(opts.m)?;
    for (i, &(p, q)) in pq.iter().enumerate() {
        let m = i + 1;
        if !(p.is_finite() && q.is_finite()) || p < 0.0 || q < 0.0 || p + q > 1.0 + 1e-12 {
            return Err(Error::InvalidSpec(format!("invalid probabilities at m = {m}: p = {p}, q = {q}")));
        }
        if m == 1 && p <= 0.0 {
            return Err(Error::InvalidSpec("p_1 must be positive".into()));
        }
        if m >= 2 && (p <= 0.0 || q <= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "need p_m, q_m > 0 for m >= 2; m = {m} has p = {p}, q = {q}"
            )));
        }
    }
    let mut rec = Vec::with_capacity(pq.len() - 1);
    let mut pos = Vec::with_capacity(pq.len() - 1);
    let (mut a, mut b) = (0.0, 0.0);
    for i in 1..pq.len() {
        a += (pq[i].1 / pq[i].0).ln();
        b += (pq[i - 1].0 / pq[i].1).ln();
        rec.push(a);
        pos.push(b);
    }
    let recurrence = series(&rec, opts);
    let positivity = series(&pos, opts);
    let ps: Vec<f64> = pq.iter().map(|v| v.0).collect();
    let qs: Vec<f64> = pq.iter().map(|v| v.1).collect();
    let lim_p = tail_limit(&ps, opts.limit_tol);
    let lim_q = tail_limit(&qs, opts.limit_tol);
    let blocks: Vec<f64> = pq[pq.len() / 2..]
        .chunks_exact(3)
        .map(|c| c.iter().map(|(p, q)| (q / p).ln()).sum())
        .collect();
    let block_log_ratio = blocks.iter().sum::<f64>() / blocks.len().max(1) as f64;

    let verdict = if recurrence.status == SeriesStatus::Converges {
        Verdict::Transient
    } else if matches!((lim_p, lim_q), (Some(lp), Some(lq)) if lp < lq - opts.limit_tol) {
        Verdict::GeometricallyErgodic
    } else if positivity.status == SeriesStatus::Converges {
        Verdict::PositiveRecurrent
    } else if recurrence.status == SeriesStatus::Diverges && positivity.status == SeriesStatus::Diverges {
        Verdict::RecurrentNull
    } else {
        Verdict::Inconclusive
    };
    let last = *pq.last().unwrap();
    Ok(WalkClassification {
        verdict,
        recurrence,
        positivity,
        lim_p,
        lim_q,
        p_at_m: last.0,
        q_at_m: last.1,
        block_log_ratio,
        options: *opts,
    })
}

/// Exact law of the state after `steps` steps from `x0` (index `m-1` holds `m`).
pub fn state_distribution(spec: &BirthDeathSpec, x0: i64, steps: usize) -> Result<Vec<f64>> {
    if x0 < 1 {
        return Err(Error::InvalidInput(format!("start must be >= 1, got {x0}")));
    }
    let top = x0 + steps as i64;
    let pq = spec.probs_upto(top + 1)?;
    let mut cur = vec![0.0; top as usize + 1];
    cur[x0 as usize - 1] = 1.0;
    let mut next = vec![0.0; cur.len()];
    for t in 0..steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        let reach = (x0 as usize + t).min(cur.len());
        for i in 0..reach {
            let mass = cur[i];
            if mass == 0.0 {
                continue;
            }
            let (p, q) = pq[i];
            next[i + 1] += mass * p;
            if i > 0 {
                next[i - 1] += mass * q;
            }
            next[i] += mass * (1.0 - p - q);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Smallest `m` with `P[X <= m] >= 1/2` under a distribution from
/// [`state_distribution`].
pub fn distribution_median(dist: &[f64]) -> i64 {
    let mut acc = 0.0;
    for (i, p) in dist.iter().enumerate() {
        acc += p;
        if acc >= 0.5 {
            return i as i64 + 1;
        }
    }
    dist.len() as i64
}

/// Report of the homogeneous-weight sufficient condition
/// `E[min{1, kZ}] > E[min{1, Z/k}]`, `Z = W1/W2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Prop1Report {
    pub k: f64,
    pub upper: f64,
    pub lower: f64,
    pub difference: f64,
    pub std_error: f64,
    /// `difference / std_error`; infinite for exact evaluations.
    pub z_score: f64,
    pub p_estimate: f64,
    pub q_estimate: f64,
    pub classification: Option<WalkClassification>,
    pub conclusive: bool,
}

/// Check the sufficient inequality on a lattice target with tail ratio
/// `pi(m+1)/pi(m) -> 1/k`, symmetric walk, homogeneous weights.
///
/// In Monte Carlo mode both expectations use the same paired draws.
pub fn verify_prop1(weights: &WeightModel, n: usize, k: f64, mode: EvalMode, opts: &ClassifyOptions) -> Result<Prop1Report> {
    if !weights.is_homogeneous() {
        return Err(Error::InvalidInput("the sufficient condition needs homogeneous weights".into()));
    }
    if !(k >= 1.0) {
        return Err(Error::InvalidInput(format!("k must be at least 1, got {k}")));
    }
    let x = State::Integer(1);
    let (upper, lower, diff, se) = match mode {
        EvalMode::Exact => {
            let u = weights.expected_min_ratio(&x, &x, n, k, mode)?.value;
            let l = weights.expected_min_ratio(&x, &x, n, 1.0 / k, mode)?.value;
            (u, l, u - l, 0.0)
        }
        EvalMode::MonteCarlo { draws, rng } => {
            let mut g = rng.generator();
            let (mut su, mut sl, mut sd, mut sd2) = (0.0, 0.0, 0.0, 0.0);
            let lk = k.ln();
            for _ in 0..draws {
                let lw = weights.sample_log(&x, n, &mut g)?;
                let lu = weights.sample_log(&x, n, &mut g)?;
                let lz = lu - lw;
                let a = (lk + lz).min(0.0).exp();
                let b = (lz - lk).min(0.0).exp();
                su += a;
                sl += b;
                sd += a - b;
                sd2 += (a - b) * (a - b);
            }
            let nf = draws as f64;
            let md = sd / nf;
            let var = ((sd2 - nf * md * md) / (nf - 1.0)).max(0.0);
            (su / nf, sl / nf, md, (var / nf).sqrt())
        }
    };
    let z = if se > 0.0 { diff / se } else if diff > 0.0 { f64::INFINITY } else { 0.0 };
    // symmetric walk: p = E[min{1, Z/k}] / 2, q = E[min{1, kZ}] / 2 in the tail
    let (p, q) = (0.5 * lower, 0.5 * upper);
    let conclusive = if se > 0.0 { z >= 5.0 } else { diff > 0.0 };
    let classification = if conclusive {
        Some(classify(&BirthDeathSpec::Constant { p, q }, opts)?)
    } else {
        None
    };
    Ok(Prop1Report {
        k,
        upper,
        lower,
        difference: diff,
        std_error: se,
        z_score: z,
        p_estimate: p,
        q_estimate: q,
        classification,
        conclusive,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AveragedWeightsRow {
    pub n: usize,
    pub classification: WalkClassification,
    /// Observed `lim q / lim p` when both limits exist.
    pub observed_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AveragedWeightsReport {
    pub theta: f64,
    pub rows: Vec<AveragedWeightsRow>,
    /// `l = lim eps_{m-1}/eps_m` estimated at the truncation, when it settles.
    pub l_estimate: Option<f64>,
    /// Predicted `lim q / lim p` from the limiting acceptance probabilities.
    pub predicted_ratio: Option<f64>,
}

/// Classify the noisy chain for binomially averaged weights and every `N`.
pub fn verify_averaged_weights(
    b: Sequence,
    eps: Sequence,
    theta: f64,
    n_list: &[usize],
    opts: &ClassifyOptions,
) -> Result<AveragedWeightsReport> {
    let target = TargetSpec::half_geometric();
    let weights = WeightModel::BinomialAverage { b, eps: eps.clone() };
    let mut rows = Vec::new();
    for &n in n_list {
        let spec = noisy_birth_death(target.clone(), theta, weights.clone(), n)?;
        let c = classify(&spec, opts)?;
        let observed_ratio = match (c.lim_p, c.lim_q) {
            (Some(p), Some(q)) if p > 0.0 => Some(q / p),
            _ => None,
        };
        rows.push(AveragedWeightsRow {
            n,
            classification: c,
            observed_ratio,
        });
    }
    let ratio_at = |m: i64| -> Result<f64> { Ok(eps.value(m - 1)? / eps.value(m)?) };
    let m = opts.m;
    let window: Vec<f64> = ((m - WINDOW as i64 + 1)..=m).map(ratio_at).collect::<Result<_>>()?;
    let spread = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - window.iter().cloned().fold(f64::INFINITY, f64::min);
    let l_estimate = if spread <= 1e-3 * window[0].abs().max(1.0) {
        Some(2.0 * ratio_at(m)? - ratio_at(m / 2)?)
    } else {
        None
    };
    // the geometric target has pi(m-1)/pi(m) = 2
    let predicted_ratio = l_estimate.map(|l| {
        let down = (1.0 - theta) * (2.0 * theta / (1.0 - theta) * l).min(1.0);
        let up = theta * ((1.0 - theta) / (2.0 * theta) / l).min(1.0);
        down / up
    });
    Ok(AveragedWeightsReport {
        theta,
        rows,
        l_estimate,
        predicted_ratio,
    })
}

/// Median over `chains` seeded noisy chains of the state after `steps`.
pub fn simulated_median(kernel: &KernelSpec, x0: i64, steps: usize, chains: usize, seed: u64) -> Result<f64> {
    let streams = RngStream::new(seed, 0).split(chains);
    let mut ends: Vec<i64> = streams
        .par_iter()
        .map(|s| {
            let t = crate::chain::run_chain(kernel, State::Integer(x0), steps, *s)?;
            Ok(t.last().as_integer().expect("lattice chain"))
        })
        .collect::<Result<_>>()?;
    ends.sort_unstable();
    let n = ends.len();
    Ok(if n % 2 == 1 {
        ends[n / 2] as f64
    } else {
        0.5 * (ends[n / 2 - 1] + ends[n / 2]) as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig7_weights() -> WeightModel {
        let eps = 2.0 - 3f64.sqrt();
        WeightModel::TwoPointHomogeneous { b: 6.0 * eps, eps }
    }

    #[test]
    fn fig7_probabilities() {
        let spec = noisy_birth_death(TargetSpec::half_geometric(), 0.75, fig7_weights(), 1).unwrap();
        for m in [2, 3, 10, 500] {
            let (p, q) = spec.probs(m).unwrap();
            assert!((q - 0.25).abs() < 1e-12);
            assert!((p - 0.254_087).abs() < 1e-6);
        }
        assert_eq!(spec.probs(1).unwrap().1, 0.0);
    }

    #[test]
    fn unit_weights_half_geometric() {
        let spec = noisy_birth_death(TargetSpec::half_geometric(), 0.5, WeightModel::Unit, 1).unwrap();
        let (p, q) = spec.probs(7).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
        assert!((q - 0.5).abs() < 1e-15);
        let c = classify(&spec, &ClassifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::GeometricallyErgodic);
    }

    #[test]
    fn constant_chains() {
        let c = |p, q| classify(&BirthDeathSpec::Constant { p, q }, &ClassifyOptions::default()).unwrap();
        assert_eq!(c(0.25, 0.5).verdict, Verdict::GeometricallyErgodic);
        assert_eq!(c(0.5, 0.25).verdict, Verdict::Transient);
        assert_eq!(c(0.3, 0.3).verdict, Verdict::RecurrentNull);
    }

    #[test]
    fn fig7_is_transient() {
        let spec = noisy_birth_death(TargetSpec::half_geometric(), 0.75, fig7_weights(), 1).unwrap();
        let c = classify(&spec, &ClassifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Transient);
    }

    #[test]
    fn zero_birth_probability_is_invalid() {
        let spec = BirthDeathSpec::Table {
            p: vec![0.5, 0.0],
            q: vec![0.0, 0.5],
        };
        assert!(matches!(classify(&spec, &ClassifyOptions::default()), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn small_truncation_rejected() {
        let o = ClassifyOptions {
            m: 10,
            ..ClassifyOptions::default()
        };
        assert!(classify(&BirthDeathSpec::Constant { p: 0.2, q: 0.6 }, &o).is_err());
    }

    #[test]
    fn non_enumerable_weights_rejected() {
        let r = noisy_birth_death(
            TargetSpec::half_geometric(),
            0.5,
            WeightModel::HomogeneousLogNormal { sigma2: 1.0 },
            1,
        );
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn distribution_sums_to_one() {
        let spec = BirthDeathSpec::Constant { p: 0.3, q: 0.4 };
        let d = state_distribution(&spec, 5, 200).unwrap();
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // one step from 5
        let d1 = state_distribution(&spec, 5, 1).unwrap();
        assert!((d1[5] - 0.3).abs() < 1e-15 && (d1[3] - 0.4).abs() < 1e-15 && (d1[4] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn prop3_three_cycle_orders() {
        // eps_{m-1}/eps_m is O(m^2) when m = 0 mod 3 and O(1/m) otherwise:
        // down moves from multiples of 3 are easy, up moves into them hard
        let spec = noisy_birth_death(
            TargetSpec::half_geometric(),
            0.5,
            WeightModel::TwoPointInhomogeneous {
                b: 4.0,
                eps: Sequence::PeriodicPower,
            },
            1,
        )
        .unwrap();
        let ratios = |start: i64| -> Vec<f64> {
            (start..start + 3)
                .map(|m| {
                    let (p, q) = spec.probs(m).unwrap();
                    q / p
                })
                .collect()
        };
        // the same ordering repeats every third state: smallest q/p at
        // m = 1 mod 3, largest at m = 2 mod 3
        for start in [30, 300, 3000] {
            let r = ratios(start);
            assert!(r[1] < r[0] && r[0] < r[2], "{start}: {r:?}");
        }
    }
}
