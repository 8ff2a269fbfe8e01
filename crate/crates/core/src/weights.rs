//! Families of mean-one positive weights `W_{x,N}`.
//!
//! Every family here is either a single unbiased draw (`N` ignored) or the
//! arithmetic mean of `N` i.i.d. base draws. The two-point families have
//! finite support and can be enumerated exactly; the log-normal and SMC
//! families are handled by Monte Carlo.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::hmm_smc::{bootstrap_pf_loglik, kalman_loglik, LgssmParams};
use crate::rng::RngStream;
use crate::state::State;

mod sequence;

pub use sequence::Sequence;

/// A state-indexed family `Q_{x,N}` of mean-one weight distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum WeightModel {
    /// `W ≡ 1`.
    Unit,
    /// `W = exp(G)`, `G ~ N(-sigma2/2, sigma2)`, averaged over `N` draws.
    HomogeneousLogNormal { sigma2: f64 },
    /// `(b - eps) Ber(s) + eps` with `s = (1 - eps)/(b - eps)`, averaged.
    TwoPointHomogeneous { b: f64, eps: f64 },
    /// Two-point weights with a state-dependent lower atom `eps_m`, averaged.
    TwoPointInhomogeneous { b: f64, eps: Sequence },
    /// `((b_m - eps_m)/N) Bin(N, s_m) + eps_m`.
    BinomialAverage { b: Sequence, eps: Sequence },
    /// Ratio of the bootstrap particle-filter likelihood to the exact
    /// Kalman likelihood for a linear-Gaussian state-space model.
    SmcLikelihood { observations: Vec<f64> },
}

/// How an expectation over weights is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { draws: usize, rng: RngStream },
}

impl EvalMode {
    pub fn mc(draws: usize, seed: u64) -> Self {
        EvalMode::MonteCarlo {
            draws,
            rng: RngStream::new(seed, 0),
        }
    }
}

/// A value with its Monte Carlo standard error (zero when exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_error: 0.0,
            exact: true,
        }
    }

    fn from_samples(sum: f64, sum_sq: f64, n: usize) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            std_error: (var / nf).sqrt(),
            exact: false,
        }
    }
}

/// Two-point base law `(b - eps) Ber(s) + eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct TwoPoint {
    pub b: f64,
    pub eps: f64,
    pub s: f64,
}

impl TwoPoint {
    pub(crate) fn new(b: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidInput(format!("eps must lie in (0,1], got {eps}")));
        }
        // eps = 1 forces s = 0: the weight is identically one.
        if eps == 1.0 {
            return Ok(TwoPoint { b, eps, s: 0.0 });
        }
        if !(b > 1.0) || !b.is_finite() {
            return Err(Error::InvalidInput(format!("b must exceed 1, got {b}")));
        }
        Ok(TwoPoint {
            b,
            eps,
            s: (1.0 - eps) / (b - eps),
        })
    }

    /// Atoms of the `N`-average: `eps + (b - eps) j / N` with `Bin(N, s)` mass.
    pub(crate) fn average_atoms(&self, n: usize) -> Vec<(f64, f64)> {
        if self.s == 0.0 {
            return vec![(self.eps, 1.0)];
        }
        let pmf = binomial_pmf(n, self.s);
        pmf.into_iter()
            .enumerate()
            .map(|(j, p)| (self.eps + (self.b - self.eps) * j as f64 / n as f64, p))
            .collect()
    }
}

/// `Bin(n, s)` probabilities computed in log space.
pub(crate) fn binomial_pmf(n: usize, s: f64) -> Vec<f64> {
    if s <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if s >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let (ls, lf) = (s.ln(), (-s).ln_1p());
    let mut log_choose = 0.0;
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            log_choose += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        out.push((log_choose + j as f64 * ls + (n - j) as f64 * lf).exp());
    }
    out
}

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidInput("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

impl WeightModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightModel::Unit => Ok(()),
            WeightModel::HomogeneousLogNormal { sigma2 } => {
                if *sigma2 >= 0.0 && sigma2.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!("sigma2 must be finite and >= 0, got {sigma2}")))
                }
            }
            WeightModel::TwoPointHomogeneous { b, eps } => {
                if *eps >= 1.0 {
                    return Err(Error::InvalidInput("homogeneous eps must be below 1".into()));
                }
                TwoPoint::new(*b, *eps).map(|_| ())
            }
            WeightModel::TwoPointInhomogeneous { b, .. } => {
                if *b > 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!("b must exceed 1, got {b}")))
                }
            }
            WeightModel::BinomialAverage { .. } => Ok(()),
            WeightModel::SmcLikelihood { observations } => {
                if observations.is_empty() {
                    Err(Error::InvalidInput("SMC weights need at least one observation".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The law of `W_{x,N}` does not depend on `x`.
    pub fn is_homogeneous(&self) -> bool {
        matches!(
            self,
            WeightModel::Unit
                | WeightModel::HomogeneousLogNormal { .. }
                | WeightModel::TwoPointHomogeneous { .. }
        )
    }

    pub fn is_enumerable(&self) -> bool {
        matches!(
            self,
            WeightModel::Unit
                | WeightModel::TwoPointHomogeneous { .. }
                | WeightModel::TwoPointInhomogeneous { .. }
                | WeightModel::BinomialAverage { .. }
        )
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, WeightModel::Unit)
    }

    /// Base two-point law at `x` for the finite-support families.
    pub(crate) fn two_point_at(&self, x: &State) -> Result<Option<TwoPoint>> {
        let lattice = |x: &State| -> Result<i64> {
            match x {
                State::Integer(m) if *m >= 1 => Ok(*m),
                _ => Err(Error::InvalidInput(format!(
                    "state-dependent two-point weights need a positive integer state, got {x}"
                ))),
            }
        };
        Ok(match self {
            WeightModel::TwoPointHomogeneous { b, eps } => Some(TwoPoint::new(*b, *eps)?),
            WeightModel::TwoPointInhomogeneous { b, eps } => {
                let m = lattice(x)?;
                Some(TwoPoint::new(*b, eps.value(m)?)?)
            }
            WeightModel::BinomialAverage { b, eps } => {
                let m = lattice(x)?;
                let e = eps.value(m)?;
                let bm = b.value(m)?;
                Some(TwoPoint::new(bm, e)?)
            }
            _ => None,
        })
    }

    /// Draw `log W_{x,N}`.
    pub fn sample_log<R: Rng + ?Sized>(&self, x: &State, n: usize, rng: &mut R) -> Result<f64> {
        require_n(n)?;
        let w = match self {
            WeightModel::Unit => return Ok(0.0),
            WeightModel::HomogeneousLogNormal { sigma2 } => {
                let sd = sigma2.sqrt();
                let mu = -0.5 * sigma2;
                let mut acc = 0.0;
                for _ in 0..n {
                    let z: f64 = rng.sample(StandardNormal);
                    acc += (mu + sd * z).exp();
                }
                acc / n as f64
            }
            WeightModel::SmcLikelihood { observations } => {
                let params = match x {
                    State::Vector(v) => LgssmParams::from_transformed(v)?,
                    State::Integer(_) => {
                        return Err(Error::InvalidInput("SMC weights need a vector state".into()))
                    }
                };
                let pf = bootstrap_pf_loglik(&params, observations, n, rng);
                if pf.loglik == f64::NEG_INFINITY {
                    return Err(Error::NonPositiveWeight(0.0));
                }
                return Ok(pf.loglik - kalman_loglik(&params, observations));
            }
            _ => {
                let tp = self.two_point_at(x)?.expect("two-point family");
                let mut hits = 0usize;
                for _ in 0..n {
                    if rng.random::<f64>() < tp.s {
                        hits += 1;
                    }
                }
                tp.eps + (tp.b - tp.eps) * hits as f64 / n as f64
            }
        };
        if w > 0.0 && w.is_finite() {
            Ok(w.ln())
        } else {
            Err(Error::NonPositiveWeight(w))
        }
    }

    /// Draw `W_{x,N}`.
    pub fn sample<R: Rng + ?Sized>(&self, x: &State, n: usize, rng: &mut R) -> Result<f64> {
        let w = self.sample_log(x, n, rng)?.exp();
        if w > 0.0 {
            Ok(w)
        } else {
            Err(Error::NonPositiveWeight(w))
        }
    }

    /// Exact support of `W_{x,N}` as `(value, probability)` pairs.
    pub fn enumerate(&self, x: &State, n: usize) -> Result<Vec<(f64, f64)>> {
        require_n(n)?;
        match self {
            WeightModel::Unit => Ok(vec![(1.0, 1.0)]),
            WeightModel::HomogeneousLogNormal { .. } | WeightModel::SmcLikelihood { .. } => Err(
                Error::Unsupported(format!("{} weights have infinite support", self.family_name())),
            ),
            _ => Ok(self.two_point_at(x)?.expect("two-point family").average_atoms(n)),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            WeightModel::Unit => "unit",
            WeightModel::HomogeneousLogNormal { .. } => "homogeneous_log_normal",
            WeightModel::TwoPointHomogeneous { .. } => "two_point_homogeneous",
            WeightModel::TwoPointInhomogeneous { .. } => "two_point_inhomogeneous",
            WeightModel::BinomialAverage { .. } => "binomial_average",
            WeightModel::SmcLikelihood { .. } => "smc_likelihood",
        }
    }

    /// `E[f(W_{x,N})]`, by enumeration in exact mode or sampling otherwise.
    pub fn expectation<F: Fn(f64) -> f64>(
        &self,
        x: &State,
        n: usize,
        f: F,
        mode: EvalMode,
    ) -> Result<Estimate> {
        match mode {
            EvalMode::Exact => {
                let atoms = self.enumerate(x, n)?;
                Ok(Estimate::exact(atoms.iter().map(|(v, p)| p * f(*v)).sum()))
            }
            EvalMode::MonteCarlo { draws, rng } => {
                if draws == 0 {
                    return Err(Error::InvalidInput("need at least one Monte Carlo draw".into()));
                }
                let mut g = rng.generator();
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..draws {
                    let v = f(self.sample(x, n, &mut g)?);
                    s += v;
                    s2 += v * v;
                }
                Ok(Estimate::from_samples(s, s2, draws))
            }
        }
    }

    /// Closed forms for a single log-normal draw, used by exact mode.
    fn log_normal_single(&self, n: usize) -> Option<f64> {
        match self {
            WeightModel::HomogeneousLogNormal { sigma2 } if n == 1 => Some(*sigma2),
            _ => None,
        }
    }

    /// `E[W_{x,N}^{-p}]`.
    pub fn negative_moment(&self, x: &State, n: usize, p: f64, mode: EvalMode) -> Result<Estimate> {
        if !(p > 0.0) {
            return Err(Error::InvalidInput(format!("p must be positive, got {p}")));
        }
        if let (EvalMode::Exact, Some(s2)) = (mode, self.log_normal_single(n)) {
            // E[exp(-pG)] with G ~ N(-s2/2, s2)
            return Ok(Estimate::exact((0.5 * p * (p + 1.0) * s2).exp()));
        }
        self.expectation(x, n, |w| w.powf(-p), mode)
    }

    /// `E[W_{x,N}^q]`.
    pub fn moment(&self, x: &State, n: usize, q: f64, mode: EvalMode) -> Result<Estimate> {
        if let (EvalMode::Exact, Some(s2)) = (mode, self.log_normal_single(n)) {
            return Ok(Estimate::exact((0.5 * q * (q - 1.0) * s2).exp()));
        }
        self.expectation(x, n, |w| w.powf(q), mode)
    }

    /// `P[|W_{x,N} - 1| >= delta]`.
    pub fn tail_probability(&self, x: &State, n: usize, delta: f64, mode: EvalMode) -> Result<Estimate> {
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        if let (EvalMode::Exact, Some(s2)) = (mode, self.log_normal_single(n)) {
            let z = std_normal();
            let sd = s2.sqrt();
            let upper = 1.0 - z.cdf(((1.0 + delta).ln() + 0.5 * s2) / sd);
            let lower = if delta < 1.0 {
                z.cdf(((1.0 - delta).ln() + 0.5 * s2) / sd)
            } else {
                0.0
            };
            return Ok(Estimate::exact(upper + lower));
        }
        self.expectation(x, n, |w| if (w - 1.0).abs() >= delta { 1.0 } else { 0.0 }, mode)
    }

    /// `P[W_{x,N} <= w]`.
    pub fn cdf(&self, x: &State, n: usize, w: f64, mode: EvalMode) -> Result<Estimate> {
        if let (EvalMode::Exact, Some(s2)) = (mode, self.log_normal_single(n)) {
            let v = if w <= 0.0 {
                0.0
            } else {
                std_normal().cdf((w.ln() + 0.5 * s2) / s2.sqrt())
            };
            return Ok(Estimate::exact(v));
        }
        self.expectation(x, n, |v| if v <= w { 1.0 } else { 0.0 }, mode)
    }

    /// `E[W_x 1{W_x > level}]` for a single base draw.
    pub fn truncated_mean(&self, x: &State, level: f64, mode: EvalMode) -> Result<Estimate> {
        if let (EvalMode::Exact, Some(s2)) = (mode, self.log_normal_single(1)) {
            if level <= 0.0 {
                return Ok(Estimate::exact(1.0));
            }
            // size-biased log-normal has log-mean +s2/2
            return Ok(Estimate::exact(
                1.0 - std_normal().cdf((level.ln() - 0.5 * s2) / s2.sqrt()),
            ));
        }
        self.expectation(x, 1, |w| if w > level { w } else { 0.0 }, mode)
    }

    /// `E[min{1, k W_y / W_x}]` with independent weights at `x` and `y`.
    pub fn expected_min_ratio(
        &self,
        x: &State,
        y: &State,
        n: usize,
        k: f64,
        mode: EvalMode,
    ) -> Result<Estimate> {
        if !(k > 0.0) {
            return Err(Error::InvalidInput(format!("k must be positive, got {k}")));
        }
        match mode {
            EvalMode::Exact => {
                let ax = self.enumerate(x, n)?;
                let ay = self.enumerate(y, n)?;
                let mut total = 0.0;
                for (w, pw) in &ax {
                    for (u, pu) in &ay {
                        total += pw * pu * (k * u / w).min(1.0);
                    }
                }
                Ok(Estimate::exact(total))
            }
            EvalMode::MonteCarlo { draws, rng } => {
                let mut g = rng.generator();
                let (mut s, mut s2) = (0.0, 0.0);
                for _ in 0..draws {
                    let lw = self.sample_log(x, n, &mut g)?;
                    let lu = self.sample_log(y, n, &mut g)?;
                    let v = (k.ln() + lu - lw).min(0.0).exp();
                    s += v;
                    s2 += v * v;
                }
                Ok(Estimate::from_samples(s, s2, draws))
            }
        }
    }
}

pub mod conditions;

/// Upper bound on `E[Z^{-p}]` for a positive `Z` with `P[Z <= z] <= M z^alpha`
/// on `(0, gamma)`, `alpha > p`.
pub fn negative_moment_bound(m: f64, alpha: f64, gamma: f64, p: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) || !(p > 0.0) || !(alpha > p) || !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidInput(format!(
            "need 0 < gamma < 1, 0 < p < alpha and finite M >= 0; got M={m}, alpha={alpha}, gamma={gamma}, p={p}"
        )));
    }
    Ok(gamma.powf(-p) + p * m * gamma.powf(alpha - p) / (alpha - p))
}

/// Small-ball bound `prod M_i z^{sum alpha_i}` for a sum of independent
/// positive variables with `P[Z_i <= z] <= M_i z^{alpha_i}`.
pub fn sum_small_ball_bound(bounds: &[(f64, f64)], z: f64) -> f64 {
    let m: f64 = bounds.iter().map(|b| b.0).product();
    let a: f64 = bounds.iter().map(|b| b.1).sum();
    m * z.powf(a)
}
