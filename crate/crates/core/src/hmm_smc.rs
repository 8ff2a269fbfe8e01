//! Linear-Gaussian hidden Markov model: simulation, exact Kalman likelihood,
//! the bootstrap particle filter, and particle marginal MH kernels.
//!
//! ```text
//! X_t = a X_{t-1} + N(0, sigma2_x),   X_0 = x0 known
//! Y_t = X_t + N(0, sigma2_y)
//! ```

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelKind, KernelSpec};
use crate::proposal::ProposalSpec;
use crate::target::TargetSpec;
use crate::weights::WeightModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LgssmParams {
    pub x0: f64,
    pub a: f64,
    pub sigma2_x: f64,
    pub sigma2_y: f64,
}

impl LgssmParams {
    pub fn new(x0: f64, a: f64, sigma2_x: f64, sigma2_y: f64) -> Result<Self> {
        let p = LgssmParams {
            x0,
            a,
            sigma2_x,
            sigma2_y,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.x0.is_finite()
            && self.a.is_finite()
            && self.sigma2_x > 0.0
            && self.sigma2_y > 0.0
            && self.sigma2_x.is_finite()
            && self.sigma2_y.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid state-space parameters {self:?}")))
        }
    }

    /// Parameters from `[x0, a, ln sigma2_x, ln sigma2_y]`.
    pub fn from_transformed(phi: &[f64]) -> Result<Self> {
        if phi.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "expected 4 transformed parameters, got {}",
                phi.len()
            )));
        }
        Self::new(phi[0], phi[1], phi[2].exp(), phi[3].exp())
    }

    pub fn to_transformed(&self) -> Vec<f64> {
        vec![self.x0, self.a, self.sigma2_x.ln(), self.sigma2_y.ln()]
    }
}

fn log_normal_pdf(y: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * PI * var).ln() + (y - mean).powi(2) / var)
}

/// Simulate `(latent states, observations)` of length `t_len`.
pub fn simulate_lgssm<R: Rng + ?Sized>(
    params: &LgssmParams,
    t_len: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    if t_len == 0 {
        return Err(Error::InvalidInput("series length must be at least 1".into()));
    }
    let (sx, sy) = (params.sigma2_x.sqrt(), params.sigma2_y.sqrt());
    let mut x = params.x0;
    let mut xs = Vec::with_capacity(t_len);
    let mut ys = Vec::with_capacity(t_len);
    for _ in 0..t_len {
        let e: f64 = rng.sample(StandardNormal);
        let v: f64 = rng.sample(StandardNormal);
        x = params.a * x + sx * e;
        xs.push(x);
        ys.push(x + sy * v);
    }
    Ok((xs, ys))
}

/// Exact log-likelihood `log l(theta; y_1..y_T)`.
pub fn kalman_loglik(params: &LgssmParams, y: &[f64]) -> f64 {
    let (mut m, mut p) = (params.x0, 0.0);
    let mut ll = 0.0;
    for &yt in y {
        m *= params.a;
        p = params.a * params.a * p + params.sigma2_x;
        let s = p + params.sigma2_y;
        ll += log_normal_pdf(yt, m, s);
        let k = p / s;
        m += k * (yt - m);
        p *= 1.0 - k;
    }
    ll
}

/// Final state of one bootstrap filter pass.
#[derive(Clone, Debug)]
pub struct ParticleSystem {
    pub particles: Vec<f64>,
    /// `log((1/N) sum_i g(y_t | X_t^i))` for each `t`.
    pub log_normalizer_increments: Vec<f64>,
    pub loglik: f64,
    /// Every particle weight vanished at some step; `loglik` is `-inf`.
    pub underflow: bool,
}

/// Multinomial resampling by inversion of the cumulative weights.
fn resample<R: Rng + ?Sized>(particles: &[f64], weights: &[f64], rng: &mut R, out: &mut Vec<f64>) {
    let mut cum = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cum.push(acc);
    }
    out.clear();
    for _ in 0..particles.len() {
        let u = rng.random::<f64>() * acc;
        let i = cum.partition_point(|&c| c <= u).min(particles.len() - 1);
        out.push(particles[i]);
    }
}

/// Bootstrap particle filter with multinomial resampling at every step.
///
/// The exponential of `loglik` is an unbiased estimate of the likelihood.
pub fn bootstrap_pf_loglik<R: Rng + ?Sized>(
    params: &LgssmParams,
    y: &[f64],
    n: usize,
    rng: &mut R,
) -> ParticleSystem {
    let n = n.max(1);
    let sx = params.sigma2_x.sqrt();
    let mut particles = vec![params.x0; n];
    let mut scratch = Vec::with_capacity(n);
    let mut logw = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut incs = Vec::with_capacity(y.len());
    for (t, &yt) in y.iter().enumerate() {
        for (xp, lw) in particles.iter_mut().zip(logw.iter_mut()) {
            let e: f64 = rng.sample(StandardNormal);
            *xp = params.a * *xp + sx * e;
            *lw = log_normal_pdf(yt, *xp, params.sigma2_y);
        }
        let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY || max.is_nan() {
            incs.push(f64::NEG_INFINITY);
            return ParticleSystem {
                particles,
                log_normalizer_increments: incs,
                loglik: f64::NEG_INFINITY,
                underflow: true,
            };
        }
        let mut sum = 0.0;
        for (w, lw) in weights.iter_mut().zip(&logw) {
            *w = (lw - max).exp();
            sum += *w;
        }
        incs.push(max + (sum / n as f64).ln());
        if t + 1 < y.len() {
            resample(&particles, &weights, rng, &mut scratch);
            std::mem::swap(&mut particles, &mut scratch);
        }
    }
    ParticleSystem {
        particles,
        loglik: incs.iter().sum(),
        log_normalizer_increments: incs,
        underflow: false,
    }
}

/// Uniform prior on a box of natural parameters `[x0, a, sigma2_x, sigma2_y]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorBox {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
}

impl PriorBox {
    pub fn validate(&self) -> Result<()> {
        for i in 0..4 {
            if !(self.lower[i] <= self.upper[i]) {
                return Err(Error::InvalidInput(format!("prior box bound {i} is empty")));
            }
        }
        if self.lower[2] <= 0.0 || self.lower[3] <= 0.0 {
            return Err(Error::InvalidInput("variance bounds must be positive".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: &LgssmParams) -> bool {
        let v = [p.x0, p.a, p.sigma2_x, p.sigma2_y];
        (0..4).all(|i| v[i] >= self.lower[i] && v[i] <= self.upper[i])
    }

    /// Unnormalized log prior in the transformed coordinates, including the
    /// Jacobian of the two log-variance maps.
    pub fn log_density_transformed(&self, phi: &[f64]) -> f64 {
        match LgssmParams::from_transformed(phi) {
            Ok(p) if self.contains(&p) => phi[2] + phi[3],
            _ => f64::NEG_INFINITY,
        }
    }
}

/// Posterior over `[x0, a, ln sigma2_x, ln sigma2_y]` with exact likelihood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LgssmPosterior {
    pub prior: PriorBox,
    pub observations: Vec<f64>,
}

impl LgssmPosterior {
    pub fn log_density(&self, phi: &[f64]) -> f64 {
        let lp = self.prior.log_density_transformed(phi);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        let p = LgssmParams::from_transformed(phi).expect("checked by prior");
        lp + kalman_loglik(&p, &self.observations)
    }
}

/// Marginal, pseudo-marginal and noisy kernels for parameter inference.
#[derive(Clone, Debug)]
pub struct PmmhKernels {
    pub marginal: KernelSpec,
    pub pseudo_marginal: KernelSpec,
    pub noisy: KernelSpec,
}

/// Build the three PMMH kernels. The weight model supplies the particle
/// estimate as a ratio to the exact likelihood, which cancels in every
/// acceptance ratio.
pub fn pmmh_kernels(
    prior: PriorBox,
    proposal: ProposalSpec,
    y: Vec<f64>,
    n: usize,
) -> Result<PmmhKernels> {
    prior.validate()?;
    if y.is_empty() {
        return Err(Error::InvalidInput("observation series is empty".into()));
    }
    let target = TargetSpec::LgssmPosterior(LgssmPosterior {
        prior,
        observations: y.clone(),
    });
    let weights = WeightModel::SmcLikelihood { observations: y };
    let make = |kind| KernelSpec {
        kind,
        target: target.clone(),
        proposal: proposal.clone(),
        weights: weights.clone(),
        n,
    };
    Ok(PmmhKernels {
        marginal: make(KernelKind::Marginal),
        pseudo_marginal: make(KernelKind::PseudoMarginal),
        noisy: make(KernelKind::Noisy),
    })
}

/// Write an observation series as CSV with columns `t,y` (`t` from 1).
pub fn write_observations_csv(path: &Path, y: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "y"])?;
    for (t, v) in y.iter().enumerate() {
        w.write_record([(t + 1).to_string(), format!("{v:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a `t,y` CSV written by [`write_observations_csv`] or by hand.
pub fn read_observations_csv(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize::<(usize, f64)>() {
        out.push(rec?.1);
    }
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("{} holds no observations", path.display())));
    }
    Ok(out)
}
