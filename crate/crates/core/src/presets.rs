//! Named model presets for the lattice examples, the Gaussian examples and
//! the state-space example.

use serde::Serialize;

use crate::discrete_walk::{marginal_birth_death, noisy_birth_death, BirthDeathSpec};
use crate::error::{Error, Result};
use crate::hmm_smc::{simulate_lgssm, LgssmParams, PriorBox};
use crate::kernels::KernelKind;
use crate::proposal::ProposalSpec;
use crate::rng::RngStream;
use crate::state::State;
use crate::target::TargetSpec;
use crate::weights::{Sequence, WeightModel};

/// Lower atom of the small-`theta` lattice example.
pub fn fig7_left_eps() -> f64 {
    2.0 - 3f64.sqrt()
}

/// `(theta, weights)` of the lattice example with homogeneous two-point
/// weights `b = 6 eps`, `eps = 2 - sqrt(3)`, `theta = 0.75`.
pub fn fig7_left() -> (f64, WeightModel) {
    let eps = fig7_left_eps();
    (0.75, WeightModel::TwoPointHomogeneous { b: 6.0 * eps, eps })
}

/// `theta = 0.5`, `b = 4`, periodic lower atoms `eps_m = m^{-(3 - m mod 3)}`.
pub fn fig7_center() -> (f64, WeightModel) {
    (
        0.5,
        WeightModel::TwoPointInhomogeneous {
            b: 4.0,
            eps: Sequence::PeriodicPower,
        },
    )
}

/// `theta = 0.25`, `b = 30`, periodic lower atoms.
pub fn fig7_right() -> (f64, WeightModel) {
    (
        0.25,
        WeightModel::TwoPointInhomogeneous {
            b: 30.0,
            eps: Sequence::PeriodicPower,
        },
    )
}

/// Homogeneous two-point weights built from a lower atom `eps`, with
/// `theta = (1 - eps + eps^2)/(1 - eps + 3 eps^2)` and `b = eps + (1 - eps)/eps`.
pub fn prop2_proof(eps: f64) -> Result<(f64, WeightModel)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0,1), got {eps}")));
    }
    let theta = (1.0 - eps + eps * eps) / (1.0 - eps + 3.0 * eps * eps);
    let b = eps + (1.0 - eps) / eps;
    Ok((theta, WeightModel::TwoPointHomogeneous { b, eps }))
}

/// Binomially averaged weights with `b_m = m`, `eps_m = 1/m`.
pub fn averaged_reciprocal() -> WeightModel {
    WeightModel::BinomialAverage {
        b: Sequence::Identity,
        eps: Sequence::Reciprocal,
    }
}

/// Binomially averaged weights with `b_m = m` and periodic `eps_m`.
pub fn averaged_periodic() -> WeightModel {
    WeightModel::BinomialAverage {
        b: Sequence::Identity,
        eps: Sequence::PeriodicPower,
    }
}

/// State-space example used for particle-marginal runs.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct HmmSetup {
    pub truth: LgssmParams,
    pub t_len: usize,
    pub data_seed: u64,
    pub prior: PriorBox,
}

impl Default for HmmSetup {
    fn default() -> Self {
        HmmSetup {
            truth: LgssmParams {
                x0: 0.0,
                a: 0.9,
                sigma2_x: 1.0,
                sigma2_y: 1.0,
            },
            t_len: 50,
            data_seed: 1,
            prior: PriorBox {
                lower: [-10.0, -1.0, 0.01, 0.01],
                upper: [10.0, 1.0, 10.0, 10.0],
            },
        }
    }
}

impl HmmSetup {
    /// Simulated observation series.
    pub fn observations(&self) -> Result<Vec<f64>> {
        self.truth.validate()?;
        let mut g = RngStream::new(self.data_seed, 0).generator();
        Ok(simulate_lgssm(&self.truth, self.t_len, &mut g)?.1)
    }
}

/// Random-walk variances on `[x0, a, ln sigma2_x, ln sigma2_y]`.
pub const PMMH_STEP_VARIANCE: [f64; 4] = [1.2, 0.012, 0.4, 0.4];

/// Model part of a run preset.
#[derive(Clone, Debug)]
pub struct RunPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub target: TargetSpec,
    pub proposal: ProposalSpec,
    pub weights: WeightModel,
    pub kernels: Vec<KernelKind>,
    pub n_values: Vec<usize>,
    pub iterations: usize,
    pub burnin: usize,
    pub seeds: Vec<u64>,
    pub x0: State,
    pub hmm: Option<HmmSetup>,
}

pub const RUN_PRESETS: &[(&str, &str)] = &[
    ("fig1", "noisy chain, N(0,1) target, N(x,4) walk, log-normal weights (sigma^2 = 5), N = 10, 100, 1000"),
    ("pm-lognormal", "pseudo-marginal chain on the fig1 model with N = 10, 2e5 iterations"),
    ("gaussian-marginal", "marginal chain, N(0,1) target, N(x,4) walk"),
    ("fig7-left", "lattice pi(m) = 2^-m, theta = 0.75, two-point weights b = 6 eps, eps = 2 - sqrt(3)"),
    ("fig7-center", "lattice pi(m) = 2^-m, theta = 0.5, two-point weights b = 4, periodic eps_m"),
    ("fig7-right", "lattice pi(m) = 2^-m, theta = 0.25, two-point weights b = 30, periodic eps_m"),
    ("prop2-proof", "lattice, homogeneous two-point weights from eps = 0.2 with matching theta and b"),
    ("lattice-marginal", "marginal chain on pi(m) = 2^-m with a symmetric walk, 1e6 iterations"),
    ("prop6", "lattice, theta = 0.5, binomially averaged weights b_m = m, eps_m = 1/m, N = 1, 2, 5"),
    ("prop7", "lattice, theta = 0.5, binomially averaged weights b_m = m, periodic eps_m, N = 1, 2, 5"),
    ("pmmh", "linear-Gaussian state-space posterior, T = 50, particle filter with N = 100"),
];

pub const CLASSIFY_PRESETS: &[(&str, &str)] = &[
    ("prop2", "noisy chain of the fig7-left model"),
    ("prop2-proof", "noisy chain of the prop2-proof model"),
    ("prop3", "noisy chain of the fig7-center model"),
    ("fig7-right", "noisy chain of the fig7-right model"),
    ("prop6", "noisy chain with b_m = m, eps_m = 1/m, theta = 0.5 (N from --N, default 1)"),
    ("prop7", "noisy chain with b_m = m, periodic eps_m, theta = 0.5 (N from --N, default 1)"),
    ("marginal-geometric", "marginal chain on pi(m) = 2^-m, symmetric walk"),
];

fn unknown(name: &str) -> Error {
    Error::config("preset", format!("unknown preset {name:?}"))
}

fn lattice(
    name: &'static str,
    description: &'static str,
    (theta, weights): (f64, WeightModel),
    kernels: Vec<KernelKind>,
    n_values: Vec<usize>,
    iterations: usize,
) -> RunPreset {
    RunPreset {
        name,
        description,
        target: TargetSpec::half_geometric(),
        proposal: ProposalSpec::integer_walk(theta),
        weights,
        kernels,
        n_values,
        iterations,
        burnin: 0,
        seeds: vec![1],
        x0: State::Integer(10),
        hmm: None,
    }
}

/// Resolve a run preset by name.
pub fn run_preset(name: &str) -> Result<RunPreset> {
    let description = RUN_PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, d)| *d)
        .ok_or_else(|| unknown(name))?;
    let gaussian = |name, kernels, n_values, iterations, weights| RunPreset {
        name,
        description,
        target: TargetSpec::standard_normal(),
        proposal: ProposalSpec::gaussian_walk(4.0),
        weights,
        kernels,
        n_values,
        iterations,
        burnin: 1000,
        seeds: vec![1, 2, 3],
        x0: State::scalar(0.0),
        hmm: None,
    };
    let log_normal = WeightModel::HomogeneousLogNormal { sigma2: 5.0 };
    let all = KernelKind::ALL.to_vec();
    Ok(match name {
        "fig1" => gaussian("fig1", vec![KernelKind::Noisy], vec![10, 100, 1000], 100_000, log_normal),
        "pm-lognormal" => gaussian("pm-lognormal", vec![KernelKind::PseudoMarginal], vec![10], 200_000, log_normal),
        "gaussian-marginal" => gaussian("gaussian-marginal", vec![KernelKind::Marginal], vec![1], 100_000, WeightModel::Unit),
        "fig7-left" => lattice("fig7-left", description, fig7_left(), all, vec![1], 10_000),
        "fig7-center" => lattice("fig7-center", description, fig7_center(), all, vec![1], 10_000),
        "fig7-right" => lattice("fig7-right", description, fig7_right(), all, vec![1], 10_000),
        "prop2-proof" => lattice("prop2-proof", description, prop2_proof(0.2)?, all, vec![1], 10_000),
        "lattice-marginal" => {
            let mut p = lattice(
                "lattice-marginal",
                description,
                (0.5, WeightModel::Unit),
                vec![KernelKind::Marginal],
                vec![1],
                1_000_000,
            );
            p.burnin = 10_000;
            p.x0 = State::Integer(1);
            p
        }
        "prop6" => lattice("prop6", description, (0.5, averaged_reciprocal()), all, vec![1, 2, 5], 10_000),
        "prop7" => lattice("prop7", description, (0.5, averaged_periodic()), all, vec![1, 2, 5], 10_000),
        "pmmh" => {
            let hmm = HmmSetup::default();
            let observations = hmm.observations()?;
            RunPreset {
                name: "pmmh",
                description,
                target: TargetSpec::LgssmPosterior(crate::hmm_smc::LgssmPosterior {
                    prior: hmm.prior.clone(),
                    observations: observations.clone(),
                }),
                proposal: ProposalSpec::GaussianWalk {
                    step_variance: PMMH_STEP_VARIANCE.to_vec(),
                },
                weights: WeightModel::SmcLikelihood { observations },
                kernels: all,
                n_values: vec![100],
                iterations: 20_000,
                burnin: 2_000,
                seeds: vec![1, 2, 3],
                x0: State::Vector(hmm.truth.to_transformed()),
                hmm: Some(hmm),
            }
        }
        _ => return Err(unknown(name)),
    })
}

/// Resolve a birth-death preset; `n` defaults to 1 where it applies.
pub fn classify_preset(name: &str, n: Option<usize>) -> Result<BirthDeathSpec> {
    let n = n.unwrap_or(1);
    let target = TargetSpec::half_geometric();
    let noisy = |(theta, w): (f64, WeightModel)| noisy_birth_death(target.clone(), theta, w, n);
    match name {
        "prop2" => noisy(fig7_left()),
        "prop2-proof" => noisy(prop2_proof(0.2)?),
        "prop3" => noisy(fig7_center()),
        "fig7-right" => noisy(fig7_right()),
        "prop6" => noisy((0.5, averaged_reciprocal())),
        "prop7" => noisy((0.5, averaged_periodic())),
        "marginal-geometric" => marginal_birth_death(target.clone(), 0.5),
        _ => Err(unknown(name)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proof_preset_matches_worked_example() {
        let (theta, w) = prop2_proof(0.2).unwrap();
        assert!((theta - 0.84 / 0.92).abs() < 1e-15);
        match w {
            WeightModel::TwoPointHomogeneous { b, eps } => {
                assert!((b - 4.2).abs() < 1e-12);
                assert_eq!(eps, 0.2);
                // b = eps * 2 theta / (1 - theta)
                assert!((b - eps * 2.0 * theta / (1.0 - theta)).abs() < 1e-12);
            }
            _ => panic!("wrong family"),
        }
    }

    #[test]
    fn every_listed_preset_resolves() {
        for (name, _) in RUN_PRESETS {
            let p = run_preset(name).unwrap();
            assert_eq!(p.name, *name);
            p.weights.validate().unwrap();
            p.proposal.validate().unwrap();
            assert!(p.target.in_support(&p.x0));
        }
        for (name, _) in CLASSIFY_PRESETS {
            classify_preset(name, Some(2)).unwrap();
        }
        assert!(matches!(run_preset("nope"), Err(Error::Config { .. })));
    }

    #[test]
    fn fig7_weights_have_mean_one() {
        for (_, w) in [fig7_left(), fig7_center(), fig7_right()] {
            for m in 1..40 {
                let e = w.expectation(&State::Integer(m), 1, |v| v, crate::weights::EvalMode::Exact).unwrap();
                assert!((e.value - 1.0).abs() < 1e-12);
            }
        }
    }
}
