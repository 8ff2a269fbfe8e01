use noisy_mh::hmm_smc::{bootstrap_pf_loglik, kalman_loglik, simulate_lgssm, LgssmParams, LgssmPosterior};
use noisy_mh::presets::HmmSetup;
use noisy_mh::verify::smc_unbiasedness;
use noisy_mh::{run_chain, KernelKind, KernelSpec, ProposalSpec, RngStream, State, TargetSpec, WeightModel};
use proptest::prelude::*;

fn normal_pdf(x: f64, m: f64, v: f64) -> f64 {
    (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
}

/// Likelihood by trapezoidal forward recursion over a uniform state grid.
fn grid_loglik(p: &LgssmParams, y: &[f64]) -> f64 {
    let (lo, hi, k) = (-25.0, 25.0, 2001usize);
    let h = (hi - lo) / (k - 1) as f64;
    let xs: Vec<f64> = (0..k).map(|i| lo + i as f64 * h).collect();
    let wt = |i: usize| if i == 0 || i == k - 1 { 0.5 * h } else { h };
    let mut f: Vec<f64> = xs
        .iter()
        .map(|&x| normal_pdf(x, p.a * p.x0, p.sigma2_x) * normal_pdf(y[0], x, p.sigma2_y))
        .collect();
    for &yt in &y[1..] {
        f = xs
            .iter()
            .map(|&x| (0..k).map(|j| wt(j) * normal_pdf(x, p.a * xs[j], p.sigma2_x) * f[j]).sum::<f64>() * normal_pdf(yt, x, p.sigma2_y))
            .collect();
    }
    (0..k).map(|i| wt(i) * f[i]).sum::<f64>().ln()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn kalman_matches_grid_quadrature(
        x0 in -2.0f64..2.0, a in -0.95f64..0.95, sx in 0.3f64..2.0, sy in 0.3f64..2.0, seed in 0u64..1000
    ) {
        let p = LgssmParams::new(x0, a, sx, sy).unwrap();
        let (_, y) = simulate_lgssm(&p, 3, &mut RngStream::new(seed, 0).generator()).unwrap();
        let d = (kalman_loglik(&p, &y) - grid_loglik(&p, &y)).abs();
        prop_assert!(d < 1e-6, "difference {d}");
    }
}

#[test]
fn single_observation_closed_form() {
    let p = LgssmParams::new(0.0, 0.0, 1.0, 1.0).unwrap();
    let ll = kalman_loglik(&p, &[0.0]);
    assert!((ll + 0.5 * (4.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
    assert!((ll + 1.26551).abs() < 1e-5);
}

#[test]
fn particle_filter_is_unbiased() {
    let p = LgssmParams::new(0.0, 0.9, 1.0, 1.0).unwrap();
    for (i, t) in [2usize, 5, 20].into_iter().enumerate() {
        let (_, y) = simulate_lgssm(&p, t, &mut RngStream::new(60 + i as u64, 0).generator()).unwrap();
        let ns: &[usize] = if t == 2 { &[5] } else { &[10, 50, 200] };
        for (j, &n) in ns.iter().enumerate() {
            let r = smc_unbiasedness(&p, &y, n, 2000, RngStream::new(61, (10 * i + j) as u64)).unwrap();
            assert!(r.z_score.abs() <= 4.0, "T={t} N={n}: mean {} +/- {}", r.mean_ratio, r.std_error);
        }
    }
}

#[test]
fn log_weight_variance_falls_with_particles() {
    let p = LgssmParams::new(0.0, 0.9, 1.0, 1.0).unwrap();
    let (_, y) = simulate_lgssm(&p, 20, &mut RngStream::new(62, 0).generator()).unwrap();
    let exact = kalman_loglik(&p, &y);
    let streams = RngStream::new(63, 0).split(500);
    let vars: Vec<f64> = [10usize, 50, 200]
        .iter()
        .map(|&n| {
            let v: Vec<f64> = streams
                .iter()
                .map(|s| bootstrap_pf_loglik(&p, &y, n, &mut s.generator()).loglik - exact)
                .collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        })
        .collect();
    assert!(vars.windows(2).all(|w| w[1] < w[0]), "{vars:?}");
}

#[test]
fn marginal_chain_recovers_grid_posterior_mean() {
    let setup = HmmSetup::default();
    let y = setup.observations().unwrap();
    let truth = setup.truth;
    // grid posterior of a under the flat prior on [-1, 1], other parameters fixed
    let k = 4001;
    let grid: Vec<f64> = (0..k).map(|i| -1.0 + 2.0 * i as f64 / (k - 1) as f64).collect();
    let ll: Vec<f64> = grid
        .iter()
        .map(|&a| kalman_loglik(&LgssmParams { a, ..truth }, &y))
        .collect();
    let top = ll.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ll.iter().map(|l| (l - top).exp()).collect();
    let oracle = grid.iter().zip(&w).map(|(a, w)| a * w).sum::<f64>() / w.iter().sum::<f64>();

    let target = TargetSpec::LgssmPosterior(LgssmPosterior {
        prior: setup.prior.clone(),
        observations: y.clone(),
    });
    let proposal = ProposalSpec::GaussianWalk {
        step_variance: vec![0.0, 0.01, 0.0, 0.0],
    };
    let kernel = KernelSpec::new(KernelKind::Marginal, target, proposal, WeightModel::Unit, 1);
    let trace = run_chain(&kernel, State::Vector(truth.to_transformed()), 40_000, RngStream::new(64, 0)).unwrap();
    let a = &trace.coordinate(1)[4000..];
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    // batch-means standard error
    let batches: Vec<f64> = a.chunks_exact(a.len() / 40).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let bm = batches.iter().sum::<f64>() / batches.len() as f64;
    let se = (batches.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (batches.len() - 1) as f64 / batches.len() as f64).sqrt();
    assert!((mean - oracle).abs() <= 3.0 * se, "chain mean {mean} +/- {se}, grid posterior mean {oracle}");
}
