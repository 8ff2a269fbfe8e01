use noisy_mh::kernels::{bar_alpha, noisy_step, pseudo_marginal_step, tilde_alpha, tilde_rho};
use noisy_mh::presets::{averaged_periodic, averaged_reciprocal, fig7_left};
use noisy_mh::verify::enumerable_presets;
use noisy_mh::{run_chain, EvalMode, KernelKind, KernelSpec, ProposalSpec, RngStream, State, TargetSpec, WeightModel};
use proptest::prelude::*;

fn lattice(kind: KernelKind, theta: f64, weights: WeightModel, n: usize) -> KernelSpec {
    KernelSpec::new(kind, TargetSpec::half_geometric(), ProposalSpec::integer_walk(theta), weights, n)
}

fn fig7_atoms() -> (f64, f64, f64) {
    match fig7_left().1 {
        WeightModel::TwoPointHomogeneous { b, eps } => (b, eps, (1.0 - eps) / (b - eps)),
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unit_weights_give_identical_traces(seed in 0u64..1_000_000, stream in 0u64..8, x0 in 1i64..30, theta in 0.1f64..0.9) {
        let base = lattice(KernelKind::Marginal, theta, WeightModel::Unit, 1);
        let traces: Vec<Vec<State>> = KernelKind::ALL
            .iter()
            .map(|&k| run_chain(&base.with_kind(k), State::Integer(x0), 500, RngStream::new(seed, stream)).unwrap().states)
            .collect();
        prop_assert_eq!(&traces[0], &traces[1]);
        prop_assert_eq!(&traces[1], &traces[2]);
    }

    #[test]
    fn acceptance_is_bounded_by_inverse_moment(idx in 0usize..19, m in 1i64..300, up in any::<bool>()) {
        let presets = enumerable_presets().unwrap();
        let (_, theta, w, n) = &presets[idx];
        let noisy = lattice(KernelKind::Noisy, *theta, w.clone(), *n);
        let marginal = noisy.with_kind(KernelKind::Marginal);
        let x = State::Integer(m);
        let y = State::Integer(if up || m == 1 { m + 1 } else { m - 1 });
        let a_n = tilde_alpha(&noisy, &x, &y, EvalMode::Exact).unwrap().value;
        let a = tilde_alpha(&marginal, &x, &y, EvalMode::Exact).unwrap().value;
        let inv = w.negative_moment(&x, *n, 1.0, EvalMode::Exact).unwrap().value;
        prop_assert!(a_n <= a * inv + 1e-12);
        prop_assert!(a_n >= 0.0 && a_n <= 1.0 + 1e-12);
    }

    #[test]
    fn rejection_is_complement_of_neighbour_acceptance(idx in 0usize..19, m in 1i64..300) {
        let presets = enumerable_presets().unwrap();
        let (_, theta, w, n) = &presets[idx];
        let k = lattice(KernelKind::Noisy, *theta, w.clone(), *n);
        let x = State::Integer(m);
        let up = tilde_alpha(&k, &x, &State::Integer(m + 1), EvalMode::Exact).unwrap().value;
        let down = tilde_alpha(&k, &x, &State::Integer(m - 1), EvalMode::Exact).unwrap().value;
        let rho = tilde_rho(&k, &x, EvalMode::Exact).unwrap().value;
        prop_assert!((rho - (1.0 - theta * up - (1.0 - theta) * down)).abs() < 1e-12);
    }
}

#[test]
fn fig7_acceptance_values() {
    let (theta, w) = fig7_left();
    let k = lattice(KernelKind::Noisy, theta, w, 1);
    let (_, _, s) = fig7_atoms();
    let up = tilde_alpha(&k, &State::Integer(40), &State::Integer(41), EvalMode::Exact).unwrap().value;
    let oracle = (s * s + (1.0 - s) * (1.0 - s)) / 6.0 + (1.0 + 1.0 / 36.0) * s * (1.0 - s);
    assert!((up - oracle).abs() < 1e-12);
    assert!((up - 0.33879).abs() < 1e-5);
    let rho = tilde_rho(&k, &State::Integer(40), EvalMode::Exact).unwrap().value;
    assert!((rho - (1.0 - theta * oracle - (1.0 - theta))).abs() < 1e-12);
    assert!((rho - 0.49591).abs() < 1e-5);
}

#[test]
fn fig7_down_moves_are_always_accepted_in_simulation() {
    let (theta, w) = fig7_left();
    let k = lattice(KernelKind::Noisy, theta, w, 1);
    let mut g = RngStream::new(31, 0).generator();
    let x = State::Integer(7);
    let (mut down, mut accepted) = (0usize, 0usize);
    for _ in 0..100_000 {
        let proposed = k.proposal.sample(&x, &mut g.clone()).unwrap();
        let (_, info) = noisy_step(&k, &x, &mut g).unwrap();
        if proposed == State::Integer(6) {
            down += 1;
            accepted += info.accepted as usize;
        }
    }
    assert!(down > 20_000);
    assert_eq!(accepted, down);
}

#[test]
fn carried_large_weight_meets_small_proposal_weight() {
    let (b, eps, _) = fig7_atoms();
    let (theta, w) = fig7_left();
    let k = lattice(KernelKind::PseudoMarginal, theta, w, 1);
    let mut g = RngStream::new(32, 0).generator();
    let x = State::Integer(9);
    let (mut up_small, mut up_accepted) = (0usize, 0usize);
    for _ in 0..100_000 {
        let y = k.proposal.sample(&x, &mut g.clone()).unwrap();
        let ((next, lw), info) = pseudo_marginal_step(&k, &x, b.ln(), &mut g).unwrap();
        let ratio = if y == State::Integer(10) { 0.5 * (1.0 - theta) / theta } else { 2.0 * theta / (1.0 - theta) };
        if (info.log_u - eps.ln()).abs() < 1e-12 {
            assert!((info.alpha - (ratio * eps / b).min(1.0)).abs() < 1e-12);
            if y == State::Integer(10) {
                up_small += 1;
                up_accepted += info.accepted as usize;
            }
        }
        if !info.accepted {
            assert_eq!(next, x);
            assert_eq!(lw, b.ln());
        }
    }
    let target = 0.5 * (1.0 - theta) / theta * eps / b;
    let freq = up_accepted as f64 / up_small as f64;
    assert!((freq - target).abs() < 4.0 * (target * (1.0 - target) / up_small as f64).sqrt());
    let t = TargetSpec::half_geometric();
    let direct = bar_alpha(&x, b, &State::Integer(10), eps, &t, &k.proposal).unwrap();
    assert!((direct - target).abs() < 1e-14);
}

#[test]
fn binomial_average_acceptance_exact_vs_monte_carlo() {
    for (w, m) in [(averaged_reciprocal(), 12), (averaged_periodic(), 14)] {
        for n in [1, 3, 5] {
            let k = lattice(KernelKind::Noisy, 0.5, w.clone(), n);
            for y in [m - 1, m + 1] {
                let (x, ys) = (State::Integer(m), State::Integer(y));
                let exact = tilde_alpha(&k, &x, &ys, EvalMode::Exact).unwrap().value;
                let mc = tilde_alpha(&k, &x, &ys, EvalMode::mc(200_000, 33)).unwrap();
                assert!(
                    (mc.value - exact).abs() <= 3.0 * mc.std_error.max(1e-9),
                    "m={m} y={y} N={n}: exact {exact}, mc {} +/- {}",
                    mc.value,
                    mc.std_error
                );
            }
        }
    }
}
