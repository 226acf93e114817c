mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smsrate::scenarios::fixtures;
use smsrate::*;

fn dense_apply(l: &SuperOp, x: &BlockState) -> BlockState {
    BlockState::from_vector(&(&l.matrix * x.to_vector())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_and_matrix_free_agree(seed in any::<u64>(), n in prop::sample::select(vec![1usize, 2, 5]), extras in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, n, true, extras);
        let l = build_generator(&spec).unwrap();
        let x = random_blocks(&mut rng, n);
        let dense = dense_apply(&l, &x).to_vector();
        let free = apply_generator(&spec, &x).unwrap().to_vector();
        let rel = (&dense - &free).norm() / dense.norm().max(1e-300);
        prop_assert!(rel < 1e-12, "relative difference {rel:e}");
    }

    #[test]
    fn trace_is_preserved(seed in any::<u64>(), n in 1usize..6, extras in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, n, true, extras);
        let x = random_physical(&mut rng, n);
        let dx = apply_generator(&spec, &x).unwrap();
        prop_assert!(dx.total_trace().norm() < 1e-12);
        let l = build_generator(&spec).unwrap();
        let left = l.matrix.adjoint() * trace_functional(n);
        prop_assert!(left.norm() < 1e-12 * l.norm().max(1.0));
    }

    #[test]
    fn hermiticity_is_preserved(seed in any::<u64>(), n in 1usize..6, extras in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, n, true, extras);
        let x = random_physical(&mut rng, n);
        let dx = apply_generator(&spec, &x).unwrap();
        for b in &dx.blocks {
            prop_assert!((b - b.adjoint()).camax() < 1e-12);
        }
    }
}

#[test]
fn markovian_generator_is_standard_liouvillian() {
    for (gamma, omega, delta) in [(1.0, 0.5f64.sqrt(), 0.0), (0.7, 2.0, -1.3), (2.0, 0.3, 0.8)] {
        let spec = ModelSpec::single(gamma, omega, delta);
        let l = build_generator(&spec).unwrap();
        let reference = oracle(&spec).liouvillian();
        for i in 0..4 {
            for j in 0..4 {
                let want = reference[TO_ORACLE[i]][TO_ORACLE[j]];
                assert!((l.matrix[(i, j)] - want).norm() < 1e-14, "({i},{j}) at {gamma},{omega},{delta}");
            }
        }
    }
}

#[test]
fn fig2a_matrix_free_on_random_states() {
    let spec = fixtures::fig2a();
    let l = build_generator(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let x = random_blocks(&mut rng, 2);
        let dense = dense_apply(&l, &x).to_vector();
        let free = apply_generator(&spec, &x).unwrap().to_vector();
        assert!((&dense - &free).norm() <= 1e-12 * dense.norm());
    }
}

#[test]
fn steady_state_is_annihilated() {
    for (name, spec) in fixtures::all() {
        let l = build_generator(&spec).unwrap();
        let rho = steady_state(&l).unwrap();
        let out = apply_generator(&spec, &rho).unwrap();
        assert!(out.norm() <= 1e-10 * l.norm() * rho.norm(), "{name}");
    }
}

#[test]
fn fig5_effective_decays() {
    let g = fixtures::fig5().effective_decays();
    assert!((g[0] - 1.0015).abs() < 1e-12);
    assert!((g[1] - 10.02).abs() < 1e-12);
}
