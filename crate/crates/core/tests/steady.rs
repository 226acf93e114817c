mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smsrate::scenarios::{blinking_rates, fixtures};
use smsrate::steady::*;
use smsrate::*;
use smsrate_oracles::ode::Dopri5;
use smsrate_oracles::quad;

fn to_real(x: &BlockState) -> Vec<f64> {
    x.to_vector().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn from_real(y: &[f64]) -> BlockState {
    let v = nalgebra::DVector::from_iterator(y.len() / 2, y.chunks(2).map(|p| C64::new(p[0], p[1])));
    BlockState::from_vector(&v).unwrap()
}

#[test]
fn evolve_matches_ode_integration() {
    let spec = fixtures::fig2a();
    let l = build_generator(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let x0 = random_physical(&mut rng, 2);
        // The right-hand side is the block-wise form, never the dense matrix.
        let sol = Dopri5::new(1e-11, 1e-13).solve(
            |_, y, dy| {
                let d = apply_generator(&spec, &from_real(y)).unwrap();
                dy.copy_from_slice(&to_real(&d));
            },
            0.0,
            &to_real(&x0),
            &[3.0],
        );
        let want = from_real(&sol[0]).to_vector();
        let got = evolve(&l, &x0, 3.0).unwrap().to_vector();
        assert!((got - want).norm() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evolve_keeps_trace_and_hermiticity(seed in any::<u64>(), n in 1usize..5, t in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, n, true, false);
        let l = build_generator(&spec).unwrap();
        let x = evolve(&l, &random_physical(&mut rng, n), t).unwrap();
        prop_assert!((x.total_trace() - C64::from(1.0)).norm() < 1e-10);
        prop_assert!(x.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn steady_state_is_the_long_time_limit(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, n, true, false);
        let l = build_generator(&spec).unwrap();
        let Ok(rho) = steady_state(&l) else {
            // Random tables may disconnect the states.
            return Ok(());
        };
        let t = 50.0 / slowest_rate(&spec);
        let x = evolve(&l, &random_physical(&mut rng, n), t).unwrap();
        prop_assert!((x.to_vector() - rho.to_vector()).norm() <= 1e-6);
    }
}

#[test]
fn fixture_steady_states_are_long_time_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, spec) in fixtures::all() {
        let l = build_generator(&spec).unwrap();
        let rho = steady_state(&l).unwrap();
        let t = 50.0 / slowest_rate(&spec);
        let x = evolve(&l, &random_physical(&mut rng, spec.r_max()), t).unwrap();
        assert!((x.to_vector() - rho.to_vector()).norm() <= 1e-6, "{name}");
    }
}

#[test]
fn markovian_steady_matches_closed_form() {
    for (g, om, d) in [(1.0, 0.5f64.sqrt(), 0.0), (1.0, 1.0, 0.7), (0.5, 3.0, -2.0)] {
        let spec = ModelSpec::single(g, om, d);
        let rho = steady_state(&build_generator(&spec).unwrap()).unwrap();
        let want = oracle(&spec).steady();
        let v = rho.to_vector();
        for k in 0..4 {
            assert!((v[k] - want[TO_ORACLE[k]]).norm() < 1e-13);
        }
    }
}

/// `∫₀^T e^{−ut} e^{tL} x₀ dt` with `e^{−uT} < 1e−10`, by composite Gauss–Legendre.
fn laplace(l: &SuperOp, x0: &BlockState, u: f64) -> nalgebra::DVector<C64> {
    let t_end = 10.0 * std::f64::consts::LN_10 / u * 1.05;
    let (nodes, weights) = quad::composite(0.0, t_end, 600, 10);
    let v0 = x0.to_vector();
    let mut acc = nalgebra::DVector::<C64>::zeros(v0.len());
    for (t, w) in nodes.iter().zip(&weights) {
        let x = propagator(l, *t).unwrap() * &v0;
        acc += x * C64::from(w * (-u * t).exp());
    }
    acc
}

#[test]
fn resolve_is_the_laplace_transform_of_evolve() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for spec in [fixtures::fig2a(), fixtures::fig4b(1.0), fixtures::markov()] {
        let l = build_generator(&spec).unwrap();
        let x0 = random_physical(&mut rng, spec.r_max());
        for u in [0.1, 0.5, 2.0] {
            let want = laplace(&l, &x0, u);
            let got = resolve(&l, C64::from(u), &x0).unwrap().to_vector();
            assert!((&got - &want).norm() <= 1e-6 * want.norm(), "u = {u}");
        }
    }
}

fn laurent_remainder(l: &SuperOp, d: &SteadyDecomposition, v: &BlockState, u: f64) -> f64 {
    let full = resolve(l, C64::from(u), v).unwrap().to_vector();
    let vv = v.to_vector();
    let pole = &d.projector.matrix * &vv / C64::from(u);
    let regular = &d.reduced_resolvent.matrix * &vv;
    (full - pole - regular).norm()
}

#[test]
fn laurent_remainder_is_linear_in_shift() {
    let spec = fixtures::fig5();
    let l = build_generator(&spec).unwrap();
    let d = laurent_decomposition(&l).unwrap();
    let v = BlockState::excited_in(2, 0);
    let r3 = laurent_remainder(&l, &d, &v, 1e-3);
    let r4 = laurent_remainder(&l, &d, &v, 1e-4);
    let r5 = laurent_remainder(&l, &d, &v, 1e-5);
    let r6 = laurent_remainder(&l, &d, &v, 1e-6);
    // The slowest relaxation rate is below 1e-3, so the asymptotic slope needs the smaller shifts.
    assert!(r3 > r4 && r4 > r5 && r5 > r6);
    // O(u): the remainder per unit shift stays below its asymptotic constant.
    assert!(r3 / 1e-3 <= 1.01 * r6 / 1e-6 && r4 / 1e-4 <= 1.01 * r6 / 1e-6);
    assert!((r4 / r5 / 10.0 - 1.0).abs() < 0.2, "{}", r4 / r5);
    assert!((r5 / r6 / 10.0 - 1.0).abs() < 0.02, "{}", r5 / r6);
}

#[test]
fn decomposition_relations_on_fixtures() {
    for (name, spec) in fixtures::all() {
        let l = build_generator(&spec).unwrap();
        let d = laurent_decomposition(&l).unwrap();
        let res = d.residuals(&l);
        assert!(res.stationarity < 1e-10 && res.idempotence < 1e-10, "{name} {res:?}");
        assert!(res.max() < 1e-9, "{name} {res:?}");
        let s = d.steady.to_vector();
        assert!((&d.projector.matrix * &s - &s).norm() < 1e-10);
        assert!((&d.reduced_resolvent.matrix * &s).norm() < 1e-9);
    }
}

#[test]
fn fig5_populations_follow_blinking_rates() {
    let spec = fixtures::fig5();
    let rho = steady_state(&build_generator(&spec).unwrap()).unwrap();
    let p = config_populations(&rho);
    let b = blinking_rates(&spec).unwrap();
    let g12 = b.big_gamma.rate(0, 1);
    let g21 = b.big_gamma.rate(1, 0);
    assert!(rel_err(p[0], g12 / (g12 + g21)) < 5e-2, "{p:?}");
    assert!(rel_err(p[1], g21 / (g12 + g21)) < 5e-2, "{p:?}");
}
