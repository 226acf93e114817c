mod common;

use common::*;
use proptest::prelude::*;
use smsrate::correl::{g2, stationary_intensity};
use smsrate::counting::stationary_mandel;
use smsrate::scenarios::fixtures::{self, FIG6_SCALING};
use smsrate::scenarios::*;
use smsrate::spectrum::incoherent_spectrum;
use smsrate::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constructors_produce_valid_models(
        gamma in 0.0f64..5.0,
        omega in 0.0f64..5.0,
        shift in -5.0f64..5.0,
        phi in 0.0f64..2.0,
        detuning in -10.0f64..10.0,
        n in 2usize..12,
    ) {
        prop_assert!(spectral_two_state(gamma, omega, shift, phi, detuning).unwrap().validate().is_empty());
        let mut table = RateTable::zeros(2);
        table.set(0, 1, phi);
        table.set(1, 0, 2.0 * phi);
        prop_assert!(lifetime_fluct(&[gamma, 2.0 * gamma], table.clone(), omega, detuning).unwrap().validate().is_empty());
        prop_assert!(light_assisted(&[gamma, 3.0 * gamma], table.clone(), omega, detuning).unwrap().validate().is_empty());
        let profile: Vec<f64> = (0..n).map(|k| omega * (k as f64 / n as f64)).collect();
        prop_assert!(diffusion_chain(n, &profile, phi, gamma, detuning).unwrap().validate().is_empty());
        let base = light_assisted(&[1.0, 10.0], table, omega, 0.0).unwrap();
        prop_assert!(scaled_triplet(&base, detuning, 1.0, 0.25, 0.007).unwrap().validate().is_empty());
    }
}

#[test]
fn negative_rates_are_rejected() {
    assert!(spectral_two_state(1.0, 1.0, 0.1, -0.1, 0.0).is_err());
    assert!(diffusion_chain(3, &[1.0, 1.0, 1.0], -1.0, 1.0, 0.0).is_err());
}

#[test]
fn degenerate_spectral_diffusion_is_markovian() {
    let spec = spectral_two_state(1.0, 0.9, 0.0, 0.3, 0.4).unwrap();
    let single = ModelSpec::single(1.0, 0.9, 0.4);
    let taus = linspace(0.0, 15.0, 31);
    let xs = linspace(-4.0, 4.0, 33);
    let (a, b) = (g2(&spec, &taus).unwrap().real(), g2(&single, &taus).unwrap().real());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    let (a, b) = (
        incoherent_spectrum(&spec, &xs).unwrap().real(),
        incoherent_spectrum(&single, &xs).unwrap().real(),
    );
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
}

#[test]
fn uniform_chain_is_single_state() {
    let spec = diffusion_chain(5, &[0.8; 5], 0.3, 1.0, 0.2).unwrap();
    let single = ModelSpec::single(1.0, 0.8, 0.2);
    let rho = steady_state(&build_generator(&spec).unwrap()).unwrap();
    for p in config_populations(&rho) {
        assert!((p - 0.2).abs() < 1e-12);
    }
    let taus = linspace(0.0, 10.0, 21);
    let (a, b) = (g2(&spec, &taus).unwrap().real(), g2(&single, &taus).unwrap().real());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
    assert!((stationary_intensity(&spec).unwrap() - stationary_intensity(&single).unwrap()).abs() < 1e-13);
}

#[test]
fn gaussian_beam_intensity_is_population_average() {
    let n = 11;
    let profile: Vec<f64> = (0..n)
        .map(|k| {
            let x = (k as f64 - 5.0) / 2.5;
            1.5 * (-x * x).exp()
        })
        .collect();
    let gamma = 1.0;
    let spec = diffusion_chain(n, &profile, 1e-3, gamma, 0.0).unwrap();
    let rho = steady_state(&build_generator(&spec).unwrap()).unwrap();
    let pops = config_populations(&rho);
    let average: f64 = pops
        .iter()
        .zip(&profile)
        .map(|(p, om)| p * gamma * om * om / (gamma * gamma + 2.0 * om * om))
        .sum();
    assert!(rel_err(stationary_intensity(&spec).unwrap(), average) < 0.05);
    // Symmetric hopping with reflecting ends keeps the populations uniform.
    assert!(pops.iter().all(|p| (p - 1.0 / n as f64).abs() < 1e-10));
}

#[test]
fn fast_lifetime_switching_is_motionally_averaged() {
    let mut phi = RateTable::zeros(2);
    phi.set(0, 1, 1e3);
    phi.set(1, 0, 1e3);
    let spec = lifetime_fluct(&[1.0, 3.0], phi, 1.0, 0.0).unwrap();
    let average = ModelSpec::single(2.0, 1.0, 0.0);
    let xs = linspace(-6.0, 6.0, 1201);
    let width = |s: &ModelSpec| {
        let v = incoherent_spectrum(s, &xs).unwrap().real();
        let k = smsrate::analysis::argmax(&v).unwrap();
        smsrate::analysis::fwhm_at(&xs, &v, k).unwrap()
    };
    assert!(rel_err(width(&spec), width(&average)) < 0.05);
}

#[test]
fn fig5_blinking_rates() {
    let b = blinking_rates(&fixtures::fig5()).unwrap();
    assert!((b.big_gamma.rate(1, 0) - 4.995e-4).abs() < 5e-7);
    assert!((b.big_gamma.rate(0, 1) - 1.953e-4).abs() < 5e-7);
    assert!(b.warning.is_none());
    let far = blinking_rates(&fixtures::fig5().with_detuning(1e6)).unwrap();
    assert!(far.big_gamma.rate(1, 0) < 1e-14 && far.big_gamma.rate(0, 1) < 1e-14);
    let mut dim = fixtures::fig5();
    for p in dim.per_state.iter_mut() {
        p.omega_rabi = 1e-9;
    }
    let weak = blinking_rates(&dim).unwrap();
    assert!(weak.big_gamma.rate(1, 0) < 1e-18 && weak.big_gamma.rate(0, 1) < 1e-18);
}

fn two_state_blinking(ratio: f64) -> ModelSpec {
    light_assisted(
        &[1.0, 10.0],
        RateTable::from_rows(vec![vec![0.0, ratio * 10.0], vec![ratio, 0.0]]),
        1.0,
        0.0,
    )
    .unwrap()
}

#[test]
fn blinking_approximation_converges() {
    let mut deviations = Vec::new();
    for ratio in [0.1, 0.01, 0.001] {
        let spec = two_state_blinking(ratio);
        let l = build_generator(&spec).unwrap();
        let approx = blinking_rates(&spec).unwrap();
        let total = approx.big_gamma.outflow(0) + approx.big_gamma.outflow(1);
        let x0 = BlockState::ground_in(2, 0);
        let mut worst: f64 = 0.0;
        for k in [0.1, 0.5, 1.0, 2.0, 5.0, 50.0] {
            let t = k / total;
            let full = config_populations(&evolve(&l, &x0, t).unwrap());
            let classical = classical_blinking_populations(&approx, &[1.0, 0.0], t).unwrap();
            worst = worst.max((full[0] - classical[0]).abs()).max((full[1] - classical[1]).abs());
        }
        deviations.push(worst);
    }
    assert!(deviations[0] > deviations[1] && deviations[1] > deviations[2], "{deviations:?}");
}

#[test]
fn blinking_validity_warning() {
    assert!(blinking_rates(&two_state_blinking(0.5)).unwrap().warning.is_some());
    assert!(blinking_rates(&two_state_blinking(0.01)).unwrap().warning.is_none());
}

#[test]
fn detuning_limit_special_cases() {
    let mut spec = fixtures::fig5();
    spec.rates.gamma_cross.set(0, 1, 0.0);
    assert_eq!(mandel_detuning_limit(&spec).unwrap(), 0.0);
    let balanced = light_assisted(&[1.0, 1.5], RateTable::from_rows(vec![vec![0.0, 0.1], vec![0.6, 0.0]]), 1.0, 0.0).unwrap();
    assert!(mandel_detuning_limit(&balanced).unwrap().abs() < 1e-15);
    let q = stationary_mandel(&fixtures::fig5().with_detuning(1e3)).unwrap();
    assert!(rel_err(q, mandel_detuning_limit(&fixtures::fig5()).unwrap()) < 1e-2);
}

fn mapping_spectrum_grid() -> Vec<f64> {
    let mut xs = linspace(-5.0, 5.0, 401);
    xs.extend(linspace(-0.01, 0.01, 81));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

fn mapping_delay_grid() -> Vec<f64> {
    let mut taus = vec![0.0];
    taus.extend((0..=120).map(|k| 1e-2 * 10f64.powf(k as f64 / 20.0)));
    taus
}

#[test]
fn mapped_model_reproduces_spectrum_and_g2() {
    let original = fixtures::fig5();
    let mapped = mapped_self_fluct(&original).unwrap();
    let xs = mapping_spectrum_grid();
    let a = incoherent_spectrum(&original, &xs).unwrap().real();
    let b = incoherent_spectrum(&mapped, &xs).unwrap().real();
    for k in 0..xs.len() {
        assert!(rel_err(b[k], a[k]) < 0.02, "x = {}: {} vs {}", xs[k], b[k], a[k]);
    }
    let taus = mapping_delay_grid();
    let a = g2(&original, &taus).unwrap().real();
    let b = g2(&mapped, &taus).unwrap().real();
    for k in 1..taus.len() {
        assert!(rel_err(b[k], a[k]) < 0.02, "tau = {}: {} vs {}", taus[k], b[k], a[k]);
    }
    assert_eq!(a[0], 0.0);
    assert_eq!(b[0], 0.0);
}

#[test]
fn mapped_and_original_counting_diverge() {
    let original = fixtures::fig5();
    let mapped = mapped_self_fluct(&original).unwrap();
    let q_orig = stationary_mandel(&original.with_detuning(30.0)).unwrap();
    let q_map = stationary_mandel(&mapped.with_detuning(30.0)).unwrap();
    assert!(q_orig > 10.0 * q_map, "{q_orig} vs {q_map}");
    let far_map = stationary_mandel(&mapped.with_detuning(1e3)).unwrap();
    assert!(far_map.abs() < 1e-2);
}

#[test]
fn mapped_model_is_poissonian_at_large_detuning() {
    let original = fixtures::fig5();
    let mapped = mapped_self_fluct(&original).unwrap();
    let q_orig = stationary_mandel(&original.with_detuning(30.0)).unwrap();
    let q_map = stationary_mandel(&mapped.with_detuning(30.0)).unwrap();
    assert!(q_orig > 10.0, "{q_orig}");
    assert!(q_map < 0.5, "{q_map}");
}

#[test]
fn scaled_model_large_detuning() {
    let (delta0, omega_bar, gamma12_bar) = FIG6_SCALING;
    let base = fixtures::fig5();
    assert_eq!(scaled_triplet(&base, 0.0, delta0, omega_bar, gamma12_bar).unwrap(), base);
    let spec = scaled_triplet(&base, 1e3, delta0, omega_bar, gamma12_bar).unwrap();
    let q = stationary_mandel(&spec).unwrap();
    let target = 2.0 * base.rates.gamma_cross.rate(1, 0) / base.per_state[0].gamma;
    assert!(q >= target / 2.0 && q <= target * 2.0, "{q} vs {target}");
}

#[test]
fn scaled_model_switching_rate_plateaus() {
    let (delta0, omega_bar, gamma12_bar) = FIG6_SCALING;
    let base = fixtures::fig5();
    let rate = |d: f64| {
        let spec = scaled_triplet(&base, d, delta0, omega_bar, gamma12_bar).unwrap();
        blinking_rates(&spec).unwrap().big_gamma.rate(0, 1)
    };
    let (a, b, c) = (rate(1e4), rate(1e5), rate(1e6));
    let plateau = gamma12_bar * omega_bar * omega_bar / (gamma12_bar + 4.0 * delta0 * delta0);
    assert!(c > 0.0 && rel_err(b, c) < rel_err(a, c));
    // Same order of magnitude as the quoted scale.
    assert!(c > plateau / 10.0 && c < plateau * 10.0, "{c} vs {plateau}");
}
