#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use smsrate::*;
use smsrate_oracles::markov::ResonanceFluorescence;

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn random_table(rng: &mut ChaCha8Rng, n: usize, scale: f64, density: f64) -> RateTable {
    let mut t = RateTable::zeros(n);
    for to in 0..n {
        for from in 0..n {
            if to != from && rng.gen::<f64>() < density {
                t.set(to, from, scale * rng.gen::<f64>());
            }
        }
    }
    t
}

/// A random valid spec; `extras` adds one general channel of a random kind.
pub fn random_spec(rng: &mut ChaCha8Rng, n: usize, cross: bool, extras: bool) -> ModelSpec {
    let mut spec = ModelSpec {
        space: ConfigSpace::new(n),
        per_state: (0..n)
            .map(|_| {
                PerStateParams::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(0.1..3.0),
                    rng.gen_range(0.0..2.0),
                )
            })
            .collect(),
        rates: FluctuationRates {
            phi: random_table(rng, n, 1.0, 0.8),
            gamma_cross: if cross {
                random_table(rng, n, 0.5, 0.8)
            } else {
                RateTable::zeros(n)
            },
        },
        extra_channels: Vec::new(),
        detuning: rng.gen_range(-1.5..1.5),
    };
    if extras {
        let kind = OperatorKind::ALL[rng.gen_range(0..OperatorKind::ALL.len())];
        let mut eta = RateTable::zeros(n);
        for to in 0..n {
            for from in 0..n {
                if to != from && rng.gen::<f64>() < 0.7 {
                    eta.set(to, from, 0.4 * rng.gen::<f64>());
                }
            }
        }
        spec.extra_channels.push(GeneralJumpChannel {
            operator_kind: kind,
            eta,
        });
    }
    spec.ensure_valid().expect("random spec must be valid");
    spec
}

fn c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_blocks(rng: &mut ChaCha8Rng, n: usize) -> BlockState {
    BlockState::new((0..n).map(|_| Op2::new(c(rng), c(rng), c(rng), c(rng))).collect())
}

/// Random positive blocks with unit total trace.
pub fn random_physical(rng: &mut ChaCha8Rng, n: usize) -> BlockState {
    let raw: Vec<Op2> = (0..n)
        .map(|_| {
            let m = Op2::new(c(rng), c(rng), c(rng), c(rng));
            m * m.adjoint()
        })
        .collect();
    let tr: f64 = raw.iter().map(|m| m.trace().re).sum();
    BlockState::new(raw.into_iter().map(|m| m / C64::from(tr)).collect())
}

/// Smallest nonzero `|Re λ|` of the generator.
pub fn slowest_rate(spec: &ModelSpec) -> f64 {
    let l = build_generator(spec).unwrap();
    let eig = l.matrix.clone().schur().eigenvalues().unwrap();
    let scale = l.norm();
    eig.iter()
        .map(|z| -z.re)
        .filter(|&r| r > 1e-9 * scale)
        .fold(f64::INFINITY, f64::min)
}

pub fn oracle(spec: &ModelSpec) -> ResonanceFluorescence {
    assert_eq!(spec.r_max(), 1);
    let p = &spec.per_state[0];
    ResonanceFluorescence::new(p.gamma, p.omega_rabi, spec.state_detuning(0))
}

/// Library layout `(aa, ba, ab, bb)` → oracle order `(aa, bb, ab, ba)`.
pub const TO_ORACLE: [usize; 4] = [0, 3, 2, 1];

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
