//! Model constructors for the standard environment classes, and the closed-form
//! companions of the light-assisted blinking model.
//!
//! Two-state light-assisted models follow the usual labelling: state 0 is
//! `R = 1`, state 1 is `R = 2`, `γ₁₂ = gamma_cross[0][1]` (2 → 1) and
//! `γ₂₁ = gamma_cross[1][0]` (1 → 2).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::*;

fn finalize(spec: ModelSpec) -> Result<ModelSpec> {
    spec.ensure_valid()?;
    Ok(spec)
}

/// Two states shifted by `±δω`, shared `γ` and `Ω`, symmetric switching rate `φ`.
pub fn spectral_two_state(
    gamma: f64,
    omega_rabi: f64,
    delta_omega: f64,
    phi: f64,
    detuning: f64,
) -> Result<ModelSpec> {
    let mut rates = FluctuationRates::zeros(2);
    rates.phi.set(1, 0, phi);
    rates.phi.set(0, 1, phi);
    finalize(ModelSpec {
        space: ConfigSpace::new(2),
        per_state: vec![
            PerStateParams::new(delta_omega, gamma, omega_rabi),
            PerStateParams::new(-delta_omega, gamma, omega_rabi),
        ],
        rates,
        extra_channels: Vec::new(),
        detuning,
    })
}

/// Per-state decay rates with shared `Ω`, no frequency shifts, and switching
/// rates `phi[R][R']` (R′ → R).
pub fn lifetime_fluct(gammas: &[f64], phi: RateTable, omega_rabi: f64, detuning: f64) -> Result<ModelSpec> {
    let n = gammas.len();
    finalize(ModelSpec {
        space: ConfigSpace::new(n),
        per_state: gammas
            .iter()
            .map(|&g| PerStateParams::new(0.0, g, omega_rabi))
            .collect(),
        rates: FluctuationRates {
            phi,
            gamma_cross: RateTable::zeros(n),
        },
        extra_channels: Vec::new(),
        detuning,
    })
}

/// A molecule hopping between `n_sites` positions of a laser profile, with
/// nearest-neighbour rate `phi_hop` and reflecting ends.
pub fn diffusion_chain(
    n_sites: usize,
    omega_profile: &[f64],
    phi_hop: f64,
    gamma: f64,
    detuning: f64,
) -> Result<ModelSpec> {
    if n_sites < 2 {
        return Err(Error::InvalidArgument(format!(
            "a diffusion chain needs at least 2 sites, got {n_sites}"
        )));
    }
    if omega_profile.len() != n_sites {
        return Err(Error::DimensionMismatch {
            expected: n_sites,
            found: omega_profile.len(),
        });
    }
    let mut rates = FluctuationRates::zeros(n_sites);
    for k in 0..n_sites - 1 {
        rates.phi.set(k + 1, k, phi_hop);
        rates.phi.set(k, k + 1, phi_hop);
    }
    finalize(ModelSpec {
        space: ConfigSpace::new(n_sites),
        per_state: omega_profile
            .iter()
            .map(|&om| PerStateParams::new(0.0, gamma, om))
            .collect(),
        rates,
        extra_channels: Vec::new(),
        detuning,
    })
}

/// Environment transitions only through photon emission (`φ ≡ 0`).
pub fn light_assisted(
    gammas: &[f64],
    gamma_cross: RateTable,
    omega_rabi: f64,
    detuning: f64,
) -> Result<ModelSpec> {
    let n = gammas.len();
    finalize(ModelSpec {
        space: ConfigSpace::new(n),
        per_state: gammas
            .iter()
            .map(|&g| PerStateParams::new(0.0, g, omega_rabi))
            .collect(),
        rates: FluctuationRates {
            phi: RateTable::zeros(n),
            gamma_cross,
        },
        extra_channels: Vec::new(),
        detuning,
    })
}

/// Classical blinking rates and per-state intensities of a light-assisted model.
#[derive(Debug, Clone, PartialEq)]
pub struct BlinkingApprox {
    /// `Γ_{R'R}` stored as `big_gamma.rate(R', R)`, same orientation as the model tables.
    pub big_gamma: RateTable,
    pub intensities: Vec<f64>,
    /// Set when the emission-assisted rates are neither much smaller nor much
    /// larger than the radiative rates.
    pub warning: Option<String>,
}

fn require_light_assisted(spec: &ModelSpec) -> Result<()> {
    spec.ensure_valid()?;
    if !spec.rates.phi.is_zero() || !spec.extra_channels.is_empty() {
        return Err(Error::InvalidArgument(
            "expected a light-assisted model (phi = 0, no extra channels)".into(),
        ));
    }
    Ok(())
}

fn require_two_state(spec: &ModelSpec) -> Result<()> {
    require_light_assisted(spec)?;
    if spec.r_max() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a two-state model, got r_max = {}",
            spec.r_max()
        )));
    }
    Ok(())
}

pub fn blinking_rates(spec: &ModelSpec) -> Result<BlinkingApprox> {
    require_light_assisted(spec)?;
    let n = spec.r_max();
    let gt = spec.effective_decays();
    let saturation: Vec<f64> = (0..n)
        .map(|r| {
            let om = spec.per_state[r].omega_rabi;
            let d = spec.state_detuning(r);
            let den = gt[r] * gt[r] + 2.0 * om * om + 4.0 * d * d;
            if den > 0.0 {
                om * om / den
            } else {
                0.0
            }
        })
        .collect();
    let mut big_gamma = RateTable::zeros(n);
    for to in 0..n {
        for from in 0..n {
            if to != from {
                big_gamma.set(to, from, spec.rates.gamma_cross.rate(to, from) * saturation[from]);
            }
        }
    }
    let intensities = (0..n).map(|r| gt[r] * saturation[r]).collect();

    let ratios: Vec<f64> = (0..n)
        .map(|r| {
            let c = spec.rates.gamma_cross.outflow(r);
            let g = spec.per_state[r].gamma;
            if c == 0.0 {
                0.0
            } else if g == 0.0 {
                f64::INFINITY
            } else {
                c / g
            }
        })
        .collect();
    let all_small = ratios.iter().all(|&x| x <= 0.1);
    let all_large = ratios.iter().all(|&x| x >= 10.0);
    let warning = if all_small || all_large {
        None
    } else {
        let msg = format!("emission-assisted rates are comparable to radiative rates (ratios {ratios:?}); the classical blinking picture is not reliable");
        log::warn!("{msg}");
        Some(msg)
    };
    Ok(BlinkingApprox {
        big_gamma,
        intensities,
        warning,
    })
}

/// Solves `Ṗ_R = −Σ Γ_{R'R} P_R + Σ Γ_{RR'} P_{R'}` from `p0` over `t`.
pub fn classical_blinking_populations(approx: &BlinkingApprox, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let n = approx.intensities.len();
    if p0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p0.len(),
        });
    }
    if t == 0.0 {
        return Ok(p0.to_vec());
    }
    let mut k = DMatrix::<f64>::zeros(n, n);
    for to in 0..n {
        for from in 0..n {
            if to != from {
                k[(to, from)] = approx.big_gamma.rate(to, from);
            }
        }
        k[(to, to)] = -approx.big_gamma.outflow(to);
    }
    let p = (k * t).exp() * DVector::from_column_slice(p0);
    Ok(p.iter().copied().collect())
}

/// Large-detuning limit of the stationary Mandel factor for two-state light-assisted blinking.
pub fn mandel_detuning_limit(spec: &ModelSpec) -> Result<f64> {
    require_two_state(spec)?;
    let g1 = spec.per_state[0].gamma;
    let g2 = spec.per_state[1].gamma;
    let g12 = spec.rates.gamma_cross.rate(0, 1);
    let g21 = spec.rates.gamma_cross.rate(1, 0);
    let diff = (g1 + g21) - (g2 + g12);
    let num = 2.0 * g12 * g21 * diff * diff;
    let den = (g12 + g21).powi(2) * (g1 * g12 + g2 * g21 + 2.0 * g12 * g21);
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

/// Self-fluctuating lifetime model with `γ_R → γ̃_R` and `φ = Γ` at the spec's detuning.
///
/// The switching rates are frozen: sweeping the detuning of the result does not
/// change them.
pub fn mapped_self_fluct(spec: &ModelSpec) -> Result<ModelSpec> {
    require_two_state(spec)?;
    let approx = blinking_rates(spec)?;
    let omega = spec.per_state[0].omega_rabi;
    if spec.per_state.iter().any(|p| p.omega_rabi != omega || p.delta_omega != 0.0) {
        return Err(Error::InvalidArgument(
            "mapping needs a shared Rabi frequency and no frequency shifts".into(),
        ));
    }
    let mut phi = RateTable::zeros(2);
    phi.set(1, 0, approx.big_gamma.rate(1, 0));
    phi.set(0, 1, approx.big_gamma.rate(0, 1));
    lifetime_fluct(&spec.effective_decays(), phi, omega, spec.detuning)
}

/// Detuning-dependent scaling `γ₁₂ → γ₁₂ + γ̄₁₂|δ|/δ₀`, `Ω → Ω + Ω̄(|δ|/δ₀)^{1/2}`,
/// evaluated at `detuning`.
pub fn scaled_triplet(
    base: &ModelSpec,
    detuning: f64,
    delta0: f64,
    omega_bar: f64,
    gamma12_bar: f64,
) -> Result<ModelSpec> {
    require_two_state(base)?;
    if !(delta0 > 0.0) {
        return Err(Error::InvalidArgument(format!("delta0 must be positive, got {delta0}")));
    }
    let x = detuning.abs() / delta0;
    let mut spec = base.with_detuning(detuning);
    let g12 = spec.rates.gamma_cross.rate(0, 1);
    spec.rates.gamma_cross.set(0, 1, g12 + gamma12_bar * x);
    for p in spec.per_state.iter_mut() {
        p.omega_rabi += omega_bar * x.sqrt();
    }
    finalize(spec)
}

/// Reference parameter sets, in units of `γ` (spectral
/// diffusion) or `Ω` (light-assisted blinking), laser on resonance.
pub mod fixtures {
    use super::*;

    pub const FIG4A_PHI: [f64; 3] = [10.0, 50.0, 125.0];
    pub const FIG4B_PHI: [f64; 3] = [0.25, 1.0, 4.0];

    pub fn markov() -> ModelSpec {
        ModelSpec::single(1.0, 0.5f64.sqrt(), 0.0)
    }

    pub fn fig2a() -> ModelSpec {
        spectral_two_state(1.0, 0.5f64.sqrt(), 0.1, 1.0 / 125.0, 0.0).unwrap()
    }

    pub fn fig2b() -> ModelSpec {
        spectral_two_state(1.0, 5.0, 0.1, 1.0 / 500.0, 0.0).unwrap()
    }

    pub fn fig3a() -> ModelSpec {
        spectral_two_state(1.0, 0.5f64.sqrt(), 5.0, 1.0 / 4e4, 0.0).unwrap()
    }

    pub fn fig3b() -> ModelSpec {
        spectral_two_state(1.0, 5.0, 5.0, 1.0 / 4e4, 0.0).unwrap()
    }

    /// Large shift, `δω = 5γ`.
    pub fn fig4a(phi: f64) -> ModelSpec {
        spectral_two_state(1.0, 0.5f64.sqrt(), 5.0, phi, 0.0).unwrap()
    }

    /// Shift comparable to the decay rate, `δω ≃ γ`.
    pub fn fig4a_text(phi: f64) -> ModelSpec {
        spectral_two_state(1.0, 0.5f64.sqrt(), 1.0, phi, 0.0).unwrap()
    }

    pub fn fig4b(phi: f64) -> ModelSpec {
        spectral_two_state(1.0, 1.0, 3.0, phi, 0.0).unwrap()
    }

    pub fn fig5() -> ModelSpec {
        light_assisted(
            &[1.0, 10.0],
            RateTable::from_rows(vec![vec![0.0, 0.02], vec![0.0015, 0.0]]),
            1.0,
            0.0,
        )
        .unwrap()
    }

    /// Scaling parameters `(δ₀, Ω̄, γ̄₁₂)` of the triplet-like curve.
    pub const FIG6_SCALING: (f64, f64, f64) = (1.0, 0.25, 0.007);

    /// Every named fixture.
    pub fn all() -> Vec<(String, ModelSpec)> {
        let mut out = vec![
            ("markov".to_string(), markov()),
            ("fig2a".to_string(), fig2a()),
            ("fig2b".to_string(), fig2b()),
            ("fig3a".to_string(), fig3a()),
            ("fig3b".to_string(), fig3b()),
        ];
        for phi in FIG4A_PHI {
            out.push((format!("fig4a-phi{phi}"), fig4a(phi)));
            out.push((format!("fig4a-text-phi{phi}"), fig4a_text(phi)));
        }
        for phi in FIG4B_PHI {
            out.push((format!("fig4b-phi{phi}"), fig4b(phi)));
        }
        out.push(("fig5".to_string(), fig5()));
        out
    }
}
