//! Optical spectrum of the scattered field, as a function of `x = ω − ω_L`.
//!
//! The coherent part is a delta peak at the laser frequency and is reported
//! only as its weight. The incoherent part is the Laplace transform of
//! `C̃₁(τ) − S_coh` on the imaginary axis:
//! `S_inc(x) = 2 Re ∫₀^∞ e^{ixτ} [C̃₁(τ) − S_coh] dτ`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::correl::{check_grid, ObservableSeries, SeriesKind, SeriesValues, Stationary};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::state::*;

/// Relative size of the estimated tails above which a sum-rule grid is flagged.
pub const TAIL_TOLERANCE: f64 = 1e-3;

impl Stationary {
    /// `S_coh = |Σ_R √γ̃_R ⟨a|ρ_R^∞|b⟩|²`.
    pub fn coherent_weight(&self) -> f64 {
        self.steady
            .blocks
            .iter()
            .zip(&self.gamma_eff)
            .map(|(b, g)| b[(0, 1)] * g.sqrt())
            .sum::<C64>()
            .norm_sqr()
    }

    /// Incoherent spectrum on a grid of `ω − ω_L`.
    pub fn incoherent_spectrum(&self, omega: &[f64]) -> Result<ObservableSeries> {
        check_grid(omega)?;
        let dim = self.generator.dim();
        let p = self.steady.to_vector() * trace_functional(dim / 4).transpose();
        let x0 = self.c1_seed().to_vector();
        let seed: DVector<C64> = &x0 - &p * &x0;
        // On the trace-free complement L − P acts as L, and on ρ^∞ as −1, so the
        // deflated matrix stays invertible at x = 0.
        let base: DMatrix<C64> = &p - &self.generator.matrix;
        let values = omega
            .par_iter()
            .map(|&x| {
                let u = C64::new(0.0, -x);
                let mut m = base.clone();
                for k in 0..dim {
                    m[(k, k)] += u;
                }
                let y = solve_deflated(m, &seed, u)?;
                let state = BlockState::from_vector(&y)?;
                Ok(2.0 * self.c1_readout(&state).re)
            })
            .collect::<Result<Vec<f64>>>()?;
        ObservableSeries::new(
            omega.to_vec(),
            SeriesValues::Real(values),
            SeriesKind::SpectrumInc,
            "1",
        )
    }

    pub fn sum_rule_check(&self, omega: &[f64]) -> Result<SumRuleReport> {
        let s = self.incoherent_spectrum(omega)?;
        self.sum_rule_from(omega, &s.real())
    }

    /// Sum rule for an already computed incoherent spectrum `v` on `omega`.
    pub fn sum_rule_from(&self, omega: &[f64], v: &[f64]) -> Result<SumRuleReport> {
        check_grid(omega)?;
        let ist = self.intensity();
        let coh = self.coherent_weight();
        let area = trapezoid(omega, v)? / (2.0 * std::f64::consts::PI);
        if ist <= 1e-300 {
            return Ok(SumRuleReport {
                residual: 0.0,
                incoherent_area: area,
                coherent_weight: coh,
                intensity: ist,
                tail_estimate: 0.0,
                tail_warning: false,
            });
        }
        // Lorentzian tails S ≈ A/x² integrate to x·S(x) beyond the edge.
        let n = omega.len();
        let tail = (omega[0].abs() * v[0].abs() + omega[n - 1].abs() * v[n - 1].abs())
            / (2.0 * std::f64::consts::PI)
            / ist;
        let tail_warning = tail > TAIL_TOLERANCE;
        if tail_warning {
            log::warn!("spectrum grid truncates an estimated {tail:.2e} of the intensity");
        }
        Ok(SumRuleReport {
            residual: (area + coh - ist).abs() / ist,
            incoherent_area: area,
            coherent_weight: coh,
            intensity: ist,
            tail_estimate: tail,
            tail_warning,
        })
    }
}

fn solve_deflated(m: DMatrix<C64>, v: &DVector<C64>, u: C64) -> Result<DVector<C64>> {
    let singular = |residual: f64| Error::SingularShift {
        re: u.re,
        im: u.im,
        residual,
    };
    let y = m.clone().lu().solve(v).ok_or_else(|| singular(f64::INFINITY))?;
    let vn = v.norm();
    let rel = (&m * &y - v).norm() / if vn > 0.0 { vn } else { 1.0 };
    if !rel.is_finite() || rel > 1e-10 {
        return Err(singular(rel));
    }
    Ok(y)
}

/// Outcome of the spectral sum rule `(1/2π)∫S_inc + S_coh = I_st`.
#[derive(Debug, Clone, Copy)]
pub struct SumRuleReport {
    /// `|(1/2π)∫S_inc + S_coh − I_st| / I_st`, zero for a dark emitter.
    pub residual: f64,
    pub incoherent_area: f64,
    pub coherent_weight: f64,
    pub intensity: f64,
    /// Estimated fraction of the incoherent area outside the grid.
    pub tail_estimate: f64,
    pub tail_warning: bool,
}

/// Trapezoid rule on a possibly nonuniform grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum())
}

pub fn coherent_weight(spec: &ModelSpec) -> Result<f64> {
    Ok(Stationary::new(spec)?.coherent_weight())
}

pub fn incoherent_spectrum(spec: &ModelSpec, omega: &[f64]) -> Result<ObservableSeries> {
    Stationary::new(spec)?.incoherent_spectrum(omega)
}

pub fn sum_rule_check(spec: &ModelSpec, omega: &[f64]) -> Result<SumRuleReport> {
    Stationary::new(spec)?.sum_rule_check(omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn dark_emitter() {
        let spec = ModelSpec::single(1.0, 0.0, 0.0);
        assert_eq!(coherent_weight(&spec).unwrap(), 0.0);
        let s = incoherent_spectrum(&spec, &[-1.0, 0.0, 1.0]).unwrap();
        assert!(s.real().iter().all(|v| v.abs() < 1e-300));
        assert_eq!(sum_rule_check(&spec, &[-1.0, 1.0]).unwrap().residual, 0.0);
    }

    #[test]
    fn weak_drive_coherent_weight() {
        // r_max = 1: S_coh = γ |ρ_ab|² with ρ_ab from the Bloch steady state.
        let (g, om) = (1.0, 0.3);
        let st = Stationary::new(&ModelSpec::single(g, om, 0.0)).unwrap();
        let rho_ab = st.steady.blocks[0][(0, 1)];
        assert!((st.coherent_weight() - g * rho_ab.norm_sqr()).abs() < 1e-15);
        // On resonance |ρ_ab|² = γ²Ω²/(γ² + 2Ω²)².
        let want = g * g * om * om / (g * g + 2.0 * om * om).powi(2);
        assert!((st.coherent_weight() - want).abs() < 1e-14);
    }

    #[test]
    fn markovian_sum_rule() {
        let spec = ModelSpec::single(1.0, 0.5f64.sqrt(), 0.0);
        let grid = lin(-2000.0, 2000.0, 400_001);
        let r = sum_rule_check(&spec, &grid).unwrap();
        assert!(r.residual < 1e-3, "{r:?}");
        assert!(!r.tail_warning);
    }

    #[test]
    fn truncated_grid_is_flagged() {
        let spec = ModelSpec::single(1.0, 0.5f64.sqrt(), 0.0);
        let r = sum_rule_check(&spec, &lin(-2.0, 2.0, 101)).unwrap();
        assert!(r.tail_warning);
    }

    #[test]
    fn resonant_spectrum_is_symmetric() {
        let st = Stationary::new(&ModelSpec::single(1.0, 2.0, 0.0)).unwrap();
        let s = st.incoherent_spectrum(&[-2.0, -0.3, 0.3, 2.0]).unwrap().real();
        assert!((s[0] - s[3]).abs() < 1e-12 * s[0]);
        assert!((s[1] - s[2]).abs() < 1e-12 * s[1]);
    }

    #[test]
    fn trapezoid_nonuniform() {
        let x = [0.0, 0.5, 2.0];
        let y = [0.0, 0.5, 2.0];
        assert!((trapezoid(&x, &y).unwrap() - 2.0).abs() < 1e-15);
    }
}
