//! Stationary two-time correlations via the quantum regression theorem.
//!
//! All correlations are dimensionless: the geometric prefactor of the scattered
//! field is fixed to one, so `C₁(0) = I_st` and `C₂(∞) = I_st²`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::build_generator;
use crate::model::ModelSpec;
use crate::state::*;
use crate::steady::{propagator, steady_state};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    C1,
    C2,
    G2,
    SpectrumInc,
    MandelQ,
    MeanCounts,
    LineShape,
    Populations,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesValues {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl SeriesValues {
    pub fn len(&self) -> usize {
        match self {
            SeriesValues::Real(v) => v.len(),
            SeriesValues::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A tagged grid of `(abscissa, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub abscissa: Vec<f64>,
    pub values: SeriesValues,
    pub kind: SeriesKind,
    pub unit: String,
}

impl ObservableSeries {
    pub fn new(
        abscissa: Vec<f64>,
        values: SeriesValues,
        kind: SeriesKind,
        unit: impl Into<String>,
    ) -> Result<Self> {
        if abscissa.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: abscissa.len(),
                found: values.len(),
            });
        }
        check_grid(&abscissa)?;
        Ok(Self {
            abscissa,
            values,
            kind,
            unit: unit.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    /// Real values, or the real parts of complex values.
    pub fn real(&self) -> Vec<f64> {
        match &self.values {
            SeriesValues::Real(v) => v.clone(),
            SeriesValues::Complex(v) => v.iter().map(|z| z.re).collect(),
        }
    }

    pub fn complex(&self) -> Vec<C64> {
        match &self.values {
            SeriesValues::Real(v) => v.iter().map(|&x| C64::from(x)).collect(),
            SeriesValues::Complex(v) => v.clone(),
        }
    }
}

/// Rejects non-finite or non-increasing grids.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    for (i, x) in grid.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite("grid"));
        }
        if i > 0 && *x <= grid[i - 1] {
            return Err(Error::InvalidGrid(i));
        }
    }
    Ok(())
}

/// Generator, stationary state and effective decays of one spec, computed once
/// and shared by every observable evaluated on it.
#[derive(Debug, Clone)]
pub struct Stationary {
    pub spec: ModelSpec,
    pub generator: SuperOp,
    pub steady: BlockState,
    pub gamma_eff: Vec<f64>,
}

impl Stationary {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let generator = build_generator(spec)?;
        let steady = steady_state(&generator)?;
        Ok(Self {
            spec: spec.clone(),
            gamma_eff: spec.effective_decays(),
            generator,
            steady,
        })
    }

    /// `I_st = Σ_R γ̃_R ⟨b|ρ_R^∞|b⟩`.
    pub fn intensity(&self) -> f64 {
        self.steady
            .blocks
            .iter()
            .zip(&self.gamma_eff)
            .map(|(b, g)| g * b[(1, 1)].re)
            .sum()
    }

    /// Evaluates `f(e^{τL} seed)` on every τ, in parallel, in grid order.
    fn propagate_grid<T: Send>(
        &self,
        seed: &BlockState,
        taus: &[f64],
        f: impl Fn(&BlockState) -> T + Sync,
    ) -> Result<Vec<T>> {
        let v = seed.to_vector();
        taus.par_iter()
            .map(|&tau| {
                let u: DMatrix<C64> = propagator(&self.generator, tau)?;
                let x = BlockState::from_vector(&(u * &v))?;
                Ok(f(&x))
            })
            .collect()
    }

    /// `Σ_{RR'} Tr{A (e^{τL})_{RR'}[O₂ ρ_{R'}^∞ O₁]}` on a grid of `τ ≥ 0`.
    pub fn qrt_two_time(&self, o1: &Op2, a: &Op2, o2: &Op2, taus: &[f64]) -> Result<ObservableSeries> {
        check_grid(taus)?;
        if let Some(t) = taus.iter().find(|t| **t < 0.0) {
            return Err(Error::NegativeTime(*t));
        }
        let seed = self.steady.map_blocks(|_, rho| o2 * rho * o1);
        let values = self.propagate_grid(&seed, taus, |x| {
            x.blocks.iter().map(|b| (a * b).trace()).sum::<C64>()
        })?;
        ObservableSeries::new(taus.to_vec(), SeriesValues::Complex(values), SeriesKind::C1, "1")
    }

    /// Seed of the field correlation, block `R` = `√γ̃_R ρ_R^∞ σ†`.
    pub(crate) fn c1_seed(&self) -> BlockState {
        let sd = sigma_dag();
        self.steady
            .map_blocks(|r, rho| rho * sd * C64::from(self.gamma_eff[r].sqrt()))
    }

    /// Readout `Σ_R √γ̃_R Tr{σ x_R}`.
    pub(crate) fn c1_readout(&self, x: &BlockState) -> C64 {
        x.blocks
            .iter()
            .zip(&self.gamma_eff)
            .map(|(b, g)| b[(1, 0)] * g.sqrt())
            .sum()
    }

    /// `C̃₁(τ)`; negative delays are filled in by `C̃₁(−τ) = C̃₁(τ)*`.
    pub fn c1(&self, taus: &[f64]) -> Result<ObservableSeries> {
        check_grid(taus)?;
        let abs: Vec<f64> = taus.iter().map(|t| t.abs()).collect();
        let seed = self.c1_seed();
        let vals = self.propagate_grid(&seed, &abs, |x| self.c1_readout(x))?;
        let values = vals
            .into_iter()
            .zip(taus)
            .map(|(z, t)| if *t < 0.0 { z.conj() } else { z })
            .collect();
        ObservableSeries::new(taus.to_vec(), SeriesValues::Complex(values), SeriesKind::C1, "1/time")
    }

    /// Post-emission state: block `R'` = `γ_{R'} σρ_{R'}σ† + Σ_{R''} γ_{R'R''} σρ_{R''}σ†`.
    pub(crate) fn c2_seed(&self) -> BlockState {
        let s = sigma();
        let sd = sigma_dag();
        let jumped: Vec<Op2> = self.steady.blocks.iter().map(|rho| s * rho * sd).collect();
        let n = self.spec.r_max();
        BlockState::new(
            (0..n)
                .map(|rp| {
                    let mut acc = jumped[rp] * C64::from(self.spec.per_state[rp].gamma);
                    for rpp in 0..n {
                        if rpp != rp {
                            acc += jumped[rpp] * C64::from(self.spec.rates.gamma_cross.rate(rp, rpp));
                        }
                    }
                    acc
                })
                .collect(),
        )
    }

    fn emission_readout(&self, x: &BlockState) -> f64 {
        x.blocks
            .iter()
            .zip(&self.gamma_eff)
            .map(|(b, g)| g * b[(1, 1)].re)
            .sum()
    }

    /// `C̃₂(τ)` for `τ ≥ 0`.
    pub fn c2(&self, taus: &[f64]) -> Result<ObservableSeries> {
        check_grid(taus)?;
        if let Some(t) = taus.iter().find(|t| **t < 0.0) {
            return Err(Error::NegativeTime(*t));
        }
        let seed = self.c2_seed();
        let values = self.propagate_grid(&seed, taus, |x| self.emission_readout(x))?;
        ObservableSeries::new(taus.to_vec(), SeriesValues::Real(values), SeriesKind::C2, "1/time^2")
    }

    /// Ground-state weights `a_{R'}^∞` after one emission.
    pub fn emission_weights(&self) -> Vec<f64> {
        let n = self.spec.r_max();
        let pb: Vec<f64> = self.steady.excited_populations();
        (0..n)
            .map(|rp| {
                self.spec.per_state[rp].gamma * pb[rp]
                    + (0..n)
                        .filter(|&rpp| rpp != rp)
                        .map(|rpp| self.spec.rates.gamma_cross.rate(rp, rpp) * pb[rpp])
                        .sum::<f64>()
            })
            .collect()
    }

    /// `g₂(τ) = I_st⁻² Σ_{RR'} γ̃_R ⟨b|(e^{τL})_{RR'}[a_{R'}^∞]|b⟩`.
    pub fn g2(&self, taus: &[f64]) -> Result<ObservableSeries> {
        check_grid(taus)?;
        if let Some(t) = taus.iter().find(|t| **t < 0.0) {
            return Err(Error::NegativeTime(*t));
        }
        let ist = self.intensity();
        if ist <= 1e-300 {
            return Err(Error::ZeroIntensity(ist));
        }
        let seed = BlockState::new(
            self.emission_weights()
                .into_iter()
                .map(|w| proj_a() * C64::from(w))
                .collect(),
        );
        let norm = ist * ist;
        let values = self.propagate_grid(&seed, taus, |x| self.emission_readout(x) / norm)?;
        ObservableSeries::new(taus.to_vec(), SeriesValues::Real(values), SeriesKind::G2, "1")
    }
}

pub fn qrt_two_time(spec: &ModelSpec, o1: &Op2, a: &Op2, o2: &Op2, taus: &[f64]) -> Result<ObservableSeries> {
    Stationary::new(spec)?.qrt_two_time(o1, a, o2, taus)
}

pub fn c1(spec: &ModelSpec, taus: &[f64]) -> Result<ObservableSeries> {
    Stationary::new(spec)?.c1(taus)
}

pub fn c2(spec: &ModelSpec, taus: &[f64]) -> Result<ObservableSeries> {
    Stationary::new(spec)?.c2(taus)
}

pub fn g2(spec: &ModelSpec, taus: &[f64]) -> Result<ObservableSeries> {
    Stationary::new(spec)?.g2(taus)
}

pub fn stationary_intensity(spec: &ModelSpec) -> Result<f64> {
    Ok(Stationary::new(spec)?.intensity())
}
