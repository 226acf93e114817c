//! Generalized optical Bloch equations for the matrix elements of `G_R(t, s)`:
//! `U = Re G_ab`, `V = Im G_ab`, `W = (G_bb − G_aa)/2`, `Y = (G_bb + G_aa)/2`,
//! written out term by term rather than derived from the superoperator.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::state::*;

#[derive(Debug, Clone, PartialEq)]
pub struct BlochState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
}

impl BlochState {
    pub fn zeros(r_max: usize) -> Self {
        Self {
            u: vec![0.0; r_max],
            v: vec![0.0; r_max],
            w: vec![0.0; r_max],
            y: vec![0.0; r_max],
        }
    }

    pub fn r_max(&self) -> usize {
        self.u.len()
    }

    /// Reads off the components of Hermitian blocks.
    pub fn from_blocks(x: &BlockState) -> Self {
        let mut out = Self::zeros(x.r_max());
        for (r, b) in x.blocks.iter().enumerate() {
            out.u[r] = b[(0, 1)].re;
            out.v[r] = b[(0, 1)].im;
            out.w[r] = 0.5 * (b[(1, 1)].re - b[(0, 0)].re);
            out.y[r] = 0.5 * (b[(1, 1)].re + b[(0, 0)].re);
        }
        out
    }

    pub fn to_blocks(&self) -> BlockState {
        BlockState::new(
            (0..self.r_max())
                .map(|r| {
                    let ab = C64::new(self.u[r], self.v[r]);
                    Op2::new(
                        C64::from(self.y[r] - self.w[r]),
                        ab,
                        ab.conj(),
                        C64::from(self.y[r] + self.w[r]),
                    )
                })
                .collect(),
        )
    }

    /// Flattened as `(U_R, V_R, W_R, Y_R)` per block.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            4 * self.r_max(),
            (0..self.r_max()).flat_map(|r| [self.u[r], self.v[r], self.w[r], self.y[r]]),
        )
    }

    pub fn from_vector(x: &DVector<f64>) -> Self {
        let n = x.len() / 4;
        let mut out = Self::zeros(n);
        for r in 0..n {
            out.u[r] = x[4 * r];
            out.v[r] = x[4 * r + 1];
            out.w[r] = x[4 * r + 2];
            out.y[r] = x[4 * r + 3];
        }
        out
    }

    /// `𝒴(t, s) = Σ_R 𝒴_R`.
    pub fn total_y(&self) -> f64 {
        self.y.iter().sum()
    }
}

/// Time derivatives of `(U_R, V_R, W_R, Y_R)` at counting parameter `s`.
pub fn optical_bloch_rhs(spec: &ModelSpec, s: f64, state: &BlochState) -> Result<BlochState> {
    spec.ensure_valid()?;
    if !spec.extra_channels.is_empty() {
        return Err(Error::InvalidArgument(
            "the optical Bloch form has no extra jump channels".into(),
        ));
    }
    let n = spec.r_max();
    for len in [state.u.len(), state.v.len(), state.w.len(), state.y.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let phi = &spec.rates.phi;
    let gx = &spec.rates.gamma_cross;
    let mut d = BlochState::zeros(n);
    for r in 0..n {
        let p = &spec.per_state[r];
        let delta = spec.state_detuning(r);
        let gt = spec.effective_decay(r)?;
        let out = phi.outflow(r);
        let gain = |f: &Vec<f64>| -> f64 {
            (0..n).filter(|&q| q != r).map(|q| phi.rate(r, q) * f[q]).sum()
        };
        let cross: f64 = (0..n)
            .filter(|&q| q != r)
            .map(|q| gx.rate(r, q) * (state.w[q] + state.y[q]))
            .sum();
        let wy = state.w[r] + state.y[r];

        d.u[r] = delta * state.v[r] - (0.5 * gt + out) * state.u[r] + gain(&state.u);
        d.v[r] = -delta * state.u[r] - p.omega_rabi * state.w[r] - (0.5 * gt + out) * state.v[r]
            + gain(&state.v);
        d.w[r] = p.omega_rabi * state.v[r] - 0.5 * (gt + s * p.gamma) * wy - 0.5 * s * cross
            - out * state.w[r]
            + gain(&state.w);
        d.y[r] = -0.5 * (gt - s * p.gamma) * wy + 0.5 * s * cross - out * state.y[r] + gain(&state.y);
    }
    Ok(d)
}

/// The linear Bloch right-hand side as a real matrix on [`BlochState::to_vector`].
pub fn bloch_matrix(spec: &ModelSpec, s: f64) -> Result<DMatrix<f64>> {
    let dim = 4 * spec.r_max();
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let mut e = DVector::zeros(dim);
        e[k] = 1.0;
        let col = optical_bloch_rhs(spec, s, &BlochState::from_vector(&e))?.to_vector();
        m.set_column(k, &col);
    }
    Ok(m)
}

/// Integrates the Bloch equations exactly over `t`.
pub fn evolve_bloch(spec: &ModelSpec, s: f64, x0: &BlochState, t: f64) -> Result<BlochState> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let m = bloch_matrix(spec, s)? * t;
    Ok(BlochState::from_vector(&(m.exp() * x0.to_vector())))
}
