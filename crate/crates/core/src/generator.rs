//! The Lindblad rate generator in the frame rotating at the laser frequency.
//!
//! Per block `R` the generator contains
//! - `−i[H_R, ρ_R]` with `H_R = −δ_R σ_z/2 + (Ω_R/2)(σ + σ†)`,
//! - radiative decay `−γ̃_R {D, ρ_R} + γ_R σ ρ_R σ†` with `D = σ†σ/2`,
//! - environment jumps `−Σ φ_{R'R} ρ_R + Σ φ_{RR'} ρ_{R'}`,
//! - emission-assisted jumps `+Σ γ_{RR'} σ ρ_{R'} σ†` (their loss is in `γ̃_R`),
//! - every extra channel `−(η_{R'R}/2){A†A, ρ_R} + η_{RR'} A ρ_{R'} A†`.
//!
//! [`build_generator`] assembles the dense matrix from Kronecker products;
//! [`apply_generator`] evaluates the same right-hand side directly on 2×2 blocks.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::model::ModelSpec;
use crate::state::*;

fn hamiltonian(spec: &ModelSpec, r: usize) -> Op2 {
    let delta_r = spec.state_detuning(r);
    let omega = spec.per_state[r].omega_rabi;
    sigma_z() * C64::from(-0.5 * delta_r) + (sigma() + sigma_dag()) * C64::from(0.5 * omega)
}

fn decay_op() -> Op2 {
    sigma_dag() * sigma() * C64::from(0.5)
}

/// Adds `coeff · block` into the `(row, col)` 4×4 block of `m`.
fn add_block(m: &mut DMatrix<C64>, row: usize, col: usize, block: &DMatrix<C64>, coeff: f64) {
    if coeff == 0.0 {
        return;
    }
    let mut view = m.view_mut((4 * row, 4 * col), (4, 4));
    view += block * C64::from(coeff);
}

/// Dense generator `L̂` of the Lindblad rate equation.
pub fn build_generator(spec: &ModelSpec) -> Result<SuperOp> {
    spec.ensure_valid()?;
    let n = spec.r_max();
    let mut m = DMatrix::<C64>::zeros(4 * n, 4 * n);
    let eye4 = DMatrix::<C64>::identity(4, 4);
    let d = decay_op();
    let anti_d = left_mul(&d) + right_mul(&d);
    let jump = sandwich(&sigma());
    let gamma_eff = spec.effective_decays();

    for r in 0..n {
        let h = hamiltonian(spec, r);
        let commutator = (left_mul(&h) - right_mul(&h)) * (-I);
        add_block(&mut m, r, r, &commutator, 1.0);
        add_block(&mut m, r, r, &anti_d, -gamma_eff[r]);
        add_block(&mut m, r, r, &jump, spec.per_state[r].gamma);
        add_block(&mut m, r, r, &eye4, -spec.rates.phi.outflow(r));
        for rp in 0..n {
            if rp == r {
                continue;
            }
            add_block(&mut m, r, rp, &eye4, spec.rates.phi.rate(r, rp));
            add_block(&mut m, r, rp, &jump, spec.rates.gamma_cross.rate(r, rp));
        }
    }

    for ch in &spec.extra_channels {
        let a = ch.operator_kind.operator();
        let ada = a.adjoint() * a;
        let anti = left_mul(&ada) + right_mul(&ada);
        let gain = sandwich(&a);
        for r in 0..n {
            add_block(&mut m, r, r, &anti, -0.5 * ch.eta.outflow(r));
            for rp in 0..n {
                if rp != r {
                    add_block(&mut m, r, rp, &gain, ch.eta.rate(r, rp));
                }
            }
        }
    }
    Ok(SuperOp::new(m))
}

/// `L̂ x` evaluated term by term on the blocks, without forming the matrix.
pub fn apply_generator(spec: &ModelSpec, x: &BlockState) -> Result<BlockState> {
    spec.ensure_valid()?;
    let n = spec.r_max();
    x.check_dim(n)?;
    let s = sigma();
    let sd = sigma_dag();
    let d = decay_op();
    let gamma_eff = spec.effective_decays();

    let mut out = BlockState::zeros(n);
    for r in 0..n {
        let rho = &x.blocks[r];
        let h = hamiltonian(spec, r);
        let mut acc = (h * rho - rho * h) * (-I);
        acc -= (d * rho + rho * d) * C64::from(gamma_eff[r]);
        acc += s * rho * sd * C64::from(spec.per_state[r].gamma);
        acc -= rho * C64::from(spec.rates.phi.outflow(r));
        for rp in 0..n {
            if rp == r {
                continue;
            }
            let other = &x.blocks[rp];
            acc += other * C64::from(spec.rates.phi.rate(r, rp));
            acc += s * other * sd * C64::from(spec.rates.gamma_cross.rate(r, rp));
        }
        for ch in &spec.extra_channels {
            let a = ch.operator_kind.operator();
            let ad = a.adjoint();
            let ada = ad * a;
            acc -= (ada * rho + rho * ada) * C64::from(0.5 * ch.eta.outflow(r));
            for rp in 0..n {
                if rp != r {
                    acc += a * x.blocks[rp] * ad * C64::from(ch.eta.rate(r, rp));
                }
            }
        }
        out.blocks[r] = acc;
    }
    Ok(out)
}
