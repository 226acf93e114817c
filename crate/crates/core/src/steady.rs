//! Dense linear-algebra kernels on the generator: propagation, the stationary
//! state, resolvent solves and the Laurent decomposition around `u = 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::state::*;

/// Eigenvalue floor for the positivity check of stationary blocks.
pub const POSITIVITY_TOL: f64 = -1e-10;

/// `e^{tL}` as a dense matrix.
pub fn propagator(generator: &SuperOp, t: f64) -> Result<DMatrix<C64>> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if !generator.is_finite() {
        return Err(Error::NonFinite("generator"));
    }
    if t == 0.0 {
        return Ok(DMatrix::identity(generator.dim(), generator.dim()));
    }
    Ok((&generator.matrix * C64::from(t)).exp())
}

/// `e^{tL} x0`.
pub fn evolve(generator: &SuperOp, x0: &BlockState, t: f64) -> Result<BlockState> {
    if x0.dim() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            found: x0.dim(),
        });
    }
    if !x0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let u = propagator(generator, t)?;
    BlockState::from_vector(&(u * x0.to_vector()))
}

/// Number of singular values below `dim · ε · ‖L‖_F`.
pub fn numerical_nullity(generator: &SuperOp) -> usize {
    let dim = generator.dim();
    let threshold = dim as f64 * f64::EPSILON * generator.norm();
    generator
        .matrix
        .clone()
        .singular_values()
        .iter()
        .filter(|&&s| s <= threshold)
        .count()
}

/// The stationary state `ρ^∞`, normalized to unit total trace.
///
/// Solved by replacing the first row of `L` with the trace functional. The
/// null space must be one-dimensional.
pub fn steady_state(generator: &SuperOp) -> Result<BlockState> {
    let dim = generator.dim();
    if dim == 0 || !dim.is_multiple_of(4) {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: dim,
        });
    }
    if !generator.is_finite() {
        return Err(Error::NonFinite("generator"));
    }
    let nullity = numerical_nullity(generator);
    if nullity != 1 {
        return Err(Error::NullSpaceDegenerate { nullity });
    }
    let mut m = generator.matrix.clone();
    let tr = trace_functional(dim / 4);
    m.set_row(0, &tr.transpose());
    let mut rhs = DVector::zeros(dim);
    rhs[0] = ONE;
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or(Error::NullSpaceDegenerate { nullity: 2 })?;
    let mut state = BlockState::from_vector(&x)?;
    for b in state.blocks.iter_mut() {
        *b = (*b + b.adjoint()) * C64::from(0.5);
    }
    for (r, b) in state.blocks.iter().enumerate() {
        let lo = min_eigenvalue_hermitian(b);
        if lo < POSITIVITY_TOL {
            return Err(Error::NotPositive {
                block: r,
                eigenvalue: lo,
            });
        }
    }
    Ok(state)
}

/// Smallest eigenvalue of a Hermitian 2×2 matrix.
pub(crate) fn min_eigenvalue_hermitian(m: &Op2) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let off = m[(0, 1)].norm();
    0.5 * (a + d) - (0.25 * (a - d) * (a - d) + off * off).sqrt()
}

fn check_shift(generator: &SuperOp, u: C64) -> Result<()> {
    if !(u.re.is_finite() && u.im.is_finite()) {
        return Err(Error::NonFinite("shift"));
    }
    if !generator.is_finite() {
        return Err(Error::NonFinite("generator"));
    }
    Ok(())
}

fn solve_checked(m: DMatrix<C64>, v: &DVector<C64>, u: C64) -> Result<DVector<C64>> {
    let singular = |residual: f64| Error::SingularShift {
        re: u.re,
        im: u.im,
        residual,
    };
    let lu = m.clone().lu();
    let x = lu.solve(v).ok_or_else(|| singular(f64::INFINITY))?;
    let vnorm = v.norm();
    let residual = (&m * &x - v).norm();
    let rel = if vnorm > 0.0 { residual / vnorm } else { residual };
    if !rel.is_finite() || rel > 1e-10 || !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(singular(rel));
    }
    Ok(x)
}

/// Solves `(u − L) x = v`.
pub fn resolve(generator: &SuperOp, u: C64, v: &BlockState) -> Result<BlockState> {
    check_shift(generator, u)?;
    if v.dim() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            found: v.dim(),
        });
    }
    let dim = generator.dim();
    let m = DMatrix::<C64>::identity(dim, dim) * u - &generator.matrix;
    BlockState::from_vector(&solve_checked(m, &v.to_vector(), u)?)
}

/// Stationary state, stationary projector and reduced resolvent.
///
/// The reduced resolvent `R₀` is the regular part of the Laurent expansion
/// `(u − L)⁻¹ = P/u + R₀ + O(u)`. It satisfies `R₀ L = L R₀ = P − 1` and
/// `R₀ P = P R₀ = 0`.
#[derive(Debug, Clone)]
pub struct SteadyDecomposition {
    pub steady: BlockState,
    pub projector: SuperOp,
    pub reduced_resolvent: SuperOp,
}

/// Residual norms of the defining relations of a [`SteadyDecomposition`].
#[derive(Debug, Clone, Copy)]
pub struct DecompositionResiduals {
    pub stationarity: f64,
    pub idempotence: f64,
    pub resolvent_left: f64,
    pub resolvent_right: f64,
    pub annihilates_projector: f64,
}

impl DecompositionResiduals {
    pub fn max(&self) -> f64 {
        [
            self.idempotence,
            self.resolvent_left,
            self.resolvent_right,
            self.annihilates_projector,
        ]
        .into_iter()
        .fold(self.stationarity, f64::max)
    }
}

impl SteadyDecomposition {
    pub fn residuals(&self, generator: &SuperOp) -> DecompositionResiduals {
        let l = &generator.matrix;
        let p = &self.projector.matrix;
        let r0 = &self.reduced_resolvent.matrix;
        let dim = l.nrows();
        let target = p - DMatrix::<C64>::identity(dim, dim);
        let op_norm = |m: DMatrix<C64>| m.singular_values().max();
        DecompositionResiduals {
            stationarity: (l * self.steady.to_vector()).norm(),
            idempotence: op_norm(p * p - p),
            resolvent_left: op_norm(r0 * l - &target),
            resolvent_right: op_norm(l * r0 - &target),
            annihilates_projector: op_norm(r0 * p).max(op_norm(p * r0)),
        }
    }
}

/// Computes `(ρ^∞, P, R₀)` with `R₀ = −(L − P)⁻¹ (1 − P)`.
///
/// `L − P` acts as `L` on the trace-free complement and as `−1` on the
/// stationary direction, so it is invertible exactly when the stationary state
/// is unique.
pub fn laurent_decomposition(generator: &SuperOp) -> Result<SteadyDecomposition> {
    let steady = steady_state(generator)?;
    let dim = generator.dim();
    let p = steady.to_vector() * trace_functional(dim / 4).transpose();
    let eye = DMatrix::<C64>::identity(dim, dim);
    let shifted = &generator.matrix - &p;
    let rhs = &eye - &p;
    let lu = shifted.lu();
    let sol = lu.solve(&rhs).ok_or(Error::NullSpaceDegenerate { nullity: 2 })?;
    Ok(SteadyDecomposition {
        steady,
        projector: SuperOp::new(p),
        reduced_resolvent: SuperOp::new(-sol),
    })
}

/// Configurational populations `P_R = Tr ρ_R`.
pub fn config_populations(x: &BlockState) -> Vec<f64> {
    x.populations()
}
