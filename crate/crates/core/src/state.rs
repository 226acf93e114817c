//! Auxiliary block states and their vectorized form.
//!
//! Each configurational macrostate `R` carries a 2×2 matrix `ρ_R` in the basis
//! `{|a⟩, |b⟩}` (ground, excited). The vectorized layout is block-major; inside a
//! block the entries are column-major, i.e. `(aa, ba, ab, bb)`. This ordering is
//! part of the public contract and must not change.

use nalgebra::{Complex, DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Op2 = Matrix2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Offsets of the four matrix elements inside one vectorized block.
pub const AA: usize = 0;
pub const BA: usize = 1;
pub const AB: usize = 2;
pub const BB: usize = 3;

/// Lowering operator `σ = |a⟩⟨b|`.
pub fn sigma() -> Op2 {
    Op2::new(ZERO, ONE, ZERO, ZERO)
}

/// Raising operator `σ† = |b⟩⟨a|`.
pub fn sigma_dag() -> Op2 {
    Op2::new(ZERO, ZERO, ONE, ZERO)
}

/// `σ_z = |b⟩⟨b| − |a⟩⟨a|`.
pub fn sigma_z() -> Op2 {
    Op2::new(-ONE, ZERO, ZERO, ONE)
}

pub fn proj_a() -> Op2 {
    Op2::new(ONE, ZERO, ZERO, ZERO)
}

pub fn proj_b() -> Op2 {
    Op2::new(ZERO, ZERO, ZERO, ONE)
}

pub fn identity() -> Op2 {
    Op2::identity()
}

/// The tuple of auxiliary density matrices `{ρ_R}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    pub blocks: Vec<Op2>,
}

impl BlockState {
    pub fn new(blocks: Vec<Op2>) -> Self {
        Self { blocks }
    }

    pub fn zeros(r_max: usize) -> Self {
        Self {
            blocks: vec![Op2::zeros(); r_max],
        }
    }

    /// All weight in block `r`, in the ground state.
    pub fn ground_in(r_max: usize, r: usize) -> Self {
        let mut s = Self::zeros(r_max);
        s.blocks[r] = proj_a();
        s
    }

    /// All weight in block `r`, in the excited state.
    pub fn excited_in(r_max: usize, r: usize) -> Self {
        let mut s = Self::zeros(r_max);
        s.blocks[r] = proj_b();
        s
    }

    /// Maximally mixed system state spread uniformly over the configurations.
    pub fn maximally_mixed(r_max: usize) -> Self {
        let w = C64::from(0.5 / r_max as f64);
        Self {
            blocks: vec![Op2::identity() * w; r_max],
        }
    }

    pub fn r_max(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        4 * self.blocks.len()
    }

    pub fn to_vector(&self) -> DVector<C64> {
        DVector::from_iterator(
            self.dim(),
            self.blocks.iter().flat_map(|b| b.as_slice().iter().copied()),
        )
    }

    pub fn from_vector(v: &DVector<C64>) -> Result<Self> {
        if !v.len().is_multiple_of(4) || v.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 4 * (v.len() / 4).max(1),
                found: v.len(),
            });
        }
        let blocks = v
            .as_slice()
            .chunks_exact(4)
            .map(Op2::from_column_slice)
            .collect();
        Ok(Self { blocks })
    }

    /// `Σ_R Tr ρ_R`.
    pub fn total_trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Configurational populations `P_R = Tr ρ_R` (real part).
    pub fn populations(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.trace().re).collect()
    }

    /// Reduced system state `ρ_S = Σ_R ρ_R`.
    pub fn system(&self) -> Op2 {
        self.blocks.iter().fold(Op2::zeros(), |acc, b| acc + b)
    }

    /// Excited-state population `⟨b|ρ_R|b⟩` of every block.
    pub fn excited_populations(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b[(1, 1)].re).collect()
    }

    /// Largest entrywise deviation from Hermiticity over all blocks.
    pub fn hermiticity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Blockwise map `ρ_R ↦ f(R, ρ_R)`.
    pub fn map_blocks(&self, mut f: impl FnMut(usize, &Op2) -> Op2) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(r, b)| f(r, b))
                .collect(),
        }
    }

    pub(crate) fn check_dim(&self, r_max: usize) -> Result<()> {
        if self.blocks.len() != r_max {
            return Err(Error::DimensionMismatch {
                expected: r_max,
                found: self.blocks.len(),
            });
        }
        Ok(())
    }
}

/// Row vector of the total-trace functional in the vectorized layout.
pub fn trace_functional(r_max: usize) -> DVector<C64> {
    let mut t = DVector::zeros(4 * r_max);
    for r in 0..r_max {
        t[4 * r + AA] = ONE;
        t[4 * r + BB] = ONE;
    }
    t
}

/// `Σ_k v_k` over the trace positions, i.e. the total trace of a vectorized state.
pub fn vector_trace(v: &DVector<C64>) -> C64 {
    v.as_slice()
        .chunks_exact(4)
        .map(|c| c[AA] + c[BB])
        .sum()
}

/// Dense generator acting on vectorized block states.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOp {
    pub matrix: DMatrix<C64>,
}

impl SuperOp {
    pub fn new(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn r_max(&self) -> usize {
        self.dim() / 4
    }

    pub fn apply(&self, x: &BlockState) -> Result<BlockState> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        BlockState::from_vector(&(&self.matrix * x.to_vector()))
    }

    /// Frobenius norm of the matrix.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.matrix
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Superoperator of `X ↦ A X` on one vectorized 2×2 block.
pub(crate) fn left_mul(a: &Op2) -> DMatrix<C64> {
    let m = DMatrix::<C64>::identity(2, 2).kronecker(a);
    DMatrix::from_column_slice(4, 4, m.as_slice())
}

/// Superoperator of `X ↦ X B`.
pub(crate) fn right_mul(b: &Op2) -> DMatrix<C64> {
    let m = b.transpose().kronecker(&DMatrix::<C64>::identity(2, 2));
    DMatrix::from_column_slice(4, 4, m.as_slice())
}

/// Superoperator of `X ↦ A X A†`.
pub(crate) fn sandwich(a: &Op2) -> DMatrix<C64> {
    let m = a.conjugate().kronecker(a);
    DMatrix::from_column_slice(4, 4, m.as_slice())
}
