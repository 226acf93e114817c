//! Photon-counting statistics from the generating operator `G(t, s)`.
//!
//! Detection is photon emission: `s` multiplies exactly the `γ_R σ·σ†` and
//! `γ_{RR'} σ·σ†` gains, so `L(s) = L₀ + s J`. Extra jump channels are never
//! counted. All s-derivatives are taken exactly through block-triangular
//! augmented generators, never by finite differences.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::correl::{check_grid, ObservableSeries, SeriesKind, SeriesValues, Stationary};
use crate::error::{Error, Result};
use crate::generator::build_generator;
use crate::model::ModelSpec;
use crate::state::*;
use crate::steady::{laurent_decomposition, propagator, steady_state};

/// Truncation mass above which [`pn`] logs a warning.
pub const TRUNCATION_WARN: f64 = 1e-6;

/// `L̂ = drift + jump`, with the detection gains in `jump`.
#[derive(Debug, Clone)]
pub struct CountingSplit {
    pub drift: SuperOp,
    pub jump: SuperOp,
}

impl CountingSplit {
    /// `L(s) = L₀ + s J`.
    pub fn at(&self, s: f64) -> SuperOp {
        SuperOp::new(&self.drift.matrix + &self.jump.matrix * C64::from(s))
    }

    pub fn generator(&self) -> SuperOp {
        self.at(1.0)
    }
}

pub fn jump_superop(spec: &ModelSpec) -> Result<SuperOp> {
    spec.ensure_valid()?;
    let n = spec.r_max();
    let jump = sandwich(&sigma());
    let mut m = DMatrix::<C64>::zeros(4 * n, 4 * n);
    for r in 0..n {
        for rp in 0..n {
            let rate = if r == rp {
                spec.per_state[r].gamma
            } else {
                spec.rates.gamma_cross.rate(r, rp)
            };
            if rate != 0.0 {
                let mut view = m.view_mut((4 * r, 4 * rp), (4, 4));
                view += &jump * C64::from(rate);
            }
        }
    }
    Ok(SuperOp::new(m))
}

pub fn counting_split(spec: &ModelSpec) -> Result<CountingSplit> {
    let l = build_generator(spec)?;
    let jump = jump_superop(spec)?;
    Ok(CountingSplit {
        drift: SuperOp::new(&l.matrix - &jump.matrix),
        jump,
    })
}

/// Counting statistics at one time.
#[derive(Debug, Clone)]
pub struct CountingRecord {
    pub t: f64,
    pub pn: Vec<f64>,
    /// `1 − Σ Pₙ`, the mass beyond `n_max`.
    pub remainder: f64,
    pub mean: f64,
    pub second_factorial: f64,
    pub mandel_q: f64,
}

/// Reusable counting context for one spec.
#[derive(Debug, Clone)]
pub struct Counting {
    pub split: CountingSplit,
    pub generator: SuperOp,
    pub steady: BlockState,
}

impl Counting {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let split = counting_split(spec)?;
        let generator = split.generator();
        let steady = steady_state(&generator)?;
        Ok(Self {
            split,
            generator,
            steady,
        })
    }

    fn initial(&self, rho0: Option<&BlockState>) -> Result<DVector<C64>> {
        let x = rho0.unwrap_or(&self.steady);
        if x.dim() != self.generator.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.generator.dim(),
                found: x.dim(),
            });
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }
        Ok(x.to_vector())
    }

    /// `Pₙ(t)` for `n = 0..=n_max`, from the hierarchy
    /// `ρ̇⁽ⁿ⁾ = L₀ρ⁽ⁿ⁾ + Jρ⁽ⁿ⁻¹⁾`.
    pub fn pn(&self, t: f64, n_max: usize, rho0: Option<&BlockState>) -> Result<Vec<f64>> {
        let x0 = self.initial(rho0)?;
        let coeffs = series_propagator(&self.split, t, n_max + 1)?;
        let pn: Vec<f64> = coeffs
            .iter()
            .map(|u| vector_trace(&(u * &x0)).re)
            .collect();
        let remainder = 1.0 - pn.iter().sum::<f64>();
        if remainder > TRUNCATION_WARN {
            log::warn!("photon-number truncation at n_max = {n_max} leaves {remainder:.3e} of the probability");
        }
        Ok(pn)
    }

    /// `(N̄(t), N̄⁽²⁾(t))` from the augmented system `(x, x′, x″)`.
    pub fn factorial_moments(&self, t: f64, rho0: Option<&BlockState>) -> Result<(f64, f64)> {
        let x0 = self.initial(rho0)?;
        let d = self.generator.dim();
        let l = &self.generator.matrix;
        let j = &self.split.jump.matrix;
        let mut big = DMatrix::<C64>::zeros(3 * d, 3 * d);
        for k in 0..3 {
            big.view_mut((d * k, d * k), (d, d)).copy_from(l);
        }
        big.view_mut((d, 0), (d, d)).copy_from(j);
        big.view_mut((2 * d, d), (d, d)).copy_from(&(j * C64::from(2.0)));
        let u = propagator(&SuperOp::new(big), t)?;
        let col = u.view((0, 0), (3 * d, d)) * x0;
        let mean = vector_trace(&col.rows(d, d).into_owned()).re;
        let second = vector_trace(&col.rows(2 * d, d).into_owned()).re;
        Ok((mean, second))
    }

    pub fn mean_counts(&self, t: f64, rho0: Option<&BlockState>) -> Result<f64> {
        Ok(self.factorial_moments(t, rho0)?.0)
    }

    pub fn second_factorial(&self, t: f64, rho0: Option<&BlockState>) -> Result<f64> {
        Ok(self.factorial_moments(t, rho0)?.1)
    }

    /// `Q(t) = N̄⁽²⁾/N̄ − N̄`.
    ///
    /// From the stationary state the equivalent centered form is used, which
    /// avoids the cancellation between `N̄⁽²⁾/N̄` and `N̄` at long times.
    pub fn mandel_q(&self, t: f64, rho0: Option<&BlockState>) -> Result<f64> {
        match rho0 {
            None => self.stationary_mandel_q(t),
            Some(_) => {
                let (mean, second) = self.factorial_moments(t, rho0)?;
                mandel_from_moments(mean, second)
            }
        }
    }

    /// `Q(t)` from a stationary start: with `N̄ = I t` and `x′(s) = I s ρ^∞ + y(s)`,
    /// `Q(t) = 2 ∫₀ᵗ Tr J y(s) ds / (I t)` where `ẏ = L y + (1 − P) J ρ^∞`.
    pub fn stationary_mandel_q(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let d = self.generator.dim();
        let ss = self.steady.to_vector();
        let j = &self.split.jump.matrix;
        let intensity = vector_trace(&(j * &ss)).re;
        let mean = intensity * t;
        if mean <= 1e-300 {
            return Err(Error::ZeroCounts(mean));
        }
        let p = &ss * trace_functional(d / 4).transpose();
        let source = j - &p * j;
        // State (ρ^∞, y, w) with ẇ = J y; ρ^∞ is carried along as a constant.
        let mut big = DMatrix::<C64>::zeros(3 * d, 3 * d);
        big.view_mut((d, 0), (d, d)).copy_from(&source);
        big.view_mut((d, d), (d, d)).copy_from(&self.generator.matrix);
        big.view_mut((2 * d, d), (d, d)).copy_from(j);
        let u = propagator(&SuperOp::new(big), t)?;
        let w = u.view((2 * d, 0), (d, d)) * ss;
        Ok(2.0 * vector_trace(&w).re / mean)
    }

    /// `dN̄/dt = Tr J e^{tL} ρ₀`.
    pub fn count_rate(&self, t: f64, rho0: Option<&BlockState>) -> Result<f64> {
        let x0 = self.initial(rho0)?;
        let x = propagator(&self.generator, t)? * x0;
        Ok(vector_trace(&(&self.split.jump.matrix * x)).re)
    }

    pub fn record(&self, t: f64, n_max: usize, rho0: Option<&BlockState>) -> Result<CountingRecord> {
        let pn = self.pn(t, n_max, rho0)?;
        let (mean, second) = self.factorial_moments(t, rho0)?;
        Ok(CountingRecord {
            t,
            remainder: 1.0 - pn.iter().sum::<f64>(),
            pn,
            mean,
            second_factorial: second,
            mandel_q: mandel_from_moments(mean, second)?,
        })
    }

    /// Generating function per block, `𝒴_R(t, s) = Tr G_R(t, s) / 2`.
    pub fn generating_function(&self, t: f64, s: f64, rho0: Option<&BlockState>) -> Result<Vec<f64>> {
        let x0 = self.initial(rho0)?;
        let x = propagator(&self.split.at(s), t)? * x0;
        Ok(BlockState::from_vector(&x)?
            .blocks
            .iter()
            .map(|b| 0.5 * b.trace().re)
            .collect())
    }
}

/// Truncated power series in `s`.
type Series = Vec<DMatrix<C64>>;

fn series_mul(a: &Series, b: &Series) -> Series {
    let levels = a.len();
    (0..levels)
        .into_par_iter()
        .map(|n| {
            let mut acc = &a[0] * &b[n];
            for k in 1..=n {
                acc += &a[k] * &b[n - k];
            }
            acc
        })
        .collect()
}

/// Coefficients of `sⁿ`, `n < levels`, in `e^{t(L₀ + sJ)}`.
///
/// This is the first block column of the exponential of the block
/// lower-bidiagonal hierarchy generator; the Toeplitz structure lets scaling
/// and squaring run on the series instead of the full matrix.
fn series_propagator(split: &CountingSplit, t: f64, levels: usize) -> Result<Series> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if !split.drift.is_finite() || !split.jump.is_finite() {
        return Err(Error::NonFinite("generator"));
    }
    let d = split.drift.dim();
    let mut out: Series = vec![DMatrix::zeros(d, d); levels];
    out[0] = DMatrix::identity(d, d);
    if t == 0.0 {
        return Ok(out);
    }
    let norm = t * (split.drift.matrix.norm() + split.jump.matrix.norm());
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let h = C64::from(t / 2f64.powi(squarings as i32));
    let l0 = &split.drift.matrix * h;
    let j = &split.jump.matrix * h;
    // Taylor series of e^{h(L₀ + sJ)}: term_k = term_{k−1} (hL₀ + s hJ) / k.
    let mut term = out.clone();
    for k in 1..=60 {
        let inv = C64::from(1.0 / k as f64);
        let next: Series = (0..levels)
            .map(|n| {
                let mut m = &term[n] * &l0;
                if n > 0 {
                    m += &term[n - 1] * &j;
                }
                m * inv
            })
            .collect();
        term = next;
        let size: f64 = term.iter().map(|m| m.norm()).sum();
        for (o, tk) in out.iter_mut().zip(&term) {
            *o += tk;
        }
        if size < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        out = series_mul(&out, &out);
    }
    Ok(out)
}

pub fn mandel_from_moments(mean: f64, second: f64) -> Result<f64> {
    if mean <= 1e-300 {
        return Err(Error::ZeroCounts(mean));
    }
    Ok(second / mean - mean)
}

pub fn pn(spec: &ModelSpec, t: f64, n_max: usize) -> Result<Vec<f64>> {
    Counting::new(spec)?.pn(t, n_max, None)
}

pub fn mean_counts(spec: &ModelSpec, t: f64) -> Result<f64> {
    Counting::new(spec)?.mean_counts(t, None)
}

pub fn second_factorial(spec: &ModelSpec, t: f64) -> Result<f64> {
    Counting::new(spec)?.second_factorial(t, None)
}

pub fn mandel_q(spec: &ModelSpec, t: f64) -> Result<f64> {
    Counting::new(spec)?.mandel_q(t, None)
}

/// `I(ω_L) = lim dN̄/dt = Σ_R γ̃_R ⟨b|ρ_R^∞|b⟩`.
pub fn line_shape(spec: &ModelSpec) -> Result<f64> {
    Ok(Stationary::new(spec)?.intensity())
}

/// Line shape over a grid of laser detunings.
pub fn line_shape_sweep(spec: &ModelSpec, detunings: &[f64]) -> Result<ObservableSeries> {
    check_grid(detunings)?;
    let values = detunings
        .par_iter()
        .map(|&d| line_shape(&spec.with_detuning(d)))
        .collect::<Result<Vec<f64>>>()?;
    ObservableSeries::new(
        detunings.to_vec(),
        SeriesValues::Real(values),
        SeriesKind::LineShape,
        "1/time",
    )
}

/// Laurent coefficients of the first two s-derivatives of the generating
/// function at `s = 1`, for `Y′(u) = b/u² + a/u + …` and
/// `Y″(u) = 2B/u³ + A/u² + …`.
#[derive(Debug, Clone, Copy)]
pub struct MandelCoefficients {
    pub a: f64,
    pub b: f64,
    pub big_a: f64,
    pub big_b: f64,
    /// `I(ω_L)` from the steady state, which must equal `2b`.
    pub line_shape: f64,
}

impl MandelCoefficients {
    pub fn q(&self) -> f64 {
        self.big_a / self.b - 4.0 * self.a
    }
}

/// Laurent coefficients for the start state `rho0` (default: steady).
pub fn mandel_coefficients(spec: &ModelSpec, rho0: Option<&BlockState>) -> Result<MandelCoefficients> {
    let l = build_generator(spec)?;
    let j = jump_superop(spec)?.matrix;
    let dec = laurent_decomposition(&l)?;
    let tr = trace_functional(spec.r_max()).transpose();
    let x0 = match rho0 {
        Some(x) => {
            if x.dim() != l.dim() {
                return Err(Error::DimensionMismatch {
                    expected: l.dim(),
                    found: x.dim(),
                });
            }
            x.to_vector()
        }
        None => dec.steady.to_vector(),
    };
    let p = &dec.projector.matrix;
    let r0 = &dec.reduced_resolvent.matrix;
    let ss = dec.steady.to_vector();
    let scalar = |v: DVector<C64>| (&tr * v)[0].re;

    let intensity = scalar(&j * &ss);
    let tjr0 = scalar(&j * (r0 * &x0));
    // Y′ = ½ τ (u−L)⁻¹ J (u−L)⁻¹ ρ₀ and τ(u−L)⁻¹ = τ/u.
    let b = 0.5 * scalar(&j * (p * &x0));
    let a = 0.5 * tjr0;
    // Y″ = τ (u−L)⁻¹ J (u−L)⁻¹ J (u−L)⁻¹ ρ₀.
    let big_b = 0.5 * scalar(&j * (p * (&j * (p * &x0))));
    let big_a = scalar(&j * (p * (&j * (r0 * &x0)))) + scalar(&j * (r0 * (&j * (p * &x0))));
    Ok(MandelCoefficients {
        a,
        b,
        big_a,
        big_b,
        line_shape: intensity,
    })
}

/// Exact stationary Mandel factor `Q_st = A/b − 4a`.
pub fn stationary_mandel(spec: &ModelSpec) -> Result<f64> {
    let c = mandel_coefficients(spec, None)?;
    if c.b <= 1e-300 {
        return Err(Error::ZeroCounts(c.b));
    }
    let scale = c.big_b.abs().max(2.0 * c.b * c.b);
    if (c.big_b - 2.0 * c.b * c.b).abs() > 1e-9 * scale {
        return Err(Error::LaurentMismatch(format!(
            "B = {:e} but 2b² = {:e}",
            c.big_b,
            2.0 * c.b * c.b
        )));
    }
    if (c.line_shape - 2.0 * c.b).abs() > 1e-9 * c.line_shape {
        return Err(Error::LaurentMismatch(format!(
            "line shape {:e} but 2b = {:e}",
            c.line_shape,
            2.0 * c.b
        )));
    }
    Ok(c.q())
}

/// Stationary Mandel factor over a grid of laser detunings.
pub fn stationary_mandel_sweep(spec: &ModelSpec, detunings: &[f64]) -> Result<ObservableSeries> {
    check_grid(detunings)?;
    let values = detunings
        .par_iter()
        .map(|&d| stationary_mandel(&spec.with_detuning(d)))
        .collect::<Result<Vec<f64>>>()?;
    ObservableSeries::new(
        detunings.to_vec(),
        SeriesValues::Real(values),
        SeriesKind::MandelQ,
        "1",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn markov() -> ModelSpec {
        ModelSpec::single(1.0, 0.5f64.sqrt(), 0.0)
    }

    #[test]
    fn split_recombines() {
        let mut spec = ModelSpec::single(1.0, 1.0, 0.2);
        spec.space = crate::model::ConfigSpace::new(2);
        spec.per_state = vec![
            crate::model::PerStateParams::new(0.0, 1.0, 1.0),
            crate::model::PerStateParams::new(0.0, 10.0, 1.0),
        ];
        spec.rates = crate::model::FluctuationRates::zeros(2);
        spec.rates.gamma_cross.set(0, 1, 0.02);
        spec.rates.gamma_cross.set(1, 0, 0.0015);
        let split = counting_split(&spec).unwrap();
        let l = build_generator(&spec).unwrap();
        assert!((split.generator().matrix - l.matrix).norm() < 1e-14);
        // Cross gain from block 1 into block 0.
        assert!((split.jump.matrix[(AA, 4 + BB)].re - 0.02).abs() < 1e-15);
        assert!((split.jump.matrix[(4 + AA, BB)].re - 0.0015).abs() < 1e-15);
    }

    #[test]
    fn single_state_jump_is_sandwich() {
        let split = counting_split(&ModelSpec::single(2.0, 1.0, 0.0)).unwrap();
        let mut want = DMatrix::<C64>::zeros(4, 4);
        want[(AA, BB)] = C64::from(2.0);
        assert_eq!(split.jump.matrix, want);
    }

    #[test]
    fn series_matches_dense_hierarchy() {
        let mut spec = ModelSpec::single(1.0, 1.3, 0.4);
        spec.space = crate::model::ConfigSpace::new(2);
        spec.per_state = vec![
            crate::model::PerStateParams::new(0.3, 1.0, 1.3),
            crate::model::PerStateParams::new(-0.2, 4.0, 0.7),
        ];
        spec.rates = crate::model::FluctuationRates::zeros(2);
        spec.rates.phi.set(0, 1, 0.2);
        spec.rates.gamma_cross.set(1, 0, 0.3);
        let split = counting_split(&spec).unwrap();
        let (d, levels, t) = (8, 6, 3.7);
        let mut big = DMatrix::<C64>::zeros(d * levels, d * levels);
        for n in 0..levels {
            big.view_mut((d * n, d * n), (d, d)).copy_from(&split.drift.matrix);
            if n > 0 {
                big.view_mut((d * n, d * (n - 1)), (d, d)).copy_from(&split.jump.matrix);
            }
        }
        let dense = (big * C64::from(t)).exp();
        let series = series_propagator(&split, t, levels).unwrap();
        for (n, u) in series.iter().enumerate() {
            let want = dense.view((d * n, 0), (d, d));
            assert!((u - want).norm() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn zero_time_counts_nothing() {
        let p = pn(&markov(), 0.0, 4).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(mean_counts(&markov(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn dark_emitter_never_clicks() {
        let spec = ModelSpec::single(1.0, 0.0, 0.0);
        let p = pn(&spec, 5.0, 3).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14);
        assert!(matches!(mandel_q(&spec, 5.0), Err(Error::ZeroCounts(_))));
    }

    #[test]
    fn moments_match_distribution() {
        let c = Counting::new(&markov()).unwrap();
        let rec = c.record(20.0, 40, None).unwrap();
        assert!(rec.remainder.abs() < 1e-12);
        let m1: f64 = rec.pn.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let m2: f64 = rec
            .pn
            .iter()
            .enumerate()
            .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
            .sum();
        assert!((m1 - rec.mean).abs() < 1e-9);
        assert!((m2 - rec.second_factorial).abs() < 1e-8);
        assert!(rec.pn.iter().all(|p| *p >= -1e-12 && *p <= 1.0));
    }

    #[test]
    fn short_time_rate() {
        let t = 1e-4;
        let n = mean_counts(&markov(), t).unwrap();
        assert!((n / t - 0.25).abs() < 1e-4);
    }

    #[test]
    fn centered_mandel_matches_raw_moments() {
        let spec = ModelSpec::single(1.0, 1.0, 0.4);
        let c = Counting::new(&spec).unwrap();
        let ss = c.steady.clone();
        for t in [0.5, 3.0, 40.0] {
            let raw = c.mandel_q(t, Some(&ss)).unwrap();
            let centered = c.mandel_q(t, None).unwrap();
            assert!((raw - centered).abs() < 1e-10, "t = {t}: {raw} vs {centered}");
        }
    }

    #[test]
    fn markovian_stationary_mandel() {
        // −6Ω²γ²/(γ² + 2Ω²)² at γ = Ω = 1.
        let q = stationary_mandel(&ModelSpec::single(1.0, 1.0, 0.0)).unwrap();
        assert!((q + 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn q_st_independent_of_start() {
        let spec = ModelSpec::single(1.0, 1.3, 0.4);
        let c = mandel_coefficients(&spec, Some(&BlockState::ground_in(1, 0))).unwrap();
        let q0 = stationary_mandel(&spec).unwrap();
        assert!((c.q() - q0).abs() < 1e-12);
        assert!(c.a.abs() > 1e-3);
    }

    #[test]
    fn generating_function_at_one_is_trace() {
        let c = Counting::new(&markov()).unwrap();
        let y = c.generating_function(3.0, 1.0, Some(&BlockState::ground_in(1, 0))).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn sweep_grid_checked() {
        assert!(line_shape_sweep(&markov(), &[1.0, 0.0]).is_err());
        let s = line_shape_sweep(&markov(), &[-1.0, 0.0, 1.0]).unwrap().real();
        assert!((s[0] - s[2]).abs() < 1e-14 && s[1] > s[0]);
    }
}
