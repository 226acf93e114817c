//! Quantum-jump unraveling of resonance fluorescence, counting emissions.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::markov::ResonanceFluorescence;

type Vec2 = [C; 2];
type Mat2 = [[C; 2]; 2];

fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn norm2(v: &Vec2) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// `e^{tM}` of a 2×2 matrix via `e^{mt}[cosh(Δt) + sinh(Δt)/Δ (M − m)]`.
fn expm2(m: &Mat2, t: f64) -> Mat2 {
    let half = (m[0][0] + m[1][1]) / 2.0;
    let a = m[0][0] - half;
    let disc = (a * a + m[0][1] * m[1][0]).sqrt();
    let (ch, sh) = if disc.norm() * t.abs() < 1e-8 {
        (C::new(1.0, 0.0), C::new(t, 0.0))
    } else {
        ((disc * t).cosh(), (disc * t).sinh() / disc)
    };
    let e = (half * t).exp();
    [
        [e * (ch + sh * a), e * sh * m[0][1]],
        [e * sh * m[1][0], e * (ch - sh * a)],
    ]
}

#[derive(Debug, Clone, Copy)]
pub struct JumpSimulator {
    pub model: ResonanceFluorescence,
}

impl JumpSimulator {
    pub fn new(model: ResonanceFluorescence) -> Self {
        Self { model }
    }

    /// `−i H_eff` with `H_eff = H − (iγ/2)|b⟩⟨b|`, basis `(a, b)`.
    fn drift(&self) -> Mat2 {
        let (g, om, d) = (self.model.gamma, self.model.omega, self.model.delta);
        let i = C::new(0.0, 1.0);
        let h = [
            [C::new(d / 2.0, 0.0), C::new(om / 2.0, 0.0)],
            [C::new(om / 2.0, 0.0), C::new(-d / 2.0, -g / 2.0)],
        ];
        [[-i * h[0][0], -i * h[0][1]], [-i * h[1][0], -i * h[1][1]]]
    }

    /// Samples a pure state from the eigen-decomposition of the stationary state.
    fn initial_state(&self, rng: &mut ChaCha8Rng) -> Vec2 {
        let [aa, bb, ab, _] = self.model.steady();
        let (p, q) = (aa.re, bb.re);
        let mean = 0.5 * (p + q);
        let r = (0.25 * (p - q) * (p - q) + ab.norm_sqr()).sqrt();
        let lam_hi = mean + r;
        // Eigenvector of [[p, ab], [ab*, q]] for eigenvalue λ: (ab, λ − p) or (λ − q, ab*).
        let vec_for = |lam: f64| -> Vec2 {
            let v1 = [ab, C::new(lam - p, 0.0)];
            let v2 = [C::new(lam - q, 0.0), ab.conj()];
            let v = if norm2(&v1) >= norm2(&v2) { v1 } else { v2 };
            let n = norm2(&v).sqrt();
            if n == 0.0 {
                return if lam == p { [C::new(1.0, 0.0), C::new(0.0, 0.0)] } else { [C::new(0.0, 0.0), C::new(1.0, 0.0)] };
            }
            [v[0] / n, v[1] / n]
        };
        if r < 1e-300 {
            // Degenerate: any basis works.
            return if rng.gen::<f64>() < p { [C::new(1.0, 0.0), C::new(0.0, 0.0)] } else { [C::new(0.0, 0.0), C::new(1.0, 0.0)] };
        }
        if rng.gen::<f64>() < lam_hi {
            vec_for(lam_hi)
        } else {
            vec_for(mean - r)
        }
    }

    /// Number of emissions in `[0, t]` for one trajectory.
    pub fn count(&self, t: f64, rng: &mut ChaCha8Rng) -> usize {
        let m = self.drift();
        let mut psi = self.initial_state(rng);
        let mut elapsed = 0.0;
        let mut n = 0;
        loop {
            let target: f64 = rng.gen();
            let remaining = t - elapsed;
            let at_end = mat_vec(&expm2(&m, remaining), &psi);
            if norm2(&at_end) > target {
                return n;
            }
            let (mut lo, mut hi) = (0.0, remaining);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if norm2(&mat_vec(&expm2(&m, mid), &psi)) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            elapsed += 0.5 * (lo + hi);
            n += 1;
            psi = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
        }
    }

    /// Histogram of counts over `trajectories` runs; the last bin collects `≥ n_max`.
    pub fn histogram(&self, t: f64, trajectories: usize, n_max: usize, seed: u64) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = vec![0; n_max + 1];
        for _ in 0..trajectories {
            let n = self.count(t, &mut rng).min(n_max);
            h[n] += 1;
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_exponential_of_diagonal() {
        let m = [[C::new(-1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(-3.0, 0.0)]];
        let e = expm2(&m, 0.7);
        assert!((e[0][0].re - (-0.7f64).exp()).abs() < 1e-14);
        assert!((e[1][1].re - (-2.1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn mean_count_rate() {
        let sim = JumpSimulator::new(ResonanceFluorescence::new(1.0, 0.5f64.sqrt(), 0.0));
        let h = sim.histogram(40.0, 4000, 200, 7);
        let mean: f64 = h.iter().enumerate().map(|(n, c)| n as f64 * *c as f64).sum::<f64>() / 4000.0;
        // I_st t = 10, standard error about 0.05.
        assert!((mean - 10.0).abs() < 0.3, "{mean}");
    }
}
