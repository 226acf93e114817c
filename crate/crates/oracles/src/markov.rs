//! Standard resonance fluorescence of a driven two-level atom, written out by
//! hand in the element order `(ρ_aa, ρ_bb, ρ_ab, ρ_ba)`.
//!
//! `H = (δ/2)(|a⟩⟨a| − |b⟩⟨b|) + (Ω/2)(|a⟩⟨b| + |b⟩⟨a|)`, decay `γ` from `b` to `a`.

use num_complex::Complex64 as C;

use crate::ode::Dopri5;

#[derive(Debug, Clone, Copy)]
pub struct ResonanceFluorescence {
    pub gamma: f64,
    pub omega: f64,
    pub delta: f64,
}

impl ResonanceFluorescence {
    pub fn new(gamma: f64, omega: f64, delta: f64) -> Self {
        Self { gamma, omega, delta }
    }

    /// Time derivative of `(ρ_aa, ρ_bb, ρ_ab, ρ_ba)`. Linear, so it applies
    /// equally to non-Hermitian regression vectors.
    pub fn rhs(&self, x: [C; 4]) -> [C; 4] {
        let i = C::new(0.0, 1.0);
        let (g, om, d) = (self.gamma, self.omega, self.delta);
        let [aa, bb, ab, ba] = x;
        [
            -i * (om / 2.0) * (ba - ab) + g * bb,
            -i * (om / 2.0) * (ab - ba) - g * bb,
            -i * (d * ab + (om / 2.0) * (bb - aa)) - (g / 2.0) * ab,
            -i * (-d * ba + (om / 2.0) * (aa - bb)) - (g / 2.0) * ba,
        ]
    }

    /// The 4×4 Liouvillian in the same element order, column `k` = rhs of unit vector `k`.
    pub fn liouvillian(&self) -> [[C; 4]; 4] {
        let mut m = [[C::new(0.0, 0.0); 4]; 4];
        for k in 0..4 {
            let mut e = [C::new(0.0, 0.0); 4];
            e[k] = C::new(1.0, 0.0);
            let col = self.rhs(e);
            for r in 0..4 {
                m[r][k] = col[r];
            }
        }
        m
    }

    /// `ρ_bb = Ω²/(4δ² + γ² + 2Ω²)`.
    pub fn excited_population(&self) -> f64 {
        let (g, om, d) = (self.gamma, self.omega, self.delta);
        om * om / (4.0 * d * d + g * g + 2.0 * om * om)
    }

    /// Closed-form stationary `(ρ_aa, ρ_bb, ρ_ab, ρ_ba)`.
    pub fn steady(&self) -> [C; 4] {
        let pb = self.excited_population();
        let i = C::new(0.0, 1.0);
        // 0 = −iδρ_ab − i(Ω/2)(2ρ_bb − 1) − (γ/2)ρ_ab
        let ab = -i * (self.omega / 2.0) * (2.0 * pb - 1.0) / (C::new(self.gamma / 2.0, self.delta));
        [C::new(1.0 - pb, 0.0), C::new(pb, 0.0), ab, ab.conj()]
    }

    pub fn intensity(&self) -> f64 {
        self.gamma * self.excited_population()
    }

    /// `γ|ρ_ab|²`.
    pub fn coherent_weight(&self) -> f64 {
        self.gamma * self.steady()[2].norm_sqr()
    }

    /// Integrates the master equation from `x0` to each output time.
    pub fn evolve(&self, x0: [C; 4], times: &[f64], solver: &Dopri5) -> Vec<[C; 4]> {
        let y0: Vec<f64> = x0.iter().flat_map(|z| [z.re, z.im]).collect();
        let sol = solver.solve(
            |_, y, dy| {
                let x = [
                    C::new(y[0], y[1]),
                    C::new(y[2], y[3]),
                    C::new(y[4], y[5]),
                    C::new(y[6], y[7]),
                ];
                let r = self.rhs(x);
                for k in 0..4 {
                    dy[2 * k] = r[k].re;
                    dy[2 * k + 1] = r[k].im;
                }
            },
            0.0,
            &y0,
            times,
        );
        sol.into_iter()
            .map(|y| {
                [
                    C::new(y[0], y[1]),
                    C::new(y[2], y[3]),
                    C::new(y[4], y[5]),
                    C::new(y[6], y[7]),
                ]
            })
            .collect()
    }

    /// `γ ⟨σ†(0) σ(τ)⟩` on increasing `τ ≥ 0`.
    pub fn c1(&self, taus: &[f64], solver: &Dopri5) -> Vec<C> {
        let [_, bb, ab, _] = self.steady();
        // ρ σ† with σ† = |b⟩⟨a| moves column b into column a.
        let seed = [ab, C::new(0.0, 0.0), C::new(0.0, 0.0), bb];
        // Element order (aa, bb, ab, ba): x_aa = ρ_ab, x_ba = ρ_bb.
        let seed = [seed[0], seed[2], seed[1], seed[3]];
        self.evolve(seed, taus, solver)
            .into_iter()
            .map(|x| x[3] * self.gamma)
            .collect()
    }

    /// `γ² ⟨σ†(0)σ†(τ)σ(τ)σ(0)⟩`.
    pub fn c2(&self, taus: &[f64], solver: &Dopri5) -> Vec<f64> {
        let pb = self.excited_population();
        let z = C::new(0.0, 0.0);
        let seed = [C::new(self.gamma * pb, 0.0), z, z, z];
        self.evolve(seed, taus, solver)
            .into_iter()
            .map(|x| self.gamma * x[1].re)
            .collect()
    }

    pub fn g2(&self, taus: &[f64], solver: &Dopri5) -> Vec<f64> {
        let i2 = self.intensity().powi(2);
        self.c2(taus, solver).into_iter().map(|v| v / i2).collect()
    }

    /// Textbook on-resonance `g₂(τ) = 1 − e^{−3γτ/4}(cos μτ + (3γ/4μ) sin μτ)`, `μ = √(Ω² − γ²/16)`.
    pub fn g2_resonant_closed_form(&self, tau: f64) -> f64 {
        let g = self.gamma;
        let mu2 = self.omega * self.omega - g * g / 16.0;
        let e = (-0.75 * g * tau).exp();
        if mu2 > 0.0 {
            let mu = mu2.sqrt();
            1.0 - e * ((mu * tau).cos() + 0.75 * g / mu * (mu * tau).sin())
        } else {
            let k = (-mu2).sqrt();
            1.0 - e * ((k * tau).cosh() + 0.75 * g / k * (k * tau).sinh())
        }
    }

    /// On-resonance stationary Mandel factor `−6Ω²γ²/(γ² + 2Ω²)²`.
    pub fn mandel_resonant(&self) -> f64 {
        let (g, om) = (self.gamma, self.omega);
        -6.0 * om * om * g * g / (g * g + 2.0 * om * om).powi(2)
    }
}
