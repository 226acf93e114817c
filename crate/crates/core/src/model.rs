//! Model parameterization: configurational macrostates, per-state fluorophore
//! parameters, and the tables of configurational transition rates.
//!
//! # Rate-table orientation
//!
//! Every rate table is indexed `table[R][R']` and holds the rate of the
//! transition `R' → R`, i.e. the gain *into* row `R` from column `R'`. The loss
//! out of block `R` is therefore the column sum `Σ_{R'} table[R'][R]`. The
//! diagonals are always zero: self-transitions carry no meaning, and the
//! diagonal emission channel lives in [`PerStateParams::gamma`].
//!
//! Time and frequency share a single user-chosen unit, with `ħ = 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square table of nonnegative rates, `table[R][R']` for `R' → R`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateTable(pub Vec<Vec<f64>>);

impl RateTable {
    pub fn zeros(n: usize) -> Self {
        Self(vec![vec![0.0; n]; n])
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self(rows)
    }

    /// Rate of the transition `from → to`.
    pub fn rate(&self, to: usize, from: usize) -> f64 {
        self.0[to][from]
    }

    pub fn set(&mut self, to: usize, from: usize, value: f64) {
        self.0[to][from] = value;
    }

    /// Total rate out of `from`, `Σ_{R} table[R][from]`.
    pub fn outflow(&self, from: usize) -> f64 {
        self.0.iter().map(|row| row[from]).sum()
    }

    pub fn rows(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|&x| x == 0.0)
    }

    fn check(&self, n: usize, path: &str, out: &mut Vec<Violation>) {
        if self.0.len() != n {
            out.push(Violation::new(
                path,
                format!("expected {n} rows, found {}", self.0.len()),
            ));
            return;
        }
        for (i, row) in self.0.iter().enumerate() {
            if row.len() != n {
                out.push(Violation::new(
                    format!("{path}[{i}]"),
                    format!("expected {n} columns, found {}", row.len()),
                ));
                continue;
            }
            for (j, &x) in row.iter().enumerate() {
                let p = format!("{path}[{i}][{j}]");
                if !x.is_finite() {
                    out.push(Violation::new(p, "rate is not finite"));
                } else if x < 0.0 {
                    out.push(Violation::new(p, format!("rate {x} is negative")));
                } else if i == j && x != 0.0 {
                    out.push(Violation::new(p, "diagonal entry must be zero"));
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpace {
    pub r_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ConfigSpace {
    pub fn new(r_max: usize) -> Self {
        Self { r_max, labels: None }
    }
}

/// Fluorophore parameters felt while the environment sits in one macrostate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerStateParams {
    /// Transition frequency shift `δω_A^(R)`.
    pub delta_omega: f64,
    /// Radiative decay rate `γ_R`.
    pub gamma: f64,
    /// Rabi frequency `Ω_R`.
    pub omega_rabi: f64,
}

impl PerStateParams {
    pub fn new(delta_omega: f64, gamma: f64, omega_rabi: f64) -> Self {
        Self {
            delta_omega,
            gamma,
            omega_rabi,
        }
    }
}

/// Environment fluctuation rates.
///
/// `phi` holds the system-independent transitions; `gamma_cross` the
/// transitions that accompany a photon emission.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationRates {
    pub phi: RateTable,
    pub gamma_cross: RateTable,
}

impl FluctuationRates {
    pub fn zeros(n: usize) -> Self {
        Self {
            phi: RateTable::zeros(n),
            gamma_cross: RateTable::zeros(n),
        }
    }
}

/// System operator `A` attached to a general fluctuation channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    /// `A = I`
    Identity,
    /// `A = σ = |a⟩⟨b|`
    Lower,
    /// `A = σ† = |b⟩⟨a|`
    Raise,
    /// `A = |b⟩⟨b|`
    UpperProjector,
    /// `A = |a⟩⟨a|`
    LowerProjector,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 5] = [
        OperatorKind::Identity,
        OperatorKind::Lower,
        OperatorKind::Raise,
        OperatorKind::UpperProjector,
        OperatorKind::LowerProjector,
    ];

    pub fn operator(self) -> crate::state::Op2 {
        use crate::state::*;
        match self {
            OperatorKind::Identity => identity(),
            OperatorKind::Lower => sigma(),
            OperatorKind::Raise => sigma_dag(),
            OperatorKind::UpperProjector => proj_b(),
            OperatorKind::LowerProjector => proj_a(),
        }
    }
}

/// Extra fluctuation channel: loss `−(η_{R'R}/2){A†A, ρ_R}` and gain
/// `η_{RR'} A ρ_{R'} A†`. Never counted as a photon detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralJumpChannel {
    pub operator_kind: OperatorKind,
    pub eta: RateTable,
}

/// Full model: configuration space, per-state parameters, rate tables and
/// the laser detuning `δ = ω_L − ω_A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub space: ConfigSpace,
    pub per_state: Vec<PerStateParams>,
    pub rates: FluctuationRates,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_channels: Vec<GeneralJumpChannel>,
    pub detuning: f64,
}

impl ModelSpec {
    /// Markovian single-state model.
    pub fn single(gamma: f64, omega_rabi: f64, detuning: f64) -> Self {
        Self {
            space: ConfigSpace::new(1),
            per_state: vec![PerStateParams::new(0.0, gamma, omega_rabi)],
            rates: FluctuationRates::zeros(1),
            extra_channels: Vec::new(),
            detuning,
        }
    }

    pub fn r_max(&self) -> usize {
        self.space.r_max
    }

    /// Vectorized dimension `4·R_max`.
    pub fn dim(&self) -> usize {
        4 * self.space.r_max
    }

    /// Copy with a different laser detuning.
    pub fn with_detuning(&self, detuning: f64) -> Self {
        Self {
            detuning,
            ..self.clone()
        }
    }

    /// Rotating-frame detuning of state `r`: `δ_R = δ − δω_A^(R)`.
    pub fn state_detuning(&self, r: usize) -> f64 {
        self.detuning - self.per_state[r].delta_omega
    }

    /// Effective decay `γ̃_R = γ_R + Σ_{R'} γ_{R'R}`.
    pub fn effective_decay(&self, r: usize) -> Result<f64> {
        if r >= self.r_max() || r >= self.per_state.len() {
            return Err(Error::IndexOutOfRange {
                index: r,
                r_max: self.r_max(),
            });
        }
        Ok(self.per_state[r].gamma + self.rates.gamma_cross.outflow(r))
    }

    /// `γ̃_R` for every state. Assumes a validated model.
    pub fn effective_decays(&self) -> Vec<f64> {
        (0..self.r_max())
            .map(|r| self.per_state[r].gamma + self.rates.gamma_cross.outflow(r))
            .collect()
    }

    /// Every invariant violation, empty when the model is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.space.r_max;
        if n == 0 {
            out.push(Violation::new("space.r_max", "must be at least 1"));
            return out;
        }
        if let Some(labels) = &self.space.labels {
            if labels.len() != n {
                out.push(Violation::new(
                    "space.labels",
                    format!("expected {n} labels, found {}", labels.len()),
                ));
            }
        }
        if self.per_state.len() != n {
            out.push(Violation::new(
                "per_state",
                format!("expected {n} entries, found {}", self.per_state.len()),
            ));
        }
        for (r, p) in self.per_state.iter().enumerate() {
            let path = |f: &str| format!("per_state[{r}].{f}");
            if !p.delta_omega.is_finite() {
                out.push(Violation::new(path("delta_omega"), "not finite"));
            }
            if !p.gamma.is_finite() || p.gamma < 0.0 {
                out.push(Violation::new(
                    path("gamma"),
                    format!("decay rate {} must be finite and nonnegative", p.gamma),
                ));
            }
            if !p.omega_rabi.is_finite() || p.omega_rabi < 0.0 {
                out.push(Violation::new(
                    path("omega_rabi"),
                    format!("Rabi frequency {} must be finite and nonnegative", p.omega_rabi),
                ));
            }
        }
        self.rates.phi.check(n, "rates.phi", &mut out);
        self.rates.gamma_cross.check(n, "rates.gamma_cross", &mut out);
        let mut seen = Vec::new();
        for (k, ch) in self.extra_channels.iter().enumerate() {
            if seen.contains(&ch.operator_kind) {
                out.push(Violation::new(
                    format!("extra_channels[{k}].operator_kind"),
                    format!("duplicate channel kind {:?}", ch.operator_kind),
                ));
            }
            seen.push(ch.operator_kind);
            ch.eta.check(n, &format!("extra_channels[{k}].eta"), &mut out);
        }
        if !self.detuning.is_finite() {
            out.push(Violation::new("detuning", "not finite"));
        }
        if out.is_empty() {
            for (r, g) in self.effective_decays().into_iter().enumerate() {
                if !g.is_finite() {
                    out.push(Violation::new(
                        format!("effective_decay[{r}]"),
                        "effective decay is not finite",
                    ));
                }
            }
        }
        out
    }

    /// `validate` as a `Result`.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(v))
        }
    }
}

/// One failed invariant, with a path-like locator into the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}
