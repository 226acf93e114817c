//! Run configuration: a versioned TOML document naming the task, the model
//! and the grids.
//!
//! ```toml
//! schema_version = 1
//! task = "spectrum"
//!
//! [model]
//! scenario = "spectral-two-state"
//! gamma = 1.0
//! omega_rabi = 0.7071067811865476
//! delta_omega = 0.1
//! phi = 0.008
//!
//! [grids.omega]
//! start = -1.0
//! stop = 1.0
//! count = 2001
//! ```
//!
//! Unknown keys are rejected everywhere. Parsing resolves every default, so
//! that emitting and re-parsing a resolved configuration is the identity.

use serde::{Deserialize, Serialize};
use smsrate::scenarios::{self, fixtures};
use smsrate::{ModelSpec, RateTable};

use crate::error::ConfigError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_N_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Steady,
    Spectrum,
    G2,
    C1,
    C2,
    Counting,
    MandelSweep,
    LineshapeSweep,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::Steady,
        Task::Spectrum,
        Task::G2,
        Task::C1,
        Task::C2,
        Task::Counting,
        Task::MandelSweep,
        Task::LineshapeSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Steady => "steady",
            Task::Spectrum => "spectrum",
            Task::G2 => "g2",
            Task::C1 => "c1",
            Task::C2 => "c2",
            Task::Counting => "counting",
            Task::MandelSweep => "mandel-sweep",
            Task::LineshapeSweep => "lineshape-sweep",
        }
    }

    /// The grid axis the task iterates over.
    pub fn axis(self) -> Option<Axis> {
        match self {
            Task::Steady => None,
            Task::Spectrum => Some(Axis::Omega),
            Task::G2 | Task::C1 | Task::C2 => Some(Axis::Tau),
            Task::Counting => Some(Axis::T),
            Task::MandelSweep | Task::LineshapeSweep => Some(Axis::Detuning),
        }
    }

    fn default_grid(self) -> Option<GridSpec> {
        let lin = |start, stop, count| GridSpec {
            start,
            stop,
            count,
            spacing: Spacing::Linear,
        };
        match self {
            Task::Steady => None,
            Task::Spectrum => Some(lin(-10.0, 10.0, 2001)),
            Task::G2 | Task::C1 | Task::C2 => Some(lin(0.0, 20.0, 401)),
            Task::Counting => Some(lin(1.0, 20.0, 20)),
            Task::MandelSweep => Some(lin(0.0, 30.0, 61)),
            Task::LineshapeSweep => Some(lin(-10.0, 10.0, 201)),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Omega,
    Tau,
    T,
    Detuning,
}

impl Axis {
    pub fn key(self) -> &'static str {
        match self {
            Axis::Omega => "omega",
            Axis::Tau => "tau",
            Axis::T => "t",
            Axis::Detuning => "detuning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    /// Grid points; the end points are reproduced exactly.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                if k == 0 {
                    return self.start;
                }
                if k == n - 1 {
                    return self.stop;
                }
                let f = k as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * f,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * f).exp(),
                }
            })
            .collect()
    }

    fn check(&self, path: &str) -> Result<(), ConfigError> {
        if self.count < 2 {
            return Err(ConfigError::at(format!("{path}.count"), format!("must be at least 2, got {}", self.count)));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(ConfigError::at(path, "start and stop must be finite"));
        }
        if self.stop <= self.start {
            return Err(ConfigError::at(path, format!("stop ({}) must exceed start ({})", self.stop, self.start)));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(ConfigError::at(
                format!("{path}.start"),
                format!("log spacing needs a positive start, got {}", self.start),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<GridSpec>,
}

impl Grids {
    pub fn get(&self, axis: Axis) -> Option<&GridSpec> {
        match axis {
            Axis::Omega => self.omega.as_ref(),
            Axis::Tau => self.tau.as_ref(),
            Axis::T => self.t.as_ref(),
            Axis::Detuning => self.detuning.as_ref(),
        }
    }

    fn slot(&mut self, axis: Axis) -> &mut Option<GridSpec> {
        match axis {
            Axis::Omega => &mut self.omega,
            Axis::Tau => &mut self.tau,
            Axis::T => &mut self.t,
            Axis::Detuning => &mut self.detuning,
        }
    }
}

/// The model, either from a scenario constructor or as inline tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    /// A single configurational state: standard resonance fluorescence.
    Markov {
        gamma: f64,
        omega_rabi: f64,
        #[serde(default)]
        detuning: f64,
    },
    SpectralTwoState {
        gamma: f64,
        omega_rabi: f64,
        delta_omega: f64,
        phi: f64,
        #[serde(default)]
        detuning: f64,
    },
    LifetimeFluct {
        gammas: Vec<f64>,
        phi: RateTable,
        omega_rabi: f64,
        #[serde(default)]
        detuning: f64,
    },
    DiffusionChain {
        n_sites: usize,
        omega_profile: Vec<f64>,
        phi_hop: f64,
        gamma: f64,
        #[serde(default)]
        detuning: f64,
    },
    LightAssisted {
        gammas: Vec<f64>,
        gamma_cross: RateTable,
        omega_rabi: f64,
        #[serde(default)]
        detuning: f64,
    },
    /// The self-fluctuating image of a two-state light-assisted model; the
    /// switching rates are evaluated once, at `detuning`.
    MappedSelfFluct {
        gammas: Vec<f64>,
        gamma_cross: RateTable,
        omega_rabi: f64,
        #[serde(default)]
        detuning: f64,
    },
    /// A two-state light-assisted model whose `γ₁₂` and `Ω` grow with `|δ|`.
    ScaledTriplet {
        gammas: Vec<f64>,
        gamma_cross: RateTable,
        omega_rabi: f64,
        #[serde(default)]
        detuning: f64,
        delta0: f64,
        omega_bar: f64,
        gamma12_bar: f64,
    },
    /// One of the built-in parameter sets, by name.
    Fixture { name: String },
    Inline { spec: ModelSpec },
}

impl ModelConfig {
    pub fn scenario(&self) -> &'static str {
        match self {
            ModelConfig::Markov { .. } => "markov",
            ModelConfig::SpectralTwoState { .. } => "spectral-two-state",
            ModelConfig::LifetimeFluct { .. } => "lifetime-fluct",
            ModelConfig::DiffusionChain { .. } => "diffusion-chain",
            ModelConfig::LightAssisted { .. } => "light-assisted",
            ModelConfig::MappedSelfFluct { .. } => "mapped-self-fluct",
            ModelConfig::ScaledTriplet { .. } => "scaled-triplet",
            ModelConfig::Fixture { .. } => "fixture",
            ModelConfig::Inline { .. } => "inline",
        }
    }

    /// Builds the model, at the laser detuning `detuning` when given.
    pub fn build(&self, detuning: Option<f64>) -> smsrate::Result<ModelSpec> {
        let spec = match self {
            ModelConfig::Markov {
                gamma,
                omega_rabi,
                detuning,
            } => {
                let spec = ModelSpec::single(*gamma, *omega_rabi, *detuning);
                spec.ensure_valid()?;
                spec
            }
            ModelConfig::SpectralTwoState {
                gamma,
                omega_rabi,
                delta_omega,
                phi,
                detuning,
            } => scenarios::spectral_two_state(*gamma, *omega_rabi, *delta_omega, *phi, *detuning)?,
            ModelConfig::LifetimeFluct {
                gammas,
                phi,
                omega_rabi,
                detuning,
            } => scenarios::lifetime_fluct(gammas, phi.clone(), *omega_rabi, *detuning)?,
            ModelConfig::DiffusionChain {
                n_sites,
                omega_profile,
                phi_hop,
                gamma,
                detuning,
            } => scenarios::diffusion_chain(*n_sites, omega_profile, *phi_hop, *gamma, *detuning)?,
            ModelConfig::LightAssisted {
                gammas,
                gamma_cross,
                omega_rabi,
                detuning,
            } => scenarios::light_assisted(gammas, gamma_cross.clone(), *omega_rabi, *detuning)?,
            ModelConfig::MappedSelfFluct {
                gammas,
                gamma_cross,
                omega_rabi,
                detuning,
            } => {
                let base = scenarios::light_assisted(gammas, gamma_cross.clone(), *omega_rabi, *detuning)?;
                scenarios::mapped_self_fluct(&base)?
            }
            ModelConfig::ScaledTriplet {
                gammas,
                gamma_cross,
                omega_rabi,
                detuning: base_detuning,
                delta0,
                omega_bar,
                gamma12_bar,
            } => {
                let base = scenarios::light_assisted(gammas, gamma_cross.clone(), *omega_rabi, 0.0)?;
                let d = detuning.unwrap_or(*base_detuning);
                return scenarios::scaled_triplet(&base, d, *delta0, *omega_bar, *gamma12_bar);
            }
            ModelConfig::Fixture { name } => fixture(name).ok_or_else(|| {
                smsrate::Error::InvalidArgument(format!("unknown fixture {name:?}"))
            })?,
            ModelConfig::Inline { spec } => {
                spec.ensure_valid()?;
                spec.clone()
            }
        };
        Ok(match detuning {
            Some(d) => spec.with_detuning(d),
            None => spec,
        })
    }
}

fn fixture(name: &str) -> Option<ModelSpec> {
    fixtures::all().into_iter().find(|(n, _)| n == name).map(|(_, s)| s)
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: Task,
    pub threads: usize,
    pub output: String,
    /// Photon-number cutoff, counting task only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub model: ModelConfig,
    #[serde(default)]
    pub grids: Grids,
}

impl RunConfig {
    /// Points of the task's grid, empty for the steady task.
    pub fn grid(&self) -> Vec<f64> {
        self.task
            .axis()
            .and_then(|a| self.grids.get(a))
            .map(GridSpec::points)
            .unwrap_or_default()
    }
}

/// The document as written, before defaults are applied.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    task: Option<Task>,
    threads: Option<usize>,
    output: Option<String>,
    n_max: Option<usize>,
    model: ModelConfig,
    #[serde(default)]
    grids: Grids,
}

/// Parses and resolves a configuration whose `task` key is set.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_for(text, None)
}

/// Parses a configuration for the task named on the command line; a `task`
/// key in the file must agree with it.
pub fn parse_config_for(text: &str, task: Option<Task>) -> Result<RunConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    resolve(file, task)
}

pub fn emit_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("a resolved configuration always serializes")
}

fn toml_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let (line, column) = match e.span() {
        Some(span) => {
            let start = unknown_key_offset(text, span.clone(), e.message()).unwrap_or(span.start);
            let before = &text[..start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            (Some(line), Some(column))
        }
        None => (None, None),
    };
    ConfigError {
        path: None,
        line,
        column,
        message: e.message().trim().to_string(),
    }
}

/// Unknown keys inside tagged tables are reported at the table; this finds
/// the offending key itself within the reported span.
fn unknown_key_offset(text: &str, span: std::ops::Range<usize>, message: &str) -> Option<usize> {
    let key = message.strip_prefix("unknown field `")?.split('`').next()?;
    // The span may cover only the table header; search to the next header.
    let end = text[span.end.min(text.len())..]
        .find("\n[")
        .map_or(text.len(), |k| span.end + k);
    let region = text.get(span.start..end)?;
    let mut offset = span.start;
    for line in region.split_inclusive('\n') {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(offset + line.len() - trimmed.len());
            }
        }
        offset += line.len();
    }
    None
}

fn resolve(file: ConfigFile, cli_task: Option<Task>) -> Result<RunConfig, ConfigError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::at(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", file.schema_version),
        ));
    }
    let task = match (cli_task, file.task) {
        (Some(a), Some(b)) if a != b => {
            return Err(ConfigError::at(
                "task",
                format!("the file asks for {b} but the command is {a}"),
            ))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
            return Err(ConfigError::at("task", format!("missing; expected one of {}", names.join(", "))));
        }
    };
    let threads = match file.threads {
        Some(0) => return Err(ConfigError::at("threads", "must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let output = match file.output {
        Some(o) if o.trim().is_empty() => return Err(ConfigError::at("output", "must not be empty")),
        Some(o) => o,
        None => task.name().to_string(),
    };
    let n_max = match (task, file.n_max) {
        (Task::Counting, n) => Some(n.unwrap_or(DEFAULT_N_MAX)),
        (_, None) => None,
        (_, Some(_)) => return Err(ConfigError::at("n_max", "only used by the counting task")),
    };

    let mut grids = file.grids;
    for axis in [Axis::Omega, Axis::Tau, Axis::T, Axis::Detuning] {
        let used = task.axis() == Some(axis);
        let slot = grids.slot(axis);
        match (used, slot.as_ref()) {
            (false, Some(_)) => {
                return Err(ConfigError::at(
                    format!("grids.{}", axis.key()),
                    format!("not used by the {task} task"),
                ))
            }
            (true, None) => *slot = task.default_grid(),
            _ => {}
        }
        if let Some(g) = slot.as_ref() {
            let path = format!("grids.{}", axis.key());
            g.check(&path)?;
            let nonnegative = matches!(axis, Axis::T | Axis::Tau);
            if nonnegative && g.start < 0.0 {
                return Err(ConfigError::at(
                    format!("{path}.start"),
                    format!("must be nonnegative for the {task} task"),
                ));
            }
        }
    }

    check_model(&file.model)?;
    Ok(RunConfig {
        schema_version: file.schema_version,
        task,
        threads,
        output,
        n_max,
        model: file.model,
        grids,
    })
}

fn check_model(model: &ModelConfig) -> Result<(), ConfigError> {
    if let ModelConfig::Fixture { name } = model {
        if fixture(name).is_none() {
            let names: Vec<String> = fixtures::all().into_iter().map(|(n, _)| n).collect();
            return Err(ConfigError::at(
                "model.name",
                format!("unknown fixture {name:?}; expected one of {}", names.join(", ")),
            ));
        }
    }
    let prefix = match model {
        ModelConfig::Inline { .. } => "model.spec.",
        _ => "model.",
    };
    match model.build(None) {
        Ok(_) => Ok(()),
        Err(smsrate::Error::InvalidModel(violations)) => {
            let first = &violations[0];
            let all: Vec<String> = violations.iter().map(|v| format!("{prefix}{v}")).collect();
            Err(ConfigError::at(format!("{prefix}{}", first.path), all.join("; ")))
        }
        Err(e) => Err(ConfigError::at("model", e.to_string())),
    }
}
