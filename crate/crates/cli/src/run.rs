//! Executes one task and collects its results as a table.
//!
//! Grid points are independent and are evaluated on a dedicated thread pool;
//! every value lands at its own index, so the table does not depend on the
//! number of workers.

use rayon::prelude::*;
use smsrate::counting::{stationary_mandel, Counting};
use smsrate::scenarios;
use smsrate::{config_populations, Stationary};

use crate::config::{ModelConfig, RunConfig, Task};
use crate::error::CliError;

/// Truncated probability above which the counting task adds a warning.
const REMAINDER_WARN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Value {
    /// 17 significant digits for reals, so every value reads back exactly.
    pub fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            // Negative zero would print as "-0".
            Value::Real(x) => format!("{:.16e}", if *x == 0.0 { 0.0 } else { *x }),
            Value::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(x) => Some(*x),
            Value::Text(_) => None,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => (*i).into(),
            Value::Real(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
            Value::Text(s) => s.clone().into(),
        }
    }
}

/// Result of one task: named columns with units, rows in grid order, and
/// scalar metadata that does not belong in any row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub task: Task,
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Value>>,
    pub metadata: Vec<(String, Value)>,
    pub warnings: Vec<String>,
}

impl Table {
    fn new(task: Task, columns: &[(&str, &str)]) -> Self {
        Self {
            task,
            columns: columns.iter().map(|(n, u)| (n.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|(n, _)| n == name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn meta(&self, key: &str) -> Option<&Value> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn push_meta(&mut self, key: &str, v: f64) {
        self.metadata.push((key.to_string(), Value::Real(v)));
    }

    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.metadata
                .iter()
                .map(|(k, v)| (k.clone(), v.to_json()))
                .collect(),
        )
    }
}

/// Runs the task on `config.threads` workers.
pub fn execute(config: &RunConfig) -> Result<Table, CliError> {
    execute_with_threads(config, config.threads)
}

pub fn execute_with_threads(config: &RunConfig, threads: usize) -> Result<Table, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| smsrate::Error::InvalidArgument(format!("cannot start {threads} workers: {e}")))?;
    pool.install(|| run_task(config))
}

fn run_task(config: &RunConfig) -> Result<Table, CliError> {
    let grid = config.grid();
    let table = match config.task {
        Task::Steady => steady(config)?,
        Task::Spectrum => spectrum(config, &grid)?,
        Task::C1 => c1(config, &grid)?,
        Task::G2 => g2(config, &grid)?,
        Task::C2 => c2(config, &grid)?,
        Task::Counting => counting(config, &grid)?,
        Task::MandelSweep => mandel_sweep(config, &grid)?,
        Task::LineshapeSweep => lineshape_sweep(config, &grid)?,
    };
    Ok(table)
}

fn real_rows(xs: &[f64], cols: &[Vec<f64>]) -> Vec<Vec<Value>> {
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            std::iter::once(Value::Real(x))
                .chain(cols.iter().map(|c| Value::Real(c[i])))
                .collect()
        })
        .collect()
}

fn stationary(config: &RunConfig) -> Result<Stationary, CliError> {
    Ok(Stationary::new(&config.model.build(None)?)?)
}

fn steady(config: &RunConfig) -> Result<Table, CliError> {
    let st = stationary(config)?;
    let mut t = Table::new(
        Task::Steady,
        &[
            ("state", "1"),
            ("population", "1"),
            ("excited_population", "1"),
            ("coherence_re", "1"),
            ("coherence_im", "1"),
        ],
    );
    let pops = config_populations(&st.steady);
    let excited = st.steady.excited_populations();
    for (r, block) in st.steady.blocks.iter().enumerate() {
        let c = block[(0, 1)];
        t.rows.push(vec![
            Value::Int(r as i64),
            Value::Real(pops[r]),
            Value::Real(excited[r]),
            Value::Real(c.re),
            Value::Real(c.im),
        ]);
    }
    t.push_meta("intensity", st.intensity());
    t.push_meta("coherent_weight", st.coherent_weight());
    Ok(t)
}

fn spectrum(config: &RunConfig, omega: &[f64]) -> Result<Table, CliError> {
    let st = stationary(config)?;
    let s = st.incoherent_spectrum(omega)?.real();
    let report = st.sum_rule_from(omega, &s)?;
    let mut t = Table::new(Task::Spectrum, &[("omega_minus_omegaL", "1/time"), ("s_inc", "1")]);
    t.rows = real_rows(omega, &[s]);
    t.push_meta("coherent_weight", report.coherent_weight);
    t.push_meta("intensity", report.intensity);
    t.push_meta("incoherent_area", report.incoherent_area);
    t.push_meta("sum_rule_residual", report.residual);
    t.push_meta("tail_estimate", report.tail_estimate);
    if report.tail_warning {
        t.warnings.push(format!(
            "the omega grid truncates an estimated {:.3e} of the intensity",
            report.tail_estimate
        ));
    }
    Ok(t)
}

fn c1(config: &RunConfig, tau: &[f64]) -> Result<Table, CliError> {
    let st = stationary(config)?;
    let v = st.c1(tau)?.complex();
    let mut t = Table::new(Task::C1, &[("tau", "time"), ("c1_re", "1/time"), ("c1_im", "1/time")]);
    t.rows = real_rows(
        tau,
        &[v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect()],
    );
    t.push_meta("intensity", st.intensity());
    t.push_meta("coherent_weight", st.coherent_weight());
    Ok(t)
}

fn g2(config: &RunConfig, tau: &[f64]) -> Result<Table, CliError> {
    let st = stationary(config)?;
    let v = st.g2(tau)?.real();
    let mut t = Table::new(Task::G2, &[("tau", "time"), ("g2", "1")]);
    t.rows = real_rows(tau, &[v]);
    t.push_meta("intensity", st.intensity());
    Ok(t)
}

fn c2(config: &RunConfig, tau: &[f64]) -> Result<Table, CliError> {
    let st = stationary(config)?;
    let v = st.c2(tau)?.real();
    let mut t = Table::new(Task::C2, &[("tau", "time"), ("c2", "1/time^2")]);
    t.rows = real_rows(tau, &[v]);
    t.push_meta("intensity", st.intensity());
    Ok(t)
}

fn counting(config: &RunConfig, times: &[f64]) -> Result<Table, CliError> {
    let n_max = config.n_max.unwrap_or(crate::config::DEFAULT_N_MAX);
    let ctx = Counting::new(&config.model.build(None)?)?;
    let records = times
        .par_iter()
        .map(|&t| {
            let pn = ctx.pn(t, n_max, None)?;
            let (mean, second) = ctx.factorial_moments(t, None)?;
            let q = ctx.mandel_q(t, None)?;
            Ok((pn, mean, second, q))
        })
        .collect::<smsrate::Result<Vec<_>>>()?;

    let mut columns: Vec<(String, String)> = [
        ("t", "time"),
        ("mean", "1"),
        ("second_factorial", "1"),
        ("mandel_q", "1"),
        ("remainder", "1"),
    ]
    .iter()
    .map(|(n, u)| (n.to_string(), u.to_string()))
    .collect();
    columns.extend((0..=n_max).map(|n| (format!("p_{n}"), "1".to_string())));
    let mut t = Table::new(Task::Counting, &[]);
    t.columns = columns;
    let mut worst: f64 = 0.0;
    for (&time, (pn, mean, second, q)) in times.iter().zip(records) {
        let remainder = 1.0 - pn.iter().sum::<f64>();
        worst = worst.max(remainder);
        let mut row = vec![
            Value::Real(time),
            Value::Real(mean),
            Value::Real(second),
            Value::Real(q),
            Value::Real(remainder),
        ];
        row.extend(pn.into_iter().map(Value::Real));
        t.rows.push(row);
    }
    t.metadata.push(("n_max".into(), Value::Int(n_max as i64)));
    t.push_meta("intensity", smsrate::correl::stationary_intensity(&config.model.build(None)?)?);
    if worst > REMAINDER_WARN {
        t.warnings.push(format!(
            "photon-number truncation at n_max = {n_max} leaves up to {worst:.3e} of the probability"
        ));
    }
    Ok(t)
}

/// The model at laser detuning `d`; constructors with detuning-dependent
/// parameters are rebuilt at every point.
fn model_at(model: &ModelConfig, d: f64) -> smsrate::Result<smsrate::ModelSpec> {
    model.build(Some(d))
}

fn mandel_sweep(config: &RunConfig, detunings: &[f64]) -> Result<Table, CliError> {
    let q = detunings
        .par_iter()
        .map(|&d| stationary_mandel(&model_at(&config.model, d)?))
        .collect::<smsrate::Result<Vec<f64>>>()?;
    let mut t = Table::new(Task::MandelSweep, &[("detuning", "1/time"), ("q_st", "1")]);
    t.rows = real_rows(detunings, &[q]);
    if let Ok(limit) = detuning_limit(&config.model) {
        t.push_meta("large_detuning_limit", limit);
    }
    Ok(t)
}

/// Large-detuning Mandel limit, for models where it is defined.
fn detuning_limit(model: &ModelConfig) -> smsrate::Result<f64> {
    match model {
        ModelConfig::LightAssisted { .. } | ModelConfig::Fixture { .. } | ModelConfig::Inline { .. } => {
            scenarios::mandel_detuning_limit(&model.build(None)?)
        }
        _ => Err(smsrate::Error::InvalidArgument("no closed-form limit".into())),
    }
}

fn lineshape_sweep(config: &RunConfig, detunings: &[f64]) -> Result<Table, CliError> {
    let v = detunings
        .par_iter()
        .map(|&d| smsrate::counting::line_shape(&model_at(&config.model, d)?))
        .collect::<smsrate::Result<Vec<f64>>>()?;
    let mut t = Table::new(Task::LineshapeSweep, &[("detuning", "1/time"), ("line_shape", "1/time")]);
    t.rows = real_rows(detunings, &[v]);
    Ok(t)
}
