//! CSV and metadata files.
//!
//! The CSV holds only what the configuration determines, so reruns produce
//! the same bytes. Wall time and worker count go to the JSON sidecar.

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{emit_config, RunConfig};
use crate::error::CliError;
use crate::run::Table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outputs {
    pub csv: PathBuf,
    pub meta: PathBuf,
}

impl Outputs {
    pub fn for_prefix(prefix: &str) -> Self {
        Self {
            csv: PathBuf::from(format!("{prefix}.csv")),
            meta: PathBuf::from(format!("{prefix}.meta.json")),
        }
    }
}

/// CSV text: `#` metadata lines, a header row, then one row per grid point.
pub fn render_csv(config: &RunConfig, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# smsrate {VERSION}\n"));
    out.push_str(&format!("# task: {}\n", table.task));
    out.push_str(&format!("# model: {}\n", config.model.scenario()));
    let units: Vec<String> = table.columns.iter().map(|(n, u)| format!("{n}={u}")).collect();
    out.push_str(&format!("# units: {}\n", units.join(", ")));
    for (k, v) in &table.metadata {
        out.push_str(&format!("# {k}: {}\n", v.render()));
    }

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(table.columns.iter().map(|(n, _)| n.as_str()))
        .expect("writing to memory");
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.render())).expect("writing to memory");
    }
    let body = w.into_inner().expect("writing to memory");
    out.push_str(&String::from_utf8(body).expect("CSV fields are ASCII"));
    out
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            action: "create directory",
            path: dir.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io {
        action: "write",
        path: path.display().to_string(),
        source,
    })
}

/// Writes `{prefix}.csv` and `{prefix}.meta.json`.
pub fn write_outputs(
    config: &RunConfig,
    table: &Table,
    prefix: &str,
    wall_time: f64,
    threads: usize,
) -> Result<Outputs, CliError> {
    let outputs = Outputs::for_prefix(prefix);
    write(&outputs.csv, &render_csv(config, table))?;
    let meta = json!({
        "version": VERSION,
        "task": table.task.name(),
        "config": config,
        "config_toml": emit_config(config),
        "columns": table.columns.iter().map(|(n, u)| json!({"name": n, "unit": u})).collect::<Vec<_>>(),
        "results": table.metadata_json(),
        "warnings": table.warnings,
        "wall_time_seconds": wall_time,
        "threads": threads,
        "csv": outputs.csv.display().to_string(),
    });
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    write(&outputs.meta, &text)?;
    Ok(outputs)
}
