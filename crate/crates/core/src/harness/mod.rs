//! Declarative experiments: JSON configs in, JSON reports and CSV tables out.
//!
//! A run parses an [`ExperimentConfig`], applies command-line overrides,
//! executes one [`Command`] inside a fixed-size thread pool and returns a
//! [`RunManifest`]. Reports are deterministic apart from the `timestamps`
//! object.

pub mod config;
mod error;
pub mod run;

use std::fs;
use std::path::Path;

pub use config::{parse_config, ClassExpr, Experiment, ExperimentConfig};
pub use error::HarnessError;
pub use run::{run_experiment, Command, RunManifest, RunOptions, RunOutcome};

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path.display().to_string(), e))?;
    parse_config(&text)
}

/// Writes the report and CSV to the given paths, falling back to the
/// config's `output` section. Returns the report line when it has no
/// destination file.
pub fn write_outputs(
    outcome: &RunOutcome,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<Option<String>, HarnessError> {
    let configured = outcome.manifest.config.output.clone().unwrap_or_default();
    let report = outcome.manifest.to_json();
    let report_path = out
        .map(Path::to_path_buf)
        .or_else(|| configured.report.map(Into::into));
    let csv_path = csv
        .map(Path::to_path_buf)
        .or_else(|| configured.csv.map(Into::into));
    if let (Some(path), Some(table)) = (&csv_path, &outcome.csv) {
        fs::write(path, table).map_err(|e| HarnessError::io(path.display().to_string(), e))?;
    }
    match report_path {
        Some(path) => {
            fs::write(&path, format!("{report}\n"))
                .map_err(|e| HarnessError::io(path.display().to_string(), e))?;
            Ok(None)
        }
        None => Ok(Some(report)),
    }
}
