//! Declarative experiment runner: shipped scenarios, config files, CSV and
//! JSON outputs.
//!
//! Every run writes into one directory: CSV tables whose first line is
//! `# varilab <kind> csv-schema 1`, and `summary.json` (see [`RunSummary`]).
//! Each criterion in the summary names the CSV its value is recomputed from.

pub mod catalog;
pub mod config;
mod experiments;
pub mod output;

use std::path::Path;
use std::time::Instant;

pub use catalog::{ScenarioInfo, all as list_scenarios};
pub use config::{load_config, parse_config, ConfigError, Diagnostic, GridSpec, ScenarioConfig, Spacing};
pub use output::{Bound, Cell, CriterionResult, Recorder, RunSummary, CSV_SCHEMA, SUMMARY_FILE, SUMMARY_SCHEMA};

use crate::error::Error;

/// Process exit codes of the runner.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CRITERIA_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// The run stopped early; `summary` holds what was written, if anything.
    #[error("{error}")]
    Numerical { error: Error, summary: Option<Box<RunSummary>> },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => exit::USAGE,
            RunError::Numerical { .. } => exit::NUMERICAL,
        }
    }
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            exit::PASS
        } else {
            exit::CRITERIA_FAILED
        }
    }
}

/// Checks a config file and returns its diagnostics (empty when clean).
pub fn validate_config(path: &Path) -> Vec<String> {
    match load_config(path) {
        Ok(_) => vec![],
        Err(e) => e.to_string().lines().map(str::to_string).collect(),
    }
}

/// Default config of a scenario as TOML text.
pub fn emit_default(name: &str) -> Option<String> {
    catalog::default_config(name).map(|c| c.to_toml())
}

/// Runs `cfg` and writes its outputs into `out_dir`. Results depend only on
/// the config (seed included); only the wall time in the summary varies.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunSummary, RunError> {
    let problems = cfg.check();
    if !problems.is_empty() {
        return Err(ConfigError { source_name: cfg.scenario.clone(), diagnostics: problems }.into());
    }
    let info = catalog::find(&cfg.scenario).expect("checked above");
    let numerical = |error: Error, summary: Option<RunSummary>| RunError::Numerical { error, summary: summary.map(Box::new) };
    let mut rec = Recorder::new(out_dir).map_err(|e| numerical(e, None))?;
    let start = Instant::now();
    log::info!("running {} into {}", cfg.scenario, out_dir.display());
    let outcome = (info.run)(cfg, &mut rec);
    let wall = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => rec.finish(&cfg.scenario, cfg.seed, wall, None).map_err(|e| numerical(e, None)),
        Err(error) => {
            let partial = rec.finish(&cfg.scenario, cfg.seed, wall, Some(error.to_string())).ok();
            Err(numerical(error, partial))
        }
    }
}
