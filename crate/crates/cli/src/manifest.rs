use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckRecord {
    /// Passes when `value < threshold` (NaN fails).
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value < threshold,
            value,
            threshold,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    /// Relative to the manifest's directory.
    pub path: String,
    pub description: String,
    pub rows: usize,
}

/// Everything needed to reproduce a run: re-running with `config` (also
/// written next to the manifest as `config.toml`) regenerates the outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub subcommand: String,
    pub tool_version: String,
    pub parallel: bool,
    pub threads: usize,
    pub config: ScenarioConfig,
    pub seeds: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<String>,
    pub checks: Vec<CheckRecord>,
    pub timings: BTreeMap<String, f64>,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &ScenarioConfig, threads: usize) -> Self {
        Self {
            scenario: config
                .name
                .clone()
                .unwrap_or_else(|| subcommand.to_string()),
            subcommand: subcommand.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            parallel: liouville::is_parallel(),
            threads,
            config: config.clone(),
            seeds: BTreeMap::new(),
            boundary: None,
            checks: Vec::new(),
            timings: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Runs `f`, recording its wall time under `label`.
    pub fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(label.into(), start.elapsed().as_secs_f64());
        out
    }

    pub fn output(&mut self, path: &str, description: &str, rows: usize) {
        self.outputs.push(OutputRecord {
            path: path.into(),
            description: description.into(),
            rows,
        });
    }

    /// Writes `config.toml` and `manifest.json` into `dir`.
    pub fn write(&mut self, dir: &Path) -> Result<(), CliError> {
        let cfg_path = dir.join("config.toml");
        std::fs::write(&cfg_path, self.config.to_string())
            .map_err(|e| CliError::io(&cfg_path, e))?;
        self.output("config.toml", "resolved configuration", 0);
        let path = dir.join("manifest.json");
        let text =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}
