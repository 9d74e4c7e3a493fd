//! Sidecar record of a run: everything needed to repeat it.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use triplet_core::params::{DerivedParams, PhysParams};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verb {
    Sweep,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub name: String,
    pub description: String,
    /// Output files, relative to the manifest.
    pub files: Vec<String>,
    pub params: PhysParams,
    pub derived: DerivedParams,
    /// Oracle settings; the step bound differs between scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub seed: u64,
    pub trajectories: usize,
    pub duration: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub segments: usize,
    pub dump_timeseries: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: Verb,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    /// Base parameters before any scenario is applied.
    pub params: PhysParams,
    pub derived: DerivedParams,
    pub scenarios: Vec<ScenarioRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_optimizer: Option<bool>,
}

impl RunManifest {
    pub fn new(command: Verb, params: PhysParams, derived: DerivedParams) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            params,
            derived,
            scenarios: Vec::new(),
            grid: None,
            check_optimizer: None,
        }
    }

    pub fn load(path: &Path, expected: Verb) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "{}: schema version {} is not supported (expected {SCHEMA_VERSION})",
                path.display(),
                m.schema_version
            )));
        }
        if m.command != expected {
            return Err(CliError::Usage(format!(
                "{}: manifest records a {:?} run",
                path.display(),
                m.command
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
