use std::fs;
use std::path::{Path, PathBuf};

use pbs_core::pipeline::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::workload::WorkloadSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFiles {
    pub q: PathBuf,
    pub k: PathBuf,
    pub v: PathBuf,
}

/// Where a run's Q, K and V come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inputs {
    Files(InputFiles),
    Workload(WorkloadSpec),
}

/// Everything a `run`, `sweep`, `bench` or `viz` invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub inputs: Inputs,
    pub pipeline: PipelineConfig,
    /// Output tensor path for `run`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[serde(default)]
    pub report: Option<PathBuf>,
}

impl RunManifest {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, CliError> {
        let mut m: RunManifest = serde_json::from_str(text).map_err(|source| CliError::Json {
            path: origin.to_path_buf(),
            source,
        })?;
        // relative input paths resolve against the manifest's directory
        if let (Inputs::Files(files), Some(dir)) = (&mut m.inputs, origin.parent()) {
            for p in [&mut files.q, &mut files.k, &mut files.v] {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.to_json() + "\n").map_err(|e| CliError::io(path, e))
    }
}
