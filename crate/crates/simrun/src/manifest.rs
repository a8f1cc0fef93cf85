//! Run manifests: a list of named protocol configs plus output options.

use std::collections::HashSet;
use std::path::PathBuf;

use eraser_sim::ProtocolConfig;
use serde::{Deserialize, Serialize};

use crate::error::ManifestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Ascii,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "ascii" | "ascii-histogram" => Ok(ReportFormat::Ascii),
            other => Err(format!(
                "unknown format {other:?} (expected json, csv or ascii)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    /// Used as the file stem of every artifact of this run.
    pub name: String,
    pub config: ProtocolConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("simrun-out")
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Json, ReportFormat::Csv, ReportFormat::Ascii]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub runs: Vec<RunEntry>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    /// Replaces the seed of every run when set.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(runs: Vec<RunEntry>) -> Self {
        RunManifest {
            runs,
            output_dir: default_output_dir(),
            formats: default_formats(),
            seed: None,
        }
    }

    pub fn wants(&self, f: ReportFormat) -> bool {
        self.formats.contains(&f)
    }

    /// Seed a run actually uses.
    pub fn effective_config(&self, entry: &RunEntry) -> ProtocolConfig {
        let mut cfg = entry.config.clone();
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.runs.is_empty() {
            return Err(ManifestError::Invariant("runs must be nonempty".into()));
        }
        if self.formats.is_empty() {
            return Err(ManifestError::Invariant("formats must be nonempty".into()));
        }
        let mut seen = HashSet::new();
        for (i, run) in self.runs.iter().enumerate() {
            let ok_name = !run.name.is_empty()
                && run
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
                && !run.name.starts_with('.');
            if !ok_name {
                return Err(ManifestError::Invariant(format!(
                    "runs[{i}].name must be a nonempty file-safe name ([A-Za-z0-9_.-]), got {:?}",
                    run.name
                )));
            }
            if !seen.insert(run.name.as_str()) {
                return Err(ManifestError::Invariant(format!(
                    "run names must be unique ({:?} repeats)",
                    run.name
                )));
            }
            self.effective_config(run)
                .validate()
                .map_err(|e| ManifestError::Invariant(format!("runs[{i}] ({}): {e}", run.name)))?;
        }
        Ok(())
    }
}

/// Parses and fully validates a JSON manifest. Unknown keys are rejected and
/// schema errors carry the path of the offending key.
pub fn parse_manifest(text: &str) -> Result<RunManifest, ManifestError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let manifest: RunManifest =
        serde_path_to_error::deserialize(de).map_err(|e| ManifestError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    manifest.validate()?;
    Ok(manifest)
}

/// Pretty JSON with the same field order the types declare.
pub fn serialize_manifest(m: &RunManifest) -> String {
    serde_json::to_string_pretty(m).expect("manifest serializes")
}
