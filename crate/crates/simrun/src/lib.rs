//! Batch runner for `eraser-sim`: JSON manifests in, JSON/CSV/ASCII reports out.

pub mod ascii;
pub mod error;
pub mod execute;
pub mod manifest;
pub mod suite;

pub use error::{ManifestError, RunnerError};
pub use execute::{execute_manifest, ExecutionReport, RunRecord, SUMMARY_FILE};
pub use manifest::{parse_manifest, serialize_manifest, ReportFormat, RunEntry, RunManifest};
pub use suite::{acceptance_manifest, DEFAULT_SEED};

/// Reads and parses a manifest file.
pub fn load_manifest(path: &std::path::Path) -> Result<RunManifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&text)
}
