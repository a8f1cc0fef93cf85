//! Manifest execution and report emission.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use eraser_sim::protocols::{self, write_event_csv, ProtocolKind};
use eraser_sim::{FeasibilityReport, RunOutcome, RunResult, Verdict};
use rayon::prelude::*;
use serde::Serialize;

use crate::ascii::render_run;
use crate::error::RunnerError;
use crate::manifest::{ReportFormat, RunEntry, RunManifest};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub name: String,
    pub result: Option<RunResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExecutionReport {
    pub records: Vec<RunRecord>,
    pub output_dir: PathBuf,
}

impl ExecutionReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    /// 0 if every run succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failures() > 0)
    }

    pub fn result(&self, name: &str) -> Option<&RunResult> {
        self.records
            .iter()
            .find(|r| r.name == name)?
            .result
            .as_ref()
    }
}

#[derive(Serialize)]
struct SubsetLine {
    count: u64,
    verdict: Option<Verdict>,
    log_likelihood_ratio: Option<f64>,
    visibility: Option<f64>,
}

#[derive(Serialize)]
struct RunLine<'a> {
    name: &'a str,
    status: &'static str,
    error: Option<&'a str>,
    protocol: Option<ProtocolKind>,
    outcome: Option<RunOutcome>,
    pairs_generated: Option<u64>,
    event_digest: Option<&'a str>,
    subsets: BTreeMap<&'a str, SubsetLine>,
    feasibility: Option<&'a FeasibilityReport>,
    predictor_max_abs_error: Option<f64>,
    flags: &'a [String],
    warnings: &'a [String],
}

#[derive(Serialize)]
struct Summary<'a> {
    runs: Vec<RunLine<'a>>,
    failed: usize,
}

fn summary_json(records: &[RunRecord]) -> String {
    let runs = records
        .iter()
        .map(|rec| {
            let r = rec.result.as_ref();
            RunLine {
                name: &rec.name,
                status: if rec.error.is_some() { "failed" } else { "ok" },
                error: rec.error.as_deref(),
                protocol: r.map(|r| r.protocol),
                outcome: r.map(|r| r.outcome),
                pairs_generated: r.map(|r| r.pairs_generated),
                event_digest: r.map(|r| r.event_digest.as_str()),
                subsets: r
                    .map(|r| {
                        r.subsets
                            .iter()
                            .map(|(k, s)| {
                                let line = SubsetLine {
                                    count: s.count,
                                    verdict: s.classification.map(|c| c.verdict),
                                    log_likelihood_ratio: s
                                        .classification
                                        .map(|c| c.log_likelihood_ratio),
                                    visibility: s.visibility,
                                };
                                (k.as_str(), line)
                            })
                            .collect()
                    })
                    .unwrap_or_default(),
                feasibility: r.and_then(|r| r.feasibility.as_ref()),
                predictor_max_abs_error: r
                    .and_then(|r| r.predictor.as_ref())
                    .map(|p| p.max_abs_error),
                flags: r.map_or(&[][..], |r| &r.flags),
                warnings: r.map_or(&[][..], |r| &r.warnings),
            }
        })
        .collect();
    let summary = Summary {
        runs,
        failed: records.iter().filter(|r| r.error.is_some()).count(),
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunnerError> {
    fs::write(path, bytes).map_err(RunnerError::io(path))
}

fn run_one(m: &RunManifest, entry: &RunEntry) -> Result<RunResult, RunnerError> {
    let cfg = m.effective_config(entry);
    let out = protocols::run(&cfg)?;
    let dir = &m.output_dir;
    if m.wants(ReportFormat::Json) {
        let mut json = serde_json::to_string_pretty(&out.result).expect("result serializes");
        json.push('\n');
        write_file(&dir.join(format!("{}.json", entry.name)), json.as_bytes())?;
    }
    if m.wants(ReportFormat::Csv) {
        let path = dir.join(format!("{}.csv", entry.name));
        let file = File::create(&path).map_err(RunnerError::io(&path))?;
        let mut w = BufWriter::new(file);
        write_event_csv(&out.events, &mut w).map_err(RunnerError::io(&path))?;
        w.flush().map_err(RunnerError::io(&path))?;
    }
    if m.wants(ReportFormat::Ascii) {
        if let Some(text) = render_run(&entry.name, &out.result) {
            write_file(&dir.join(format!("{}.txt", entry.name)), text.as_bytes())?;
        }
    }
    Ok(out.result)
}

/// Runs every entry, writes per-run artifacts and `summary.json`. A failing
/// run is recorded in the summary and does not stop the others.
pub fn execute_manifest(m: &RunManifest) -> Result<ExecutionReport, RunnerError> {
    fs::create_dir_all(&m.output_dir).map_err(RunnerError::io(&m.output_dir))?;
    let records: Vec<RunRecord> = m
        .runs
        .par_iter()
        .map(|entry| match run_one(m, entry) {
            Ok(result) => RunRecord {
                name: entry.name.clone(),
                result: Some(result),
                error: None,
            },
            Err(e) => RunRecord {
                name: entry.name.clone(),
                result: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    write_file(
        &m.output_dir.join(SUMMARY_FILE),
        summary_json(&records).as_bytes(),
    )?;
    Ok(ExecutionReport {
        records,
        output_dir: m.output_dir.clone(),
    })
}
