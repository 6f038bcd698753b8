//! Report assembly and deterministic JSON output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::scenario::{BudgetSpec, Scenario};
use crate::{CliError, Result};

/// Version of the report layout described by `schema/report-v1.schema.json`.
pub const REPORT_FORMAT: u32 = 1;
/// Floats are written with this many significant digits.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub name: String,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub discrepancy: bool,
    #[serde(default)]
    pub verdicts: BTreeMap<String, String>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    /// File names of CSV traces written next to the report.
    #[serde(default)]
    pub artifacts: Vec<String>,
    #[serde(default)]
    pub result: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: u32,
    pub scenario: String,
    pub description: String,
    pub toolkit_version: String,
    pub seed: u64,
    pub budget: BudgetSpec,
    pub discrepancies: usize,
    pub analyses: Vec<AnalysisRecord>,
}

/// A report together with its traces and per-analysis wall-clock times.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    /// `(file name, contents)`.
    pub artifacts: Vec<(String, String)>,
    /// Milliseconds per analysis, in report order, then the total.
    pub timings: Vec<(String, f64)>,
}

impl Report {
    /// Runs every analysis of `sc`; failures are recorded and never abort the batch.
    pub fn run(sc: &Scenario) -> RunOutput {
        let start = Instant::now();
        let mut analyses = Vec::new();
        let mut artifacts = Vec::new();
        let mut timings = Vec::new();
        for (i, a) in sc.analyses.iter().enumerate() {
            let t = Instant::now();
            let record = match a.run(sc) {
                Ok(out) => {
                    let mut names = Vec::new();
                    for (suffix, text) in out.artifacts {
                        let file = format!("{}.{i}.{}.{suffix}", sc.id, a.name());
                        names.push(file.clone());
                        artifacts.push((file, text));
                    }
                    AnalysisRecord {
                        name: a.name().into(),
                        status: RecordStatus::Ok,
                        error: None,
                        discrepancy: out.discrepancy,
                        verdicts: out.verdicts,
                        constants: out.constants,
                        artifacts: names,
                        result: out.result,
                    }
                }
                Err(e) => AnalysisRecord {
                    name: a.name().into(),
                    status: RecordStatus::Error,
                    error: Some(e),
                    discrepancy: false,
                    verdicts: BTreeMap::new(),
                    constants: BTreeMap::new(),
                    artifacts: Vec::new(),
                    result: Value::Null,
                },
            };
            timings.push((a.name().to_string(), t.elapsed().as_secs_f64() * 1e3));
            analyses.push(record);
        }
        timings.push(("total".into(), start.elapsed().as_secs_f64() * 1e3));
        let report = Report {
            format: REPORT_FORMAT,
            scenario: sc.id.clone(),
            description: sc.description.clone(),
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            seed: sc.seed,
            budget: sc.budget,
            discrepancies: analyses.iter().filter(|r| r.discrepancy).count(),
            analyses,
        };
        RunOutput { report, artifacts, timings }
    }

    /// Pretty JSON with floats rounded to [`SIGNIFICANT_DIGITS`].
    pub fn to_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self).map_err(|e| CliError::Serialize(e.to_string()))?;
        round_value(&mut v);
        let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Serialize(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn errors(&self) -> usize {
        self.analyses.iter().filter(|r| r.status == RecordStatus::Error).count()
    }

    /// First verdict recorded for `key` across analyses.
    pub fn verdict(&self, key: &str) -> Option<&str> {
        self.analyses.iter().find_map(|r| r.verdicts.get(key).map(String::as_str))
    }

    /// First value recorded for constant `key`, preferring analyses that also reported `notion`.
    pub fn constant(&self, notion: &str, key: &str) -> Option<f64> {
        self.analyses
            .iter()
            .filter(|r| r.verdicts.contains_key(notion))
            .find_map(|r| r.constants.get(key).copied())
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant decimal digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_significant).and_then(Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Writes via a temporary file and a rename so readers never see partial output.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp: PathBuf = {
        let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".tmp");
        path.with_file_name(name)
    };
    std::fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

impl RunOutput {
    /// Writes `<id>.json`, the traces and optionally `<id>.timings.json` into `dir`.
    pub fn write(&self, dir: &Path, timings: bool) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(format!("{}.json", self.report.scenario));
        write_atomic(&path, &self.report.to_json()?)?;
        for (name, text) in &self.artifacts {
            write_atomic(&dir.join(name), text)?;
        }
        if timings {
            let ms: BTreeMap<String, f64> = self
                .timings
                .iter()
                .enumerate()
                .map(|(i, (name, t))| (if name == "total" { name.clone() } else { format!("{i}.{name}") }, *t))
                .collect();
            let text = serde_json::to_string_pretty(&serde_json::json!({ "wall_clock_ms": ms }))
                .map_err(|e| CliError::Serialize(e.to_string()))?;
            write_atomic(&dir.join(format!("{}.timings.json", self.report.scenario)), &(text + "\n"))?;
        }
        Ok(path)
    }
}
