//! Running a directory of scenarios.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::report::{write_atomic, Report};
use crate::scenario::{Overrides, Scenario};
use crate::{exit, CliError, Result};

/// One line of the corpus summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusRow {
    pub file: String,
    pub scenario: String,
    /// `ok`, or the configuration error that prevented the run.
    pub status: String,
    pub transversal: String,
    pub tangentially_transversal: String,
    pub subtransversal: String,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub eta: Option<f64>,
    pub failed_analyses: usize,
    pub discrepancies: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusSummary {
    pub rows: Vec<CorpusRow>,
    /// Reports written, sorted by scenario file name.
    pub reports: Vec<PathBuf>,
}

impl CorpusSummary {
    pub fn discrepancies(&self) -> usize {
        self.rows.iter().map(|r| r.discrepancies).sum()
    }

    pub fn config_errors(&self) -> usize {
        self.rows.iter().filter(|r| r.status != "ok").count()
    }

    /// 1 on any discrepancy, otherwise 2 on any configuration error, otherwise 0.
    pub fn exit_code(&self) -> i32 {
        if self.discrepancies() > 0 {
            exit::DISCREPANCY
        } else if self.config_errors() > 0 {
            exit::CONFIG
        } else {
            exit::CLEAN
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| CliError::Serialize(e.to_string()))?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "file",
                "scenario",
                "status",
                "transversal",
                "tangentially_transversal",
                "subtransversal",
                "K",
                "M",
                "eta",
                "failed_analyses",
                "discrepancies",
            ])
            .map_err(|e| CliError::Serialize(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
    }

    /// Fixed-width table for the terminal.
    pub fn to_table(&self) -> String {
        let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        let mut out = format!(
            "{:<28} {:<12} {:<12} {:<12} {:>9} {:>8} {:>8} {:>6} {:>6}\n",
            "scenario", "transversal", "tangential", "subtransv", "K", "M", "eta", "errors", "DISC"
        );
        for r in &self.rows {
            if r.status != "ok" {
                out.push_str(&format!("{:<28} {}\n", r.file, r.status));
                continue;
            }
            out.push_str(&format!(
                "{:<28} {:<12} {:<12} {:<12} {:>9} {:>8} {:>8} {:>6} {:>6}\n",
                r.scenario,
                r.transversal,
                r.tangentially_transversal,
                r.subtransversal,
                fmt(r.k),
                fmt(r.m),
                fmt(r.eta),
                r.failed_analyses,
                r.discrepancies
            ));
        }
        out
    }
}

fn row(file: &str, report: &Report) -> CorpusRow {
    let v = |k: &str| report.verdict(k).unwrap_or("-").to_string();
    CorpusRow {
        file: file.into(),
        scenario: report.scenario.clone(),
        status: "ok".into(),
        transversal: v("transversal"),
        tangentially_transversal: v("tangentially_transversal"),
        subtransversal: v("subtransversal"),
        k: report.constant("subtransversal", "K"),
        m: report.constant("tangentially_transversal", "M"),
        eta: report.constant("tangentially_transversal", "eta"),
        failed_analyses: report.errors(),
        discrepancies: report.discrepancies,
    }
}

fn failed_row(file: &str, e: &CliError) -> CorpusRow {
    CorpusRow {
        file: file.into(),
        scenario: String::new(),
        status: e.to_string(),
        transversal: "-".into(),
        tangentially_transversal: "-".into(),
        subtransversal: "-".into(),
        k: None,
        m: None,
        eta: None,
        failed_analyses: 0,
        discrepancies: 0,
    }
}

/// Scenario files (`*.toml`) of `dir`, sorted by name.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every scenario in `dir` on up to `workers` threads and writes the
/// reports plus `corpus_summary.csv` into `out`.
pub fn run_corpus(dir: &Path, out: &Path, overrides: Overrides, workers: usize, timings: bool) -> Result<CorpusSummary> {
    let files = scenario_files(dir)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let slots: Vec<Mutex<Option<(CorpusRow, Option<PathBuf>)>>> = files.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let write_error: Mutex<Option<CliError>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..workers.max(1).min(files.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = files.get(i) else { break };
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let loaded = Scenario::load(path).and_then(|mut sc| sc.apply(overrides).map(|_| sc));
                let result = match loaded {
                    Ok(sc) => {
                        let output = Report::run(&sc);
                        match output.write(out, timings) {
                            Ok(p) => (row(&name, &output.report), Some(p)),
                            Err(e) => {
                                let r = failed_row(&name, &e);
                                write_error.lock().expect("poisoned").get_or_insert(e);
                                (r, None)
                            }
                        }
                    }
                    Err(e) => (failed_row(&name, &e), None),
                };
                *slots[i].lock().expect("poisoned") = Some(result);
            });
        }
    });
    if let Some(e) = write_error.into_inner().expect("poisoned") {
        return Err(e);
    }
    let mut summary = CorpusSummary::default();
    for slot in slots {
        let (row, path) = slot.into_inner().expect("poisoned").expect("every scenario is processed");
        summary.rows.push(row);
        summary.reports.extend(path);
    }
    write_atomic(&out.join("corpus_summary.csv"), &summary.to_csv()?)?;
    Ok(summary)
}
