//! Result files.
//!
//! A front is written twice: `<stem>.front.json` (the authoritative copy,
//! read back by `compare`) and `<stem>.front.csv` with header
//! `time_total,cost_total,num_total,allocations`, where `allocations` is the
//! per-sub-task count lists as JSON, e.g. `[[1000,0,0],[0,1000]]`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Algorithm, CliError, RunOutcome, SweepRow};
use crate::domain::{Order, TaskSpec};
use crate::front::FrontMember;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub time_total: f64,
    pub cost_total: f64,
    pub num_total: u32,
    pub allocations: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontFile {
    /// Fingerprint of the task and ordered quantity.
    pub instance: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub solutions: Vec<FrontRow>,
}

impl FrontFile {
    pub fn objective_rows(&self) -> Vec<[f64; 3]> {
        self.solutions
            .iter()
            .map(|r| [r.time_total, r.cost_total, f64::from(r.num_total)])
            .collect()
    }
}

/// Per-run summary (`<stem>.summary.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub instance: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub iterations: usize,
    pub pop_size: usize,
    /// Absent for NSGA-II.
    pub limit: Option<f64>,
    pub eta_c: f64,
    pub eta_m: f64,
    pub pr_c: f64,
    pub pr_m: f64,
    pub front_size: usize,
    pub mean_num_total: f64,
    pub min_time_total: f64,
    pub min_cost_total: f64,
    pub solver_ms: f64,
    pub front_file: String,
}

/// SHA-256 over the canonical JSON of the task and the ordered quantity.
pub fn instance_id(task: &TaskSpec, order: &Order) -> String {
    let canonical = serde_json::to_string(&(task, order.quantity)).expect("task serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn front_file(instance: &str, algorithm: Algorithm, seed: u64, front: &[FrontMember]) -> FrontFile {
    FrontFile {
        instance: instance.to_string(),
        algorithm,
        seed,
        solutions: front
            .iter()
            .map(|m| FrontRow {
                time_total: m.objectives.time_total,
                cost_total: m.objectives.cost_total,
                num_total: m.objectives.num_total,
                allocations: m
                    .solution
                    .allocations
                    .iter()
                    .map(|a| a.counts.clone())
                    .collect(),
            })
            .collect(),
    }
}

pub fn front_csv(file: &FrontFile) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Consistency(format!("csv encoding: {e}"));
    w.write_record(["time_total", "cost_total", "num_total", "allocations"])
        .map_err(csv_err)?;
    for row in &file.solutions {
        w.write_record([
            row.time_total.to_string(),
            row.cost_total.to_string(),
            row.num_total.to_string(),
            serde_json::to_string(&row.allocations).expect("counts serialize"),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Consistency(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the front (JSON + CSV) and summary of one run.
pub fn write_run(dir: &Path, stem: &str, instance: &str, outcome: &RunOutcome) -> Result<Summary, CliError> {
    let file = front_file(instance, outcome.algorithm, outcome.seed, &outcome.front);
    let json_path = dir.join(format!("{stem}.front.json"));
    write_text(
        &json_path,
        &serde_json::to_string_pretty(&file).expect("front serializes"),
    )?;
    write_text(&dir.join(format!("{stem}.front.csv")), &front_csv(&file)?)?;

    let rows = file.objective_rows();
    let n = rows.len().max(1) as f64;
    let p = &outcome.params;
    let summary = Summary {
        instance: instance.to_string(),
        algorithm: outcome.algorithm,
        seed: outcome.seed,
        iterations: p.iterations,
        pop_size: p.pop_size,
        limit: (outcome.algorithm == Algorithm::Pdga).then_some(p.limit),
        eta_c: p.variation.eta_c,
        eta_m: p.variation.eta_m,
        pr_c: p.variation.pr_c,
        pr_m: p.variation.pr_m,
        front_size: rows.len(),
        mean_num_total: rows.iter().map(|r| r[2]).sum::<f64>() / n,
        min_time_total: rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min),
        min_cost_total: rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min),
        solver_ms: outcome.solver_ms,
        front_file: json_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    write_text(
        &dir.join(format!("{stem}.summary.json")),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    Ok(summary)
}

pub fn read_front(path: &Path) -> Result<FrontFile, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::BadFront {
        path: PathBuf::from(path),
        message: e.to_string(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn write_sweep(dir: &Path, rows: &[SweepRow], runs: &[(usize, Summary)]) -> Result<(), CliError> {
    let csv_err = |e: csv::Error| CliError::Consistency(format!("csv encoding: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "execution",
        "algorithm",
        "iterations",
        "limit",
        "runs",
        "mean_front_size",
        "mean_num_total",
        "mean_min_time_total",
        "mean_min_cost_total",
        "mean_solver_ms",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.execution.to_string(),
            r.algorithm.to_string(),
            r.iterations.to_string(),
            opt(r.limit),
            r.runs.to_string(),
            r.mean_front_size.to_string(),
            r.mean_num_total.to_string(),
            r.mean_min_time_total.to_string(),
            r.mean_min_cost_total.to_string(),
            r.mean_solver_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Consistency(e.to_string()))?)
        .expect("utf-8");
    write_text(&dir.join("sweep_summary.csv"), &text)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "execution",
        "algorithm",
        "seed",
        "iterations",
        "limit",
        "front_size",
        "mean_num_total",
        "min_time_total",
        "min_cost_total",
        "solver_ms",
    ])
    .map_err(csv_err)?;
    for (exec, s) in runs {
        w.write_record([
            exec.to_string(),
            s.algorithm.to_string(),
            s.seed.to_string(),
            s.iterations.to_string(),
            opt(s.limit),
            s.front_size.to_string(),
            s.mean_num_total.to_string(),
            s.min_time_total.to_string(),
            s.min_cost_total.to_string(),
            s.solver_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Consistency(e.to_string()))?)
        .expect("utf-8");
    write_text(&dir.join("sweep_runs.csv"), &text)
}
