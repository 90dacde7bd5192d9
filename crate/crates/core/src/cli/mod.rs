//! Experiment runner: seeded solver runs, front and summary files, the
//! fourteen-execution limit sweep, and front comparison.

pub mod config;
pub mod files;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_solution, Order, TaskSpec};
use crate::error::SolveError;
use crate::evaluation::total_objectives;
use crate::front::{is_mutually_non_dominated, FrontMember};
use crate::nsga2::{run_nsga2, Nsga2Params};
use crate::pdga::{self, PdgaParams};
use crate::ranking::dominates_unchecked;

pub use config::{load_config, parse_config, write_config, Algorithm, ConfigError, ExperimentConfig};
pub use files::{FrontFile, FrontRow, Summary};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const SOLVER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed front file: {message}")]
    BadFront { path: PathBuf, message: String },
    #[error("fronts describe different instances ({a} vs {b})")]
    InstanceMismatch { a: String, b: String },
    #[error("solver failed: {0}")]
    Solver(SolveError),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Solver(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Read { .. }) => exit::IO,
            CliError::Config(ConfigError::Infeasible { .. }) => exit::INFEASIBLE,
            CliError::Config(_) => exit::CONFIG,
            CliError::Solver(SolveError::Infeasible { .. }) => exit::INFEASIBLE,
            CliError::Solver(_) | CliError::Consistency(_) => exit::SOLVER,
            CliError::Io { .. } => exit::IO,
            CliError::BadFront { .. } | CliError::InstanceMismatch { .. } => exit::CONFIG,
        }
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub params: PdgaParams,
    pub front: Vec<FrontMember>,
    /// Solver time only, in milliseconds.
    pub solver_ms: f64,
}

/// Runs one algorithm once with `params` (its `seed` included).
pub fn solve(
    task: &TaskSpec,
    order: &Order,
    algorithm: Algorithm,
    params: PdgaParams,
) -> Result<RunOutcome, SolveError> {
    let started = Instant::now();
    let front = match algorithm {
        Algorithm::Pdga => pdga::run(task, order, params)?,
        Algorithm::Nsga2 => run_nsga2(task, order, &Nsga2Params::from(&params))?,
    };
    let solver_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(RunOutcome {
        algorithm,
        seed: params.seed,
        params,
        front,
        solver_ms,
    })
}

/// Re-checks a front before it is written: every row feasible, objectives
/// reproducible, rows mutually non-dominated.
pub fn check_front(front: &[FrontMember], task: &TaskSpec, order: &Order) -> Result<(), CliError> {
    for (k, m) in front.iter().enumerate() {
        validate_solution(&m.solution, task, order).map_err(|(i, e)| {
            CliError::Consistency(format!("row {k}, sub-task {i}: {e}"))
        })?;
        let again = total_objectives(&m.solution, task)
            .map_err(|e| CliError::Consistency(format!("row {k}: {e}")))?;
        if again != m.objectives {
            return Err(CliError::Consistency(format!(
                "row {k}: recorded objectives {:?} re-evaluate to {again:?}",
                m.objectives
            )));
        }
    }
    if !is_mutually_non_dominated(front) {
        return Err(CliError::Consistency("front rows dominate each other".into()));
    }
    Ok(())
}

/// File stem for one run, e.g. `pdga_limit24000_seed3`.
pub fn run_stem(algorithm: Algorithm, params: &PdgaParams) -> String {
    match algorithm {
        Algorithm::Pdga => format!("pdga_limit{}_seed{}", params.limit, params.seed),
        Algorithm::Nsga2 => format!("nsga2_seed{}", params.seed),
    }
}

/// Runs the configured algorithm for every seed and writes, per seed,
/// `<stem>.front.json`, `<stem>.front.csv` and `<stem>.summary.json` into
/// the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Summary>, CliError> {
    config::validate(cfg)?;
    files::ensure_dir(&cfg.output_dir)?;
    let instance = files::instance_id(&cfg.task, &cfg.order);
    let mut summaries = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let params = PdgaParams { seed, ..cfg.params };
        let outcome = solve(&cfg.task, &cfg.order, cfg.algorithm, params)?;
        check_front(&outcome.front, &cfg.task, &cfg.order)?;
        let stem = run_stem(cfg.algorithm, &params);
        let summary = files::write_run(&cfg.output_dir, &stem, &instance, &outcome)?;
        summaries.push(summary);
    }
    Ok(summaries)
}

/// One execution of the limit sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Execution {
    pub number: usize,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub limit: Option<f64>,
}

/// The fourteen executions: NSGA-II with 200 generations, then PDGA with
/// 100 generations and limits 0, 24000, 26000, ..., 46000.
pub fn table3_executions() -> Vec<Execution> {
    let mut out = vec![
        Execution {
            number: 1,
            algorithm: Algorithm::Nsga2,
            iterations: 200,
            limit: None,
        },
        Execution {
            number: 2,
            algorithm: Algorithm::Pdga,
            iterations: 100,
            limit: Some(0.0),
        },
    ];
    for k in 0..12 {
        out.push(Execution {
            number: 3 + k,
            algorithm: Algorithm::Pdga,
            iterations: 100,
            limit: Some(24000.0 + 2000.0 * k as f64),
        });
    }
    out
}

/// Aggregate of one execution over all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub execution: usize,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub limit: Option<f64>,
    pub runs: usize,
    pub mean_front_size: f64,
    pub mean_num_total: f64,
    pub mean_min_time_total: f64,
    pub mean_min_cost_total: f64,
    pub mean_solver_ms: f64,
}

/// Runs every execution for every configured seed. Per-run files go to
/// `<out>/execNN/`; `sweep_runs.csv` holds one row per run and
/// `sweep_summary.csv` one row per execution.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    config::validate(cfg)?;
    files::ensure_dir(&cfg.output_dir)?;
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for exec in table3_executions() {
        let sub = ExperimentConfig {
            algorithm: exec.algorithm,
            params: PdgaParams {
                iterations: exec.iterations,
                limit: exec.limit.unwrap_or(0.0),
                ..cfg.params
            },
            output_dir: cfg.output_dir.join(format!("exec{:02}", exec.number)),
            ..cfg.clone()
        };
        let summaries = run_experiment(&sub)?;
        let n = summaries.len() as f64;
        let mean = |f: &dyn Fn(&Summary) -> f64| summaries.iter().map(f).sum::<f64>() / n;
        rows.push(SweepRow {
            execution: exec.number,
            algorithm: exec.algorithm,
            iterations: exec.iterations,
            limit: exec.limit,
            runs: summaries.len(),
            mean_front_size: mean(&|s| s.front_size as f64),
            mean_num_total: mean(&|s| s.mean_num_total),
            mean_min_time_total: mean(&|s| s.min_time_total),
            mean_min_cost_total: mean(&|s| s.min_cost_total),
            mean_solver_ms: mean(&|s| s.solver_ms),
        });
        runs.extend(summaries.into_iter().map(|s| (exec.number, s)));
    }
    files::write_sweep(&cfg.output_dir, &rows, &runs)?;
    Ok(rows)
}

/// Per-front statistics in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontStats {
    pub size: usize,
    pub min_time_total: f64,
    pub mean_time_total: f64,
    pub min_cost_total: f64,
    pub mean_cost_total: f64,
    pub min_num_total: f64,
    pub mean_num_total: f64,
}

impl FrontStats {
    pub fn of(rows: &[[f64; 3]]) -> FrontStats {
        let n = rows.len();
        let col = |k: usize| rows.iter().map(move |r| r[k]);
        let mean = |k: usize| if n == 0 { f64::NAN } else { col(k).sum::<f64>() / n as f64 };
        let min = |k: usize| col(k).fold(f64::INFINITY, f64::min);
        FrontStats {
            size: n,
            min_time_total: min(0),
            mean_time_total: mean(0),
            min_cost_total: min(1),
            mean_cost_total: mean(1),
            min_num_total: min(2),
            mean_num_total: mean(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub a: FrontStats,
    pub b: FrontStats,
    /// Rows of A dominated by at least one row of B.
    pub a_dominated_by_b: usize,
    /// Rows of B dominated by at least one row of A.
    pub b_dominated_by_a: usize,
}

/// Compares two fronts given as objective rows.
pub fn compare_rows(a: &[[f64; 3]], b: &[[f64; 3]]) -> CompareReport {
    let dominated = |x: &[[f64; 3]], y: &[[f64; 3]]| {
        x.iter()
            .filter(|r| y.iter().any(|s| dominates_unchecked(s, *r)))
            .count()
    };
    CompareReport {
        a: FrontStats::of(a),
        b: FrontStats::of(b),
        a_dominated_by_b: dominated(a, b),
        b_dominated_by_a: dominated(b, a),
    }
}

/// Compares two front files written for the same instance.
pub fn compare(front_a: &Path, front_b: &Path) -> Result<CompareReport, CliError> {
    let a = files::read_front(front_a)?;
    let b = files::read_front(front_b)?;
    if a.instance != b.instance {
        return Err(CliError::InstanceMismatch {
            a: a.instance,
            b: b.instance,
        });
    }
    Ok(compare_rows(&a.objective_rows(), &b.objective_rows()))
}
