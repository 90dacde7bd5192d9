//! Experiment configuration files.
//!
//! ```json
//! {
//!   "order": { "id": "o1", "product_type": "shirt", "quantity": 1000 },
//!   "task": { "subtasks": [ { "id": "ST1", "services": [
//!       { "id": "CS1_1", "unit_time": 1, "unit_cost": 1, "max_uses": 20 } ] } ] },
//!   "algorithm": "pdga",
//!   "params": { "iterations": 100, "pop_size": 50, "limit": 0,
//!               "eta_c": 0.1, "eta_m": 0.01, "pr_c": 1.0, "pr_m": 1.0 },
//!   "seeds": [0, 1, 2],
//!   "output_dir": "results"
//! }
//! ```
//!
//! Everything under `params` is optional, as are `algorithm` (pdga),
//! `seeds` ([0]) and `output_dir` (`results`).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{CandidateService, Order, SubTask, TaskSpec};
use crate::pdga::PdgaParams;
use crate::variation::VariationParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("invalid `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("infeasible instance: `{field}` can absorb {capacity} of {quantity} units")]
    Infeasible {
        field: String,
        quantity: u32,
        capacity: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pdga,
    Nsga2,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Pdga => "pdga",
            Algorithm::Nsga2 => "nsga2",
        }
    }

    /// Generation budget used when none is configured.
    pub fn default_iterations(&self) -> usize {
        match self {
            Algorithm::Pdga => 100,
            Algorithm::Nsga2 => 200,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pdga" => Ok(Algorithm::Pdga),
            "nsga2" | "nsga-ii" => Ok(Algorithm::Nsga2),
            other => Err(format!("unknown algorithm `{other}` (expected pdga or nsga2)")),
        }
    }
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: TaskSpec,
    pub order: Order,
    pub algorithm: Algorithm,
    /// Solver settings; `seed` mirrors the first entry of `seeds`.
    pub params: PdgaParams,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    order: Option<RawOrder>,
    task: Option<RawTask>,
    algorithm: Option<Algorithm>,
    #[serde(default)]
    params: RawParams,
    seeds: Option<Vec<u64>>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrder {
    id: Option<String>,
    product_type: Option<String>,
    quantity: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    subtasks: Option<Vec<RawSubTask>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubTask {
    id: Option<String>,
    services: Option<Vec<RawService>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawService {
    id: Option<String>,
    unit_time: Option<f64>,
    unit_cost: Option<f64>,
    max_uses: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    iterations: Option<usize>,
    pop_size: Option<usize>,
    limit: Option<f64>,
    eta_c: Option<f64>,
    eta_m: Option<f64>,
    pr_c: Option<f64>,
    pr_m: Option<f64>,
    parallel: Option<bool>,
}

#[derive(Serialize)]
struct OutConfig<'a> {
    order: &'a Order,
    task: &'a TaskSpec,
    algorithm: Algorithm,
    params: OutParams,
    seeds: &'a [u64],
    output_dir: &'a Path,
}

#[derive(Serialize)]
struct OutParams {
    iterations: usize,
    pop_size: usize,
    limit: f64,
    eta_c: f64,
    eta_m: f64,
    pr_c: f64,
    pr_m: f64,
    parallel: bool,
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

fn required<T>(value: Option<T>, field: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| schema(field, "missing"))
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| ConfigError::Parse {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let raw_order = required(raw.order, "order")?;
    let quantity = required(raw_order.quantity, "order.quantity")?;
    if quantity == 0 {
        return Err(schema("order.quantity", "must be at least 1"));
    }
    if quantity > u64::from(crate::domain::MAX_QUANTITY) {
        return Err(schema("order.quantity", format!("{quantity} is too large")));
    }
    let order = Order {
        id: raw_order.id.unwrap_or_else(|| "order".into()),
        product_type: raw_order.product_type.unwrap_or_default(),
        quantity: quantity as u32,
    };

    let raw_task = required(raw.task, "task")?;
    let raw_subtasks = required(raw_task.subtasks, "task.subtasks")?;
    if raw_subtasks.is_empty() {
        return Err(schema("task.subtasks", "must not be empty"));
    }
    let mut subtasks = Vec::with_capacity(raw_subtasks.len());
    for (i, rs) in raw_subtasks.into_iter().enumerate() {
        let at = format!("task.subtasks[{i}]");
        let id = required(rs.id, &format!("{at}.id"))?;
        let label = format!("task.subtasks[{i}] ({id})");
        let raw_services = required(rs.services, &format!("{label}.services"))?;
        if raw_services.is_empty() {
            return Err(schema(format!("{label}.services"), "must not be empty"));
        }
        let mut services = Vec::with_capacity(raw_services.len());
        for (j, sv) in raw_services.into_iter().enumerate() {
            let at = format!("{label}.services[{j}]");
            let sid = required(sv.id, &format!("{at}.id"))?;
            let unit_time = required(sv.unit_time, &format!("{at}.unit_time"))?;
            let unit_cost = required(sv.unit_cost, &format!("{at}.unit_cost"))?;
            let max_uses = match sv.max_uses {
                Some(0) => return Err(schema(format!("{at}.max_uses"), "must be at least 1")),
                Some(m) => Some(u32::try_from(m).map_err(|_| schema(format!("{at}.max_uses"), "too large"))?),
                None => None,
            };
            let service = CandidateService::new(sid, unit_time, unit_cost, max_uses)
                .map_err(|e| schema(at.clone(), e.to_string()))?;
            services.push(service);
        }
        let subtask = SubTask::new(id, services).map_err(|e| schema(label.clone(), e.to_string()))?;
        subtasks.push(subtask);
    }
    let task = TaskSpec::new(subtasks).map_err(|e| schema("task.subtasks", e.to_string()))?;

    let algorithm = raw.algorithm.unwrap_or(Algorithm::Pdga);
    let seeds = raw.seeds.unwrap_or_else(|| vec![0]);
    let p = raw.params;
    let params = PdgaParams {
        iterations: p.iterations.unwrap_or(algorithm.default_iterations()),
        pop_size: p.pop_size.unwrap_or(50),
        limit: p.limit.unwrap_or(0.0),
        variation: VariationParams {
            eta_c: p.eta_c.unwrap_or(0.1),
            eta_m: p.eta_m.unwrap_or(0.01),
            pr_c: p.pr_c.unwrap_or(1.0),
            pr_m: p.pr_m.unwrap_or(1.0),
        },
        seed: seeds.first().copied().unwrap_or(0),
        parallel: p.parallel.unwrap_or(false),
    };
    let cfg = ExperimentConfig {
        task,
        order,
        algorithm,
        params,
        seeds,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("results")),
    };
    validate(&cfg)?;
    Ok(cfg)
}

/// Re-checks a configuration, e.g. after command-line overrides.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if cfg.seeds.is_empty() {
        return Err(schema("seeds", "at least one seed is required"));
    }
    if let Err(e) = cfg.params.check() {
        let field = match &e {
            crate::error::SolveError::Params { name, .. } => format!("params.{name}"),
            _ => "params".to_string(),
        };
        return Err(schema(field, e.to_string()));
    }
    for (i, st) in cfg.task.subtasks.iter().enumerate() {
        if !st.is_feasible(cfg.order.quantity) {
            return Err(ConfigError::Infeasible {
                field: format!("task.subtasks[{i}] ({})", st.id),
                quantity: cfg.order.quantity,
                capacity: st.capacity(cfg.order.quantity),
            });
        }
    }
    Ok(())
}

/// Serializes a configuration in the file format read by [`load_config`].
pub fn write_config(cfg: &ExperimentConfig) -> String {
    let v = &cfg.params.variation;
    let out = OutConfig {
        order: &cfg.order,
        task: &cfg.task,
        algorithm: cfg.algorithm,
        params: OutParams {
            iterations: cfg.params.iterations,
            pop_size: cfg.params.pop_size,
            limit: cfg.params.limit,
            eta_c: v.eta_c,
            eta_m: v.eta_m,
            pr_c: v.pr_c,
            pr_m: v.pr_m,
            parallel: cfg.params.parallel,
        },
        seeds: &cfg.seeds,
        output_dir: &cfg.output_dir,
    };
    serde_json::to_string_pretty(&out).expect("configuration serializes")
}

/// The clothing-customization case study shipped with the crate.
pub const CLOTHING_JSON: &str = include_str!("../../data/clothing.json");

pub fn clothing() -> ExperimentConfig {
    parse_config(CLOTHING_JSON).expect("bundled clothing.json is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_instance_shape() {
        let cfg = clothing();
        assert_eq!(cfg.task.len(), 6);
        let services: usize = cfg.task.subtasks.iter().map(|s| s.len()).sum();
        assert_eq!(services, 14);
        assert_eq!(cfg.order.quantity, 1000);
        assert_eq!(cfg.params.pop_size, 50);
        assert_eq!(cfg.params.variation, VariationParams::default());
    }

    #[test]
    fn missing_services_names_the_subtask() {
        let text = r#"{"order":{"quantity":3},"task":{"subtasks":[{"id":"cut"}]}}"#;
        match parse_config(text) {
            Err(ConfigError::Schema { field, .. }) => {
                assert!(field.contains("cut") && field.ends_with("services"), "{field}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_quantity_is_rejected() {
        let text = r#"{"order":{"quantity":0},"task":{"subtasks":[{"id":"a","services":[{"id":"s","unit_time":1,"unit_cost":1}]}]}}"#;
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::Schema { field, .. }) if field == "order.quantity"
        ));
    }

    #[test]
    fn type_errors_carry_the_path() {
        let text = r#"{"order":{"quantity":"many"}}"#;
        match parse_config(text) {
            Err(ConfigError::Parse { field, .. }) => assert_eq!(field, "order.quantity"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_caps_are_reported() {
        let text = r#"{"order":{"quantity":30},"task":{"subtasks":[{"id":"a","services":[{"id":"s","unit_time":1,"unit_cost":1,"max_uses":20}]}]}}"#;
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::Infeasible { capacity: 20, .. })
        ));
    }

    #[test]
    fn defaults_follow_algorithm() {
        let text = r#"{"order":{"quantity":3},"algorithm":"nsga2","task":{"subtasks":[{"id":"a","services":[{"id":"s","unit_time":1,"unit_cost":1}]}]}}"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.params.iterations, 200);
        assert_eq!(cfg.seeds, vec![0]);
    }

    #[test]
    fn round_trip() {
        let mut cfg = clothing();
        cfg.seeds = vec![4, 5];
        cfg.params.seed = 4;
        cfg.params.limit = 24000.0;
        cfg.task.subtasks[0].services[1].max_uses = Some(20);
        assert_eq!(parse_config(&write_config(&cfg)).unwrap(), cfg);
    }
}
