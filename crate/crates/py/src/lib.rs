//! Python bindings: instances, evaluation, both solvers, the exact oracle
//! and the genetic operators.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cmcp_core::cli::config::{self, ExperimentConfig};
use cmcp_core::oracle;
use cmcp_core::ranking;
use cmcp_core::variation;
use cmcp_core::{
    Allocation, CompositeSolution, FrontMember, Nsga2Params, PdgaParams, VariationParams,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A task, an order and the configured run parameters.
#[pyclass(frozen)]
struct Instance {
    cfg: ExperimentConfig,
}

#[pymethods]
impl Instance {
    /// The bundled clothing-customization case (6 sub-tasks, 1000 units).
    #[staticmethod]
    fn clothing() -> Self {
        Instance { cfg: config::clothing() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let cfg = config::parse_config(text).map_err(value_err)?;
        config::validate(&cfg).map_err(value_err)?;
        Ok(Instance { cfg })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let cfg = config::load_config(path).map_err(value_err)?;
        config::validate(&cfg).map_err(value_err)?;
        Ok(Instance { cfg })
    }

    fn to_json(&self) -> String {
        config::write_config(&self.cfg)
    }

    #[getter]
    fn quantity(&self) -> u32 {
        self.cfg.order.quantity
    }

    /// Sub-task ids in task order.
    #[getter]
    fn subtasks(&self) -> Vec<String> {
        self.cfg.task.subtasks.iter().map(|s| s.id.clone()).collect()
    }

    /// `(unit_time, unit_cost)` per service, per sub-task.
    #[getter]
    fn services(&self) -> Vec<Vec<(f64, f64)>> {
        self.cfg
            .task
            .subtasks
            .iter()
            .map(|st| st.services.iter().map(|s| (s.unit_time, s.unit_cost)).collect())
            .collect()
    }

    /// Returns `(time_total, cost_total, num_total)` of a complete plan.
    fn evaluate(&self, allocations: Vec<Vec<u32>>) -> PyResult<(f64, f64, u32)> {
        let s = solution(allocations);
        let o = cmcp_core::evaluation::evaluate_checked(&s, &self.cfg.task, &self.cfg.order).map_err(value_err)?;
        Ok((o.time_total, o.cost_total, o.num_total))
    }

    /// Raises `ValueError` naming the first infeasible sub-task.
    fn validate(&self, allocations: Vec<Vec<u32>>) -> PyResult<()> {
        cmcp_core::validate_solution(&solution(allocations), &self.cfg.task, &self.cfg.order)
            .map_err(|(i, e)| PyValueError::new_err(format!("sub-task {}: {e}", self.cfg.task.subtasks[i].id)))
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(order={:?}, subtasks={}, quantity={})",
            self.cfg.order.id,
            self.cfg.task.len(),
            self.cfg.order.quantity
        )
    }
}

fn solution(allocations: Vec<Vec<u32>>) -> CompositeSolution {
    CompositeSolution::new(allocations.into_iter().map(Allocation::new).collect())
}

/// One front member.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Solution {
    time_total: f64,
    cost_total: f64,
    num_total: u32,
    allocations: Vec<Vec<u32>>,
}

#[pymethods]
impl Solution {
    fn __repr__(&self) -> String {
        format!(
            "Solution(time_total={}, cost_total={}, num_total={}, allocations={:?})",
            self.time_total, self.cost_total, self.num_total, self.allocations
        )
    }
}

fn to_py(front: Vec<FrontMember>) -> Vec<Solution> {
    front
        .into_iter()
        .map(|m| Solution {
            time_total: m.objectives.time_total,
            cost_total: m.objectives.cost_total,
            num_total: m.objectives.num_total,
            allocations: m.solution.allocations.into_iter().map(|a| a.counts).collect(),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn params(
    inst: &Instance,
    iterations: Option<usize>,
    pop_size: Option<usize>,
    limit: Option<f64>,
    seed: Option<u64>,
    eta_c: Option<f64>,
    eta_m: Option<f64>,
    parallel: bool,
) -> PdgaParams {
    let base = inst.cfg.params;
    PdgaParams {
        iterations: iterations.unwrap_or(base.iterations),
        pop_size: pop_size.unwrap_or(base.pop_size),
        limit: limit.unwrap_or(base.limit),
        variation: VariationParams {
            eta_c: eta_c.unwrap_or(base.variation.eta_c),
            eta_m: eta_m.unwrap_or(base.variation.eta_m),
            ..base.variation
        },
        seed: seed.or_else(|| inst.cfg.seeds.first().copied()).unwrap_or(0),
        parallel,
    }
}

/// Runs PDGA; unset arguments come from the instance's configuration.
#[pyfunction]
#[pyo3(signature = (instance, iterations=None, pop_size=None, limit=None, seed=None, eta_c=None, eta_m=None, parallel=false))]
#[allow(clippy::too_many_arguments)]
fn run_pdga(
    instance: &Instance,
    iterations: Option<usize>,
    pop_size: Option<usize>,
    limit: Option<f64>,
    seed: Option<u64>,
    eta_c: Option<f64>,
    eta_m: Option<f64>,
    parallel: bool,
) -> PyResult<Vec<Solution>> {
    let p = params(instance, iterations, pop_size, limit, seed, eta_c, eta_m, parallel);
    cmcp_core::run_pdga(&instance.cfg.task, &instance.cfg.order, p)
        .map(to_py)
        .map_err(value_err)
}

/// Runs the NSGA-II baseline (200 generations unless given).
#[pyfunction]
#[pyo3(signature = (instance, iterations=200, pop_size=None, seed=None, eta_c=None, eta_m=None, parallel=false))]
fn run_nsga2(
    instance: &Instance,
    iterations: usize,
    pop_size: Option<usize>,
    seed: Option<u64>,
    eta_c: Option<f64>,
    eta_m: Option<f64>,
    parallel: bool,
) -> PyResult<Vec<Solution>> {
    let p = params(instance, Some(iterations), pop_size, None, seed, eta_c, eta_m, parallel);
    cmcp_core::run_nsga2(&instance.cfg.task, &instance.cfg.order, &Nsga2Params::from(&p))
        .map(to_py)
        .map_err(value_err)
}

/// Exact front by enumeration; fails when the instance exceeds `budget`.
#[pyfunction]
#[pyo3(signature = (instance, budget=oracle::DEFAULT_BUDGET))]
fn exact_front(instance: &Instance, budget: u128) -> PyResult<Vec<Solution>> {
    oracle::exact_pareto_front(&instance.cfg.task, &instance.cfg.order, budget)
        .map(to_py)
        .map_err(value_err)
}

#[pyfunction]
fn sbx_pair(x1: f64, x2: f64, eta_c: f64, r: f64) -> (f64, f64) {
    variation::sbx_pair(x1, x2, eta_c, r)
}

#[pyfunction]
fn polynomial_mutate(x: f64, lower: f64, upper: f64, eta_m: f64, r: f64) -> f64 {
    variation::polynomial_mutate(x, lower, upper, eta_m, r)
}

#[pyfunction]
fn dominates(a: Vec<f64>, b: Vec<f64>) -> PyResult<bool> {
    ranking::dominates(&a, &b).map_err(value_err)
}

#[pyfunction]
fn fast_non_dominated_sort(population: Vec<Vec<f64>>) -> PyResult<Vec<Vec<usize>>> {
    check_rows(&population)?;
    Ok(ranking::fast_non_dominated_sort(&population))
}

#[pyfunction]
fn crowding_distance(front: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    check_rows(&front)?;
    Ok(ranking::crowding_distance(&front))
}

fn check_rows(rows: &[Vec<f64>]) -> PyResult<()> {
    match rows.first() {
        Some(first) if rows.iter().any(|r| r.len() != first.len()) => {
            Err(PyValueError::new_err("fitness vectors have different lengths"))
        }
        _ => Ok(()),
    }
}

#[pymodule]
fn cmcp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(run_pdga, m)?)?;
    m.add_function(wrap_pyfunction!(run_nsga2, m)?)?;
    m.add_function(wrap_pyfunction!(exact_front, m)?)?;
    m.add_function(wrap_pyfunction!(sbx_pair, m)?)?;
    m.add_function(wrap_pyfunction!(polynomial_mutate, m)?)?;
    m.add_function(wrap_pyfunction!(dominates, m)?)?;
    m.add_function(wrap_pyfunction!(fast_non_dominated_sort, m)?)?;
    m.add_function(wrap_pyfunction!(crowding_distance, m)?)?;
    Ok(())
}
