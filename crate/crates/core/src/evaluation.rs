//! Objective evaluation: bottleneck times per sub-task, the pipelined
//! completion-time recursion, and the three totals.
//!
//! For sub-task `i` the selected service with the longest cumulative usage
//! time is its bottleneck; `lt` is that cumulative time and `ut` the time of
//! one of its uses. Completion times then follow
//!
//! ```text
//! time[0] = lt[0]
//! time[i] = max(lt[i], time[i-1] - ut[i-1] + ut[i])
//! ```
//!
//! and the task finishes at `time[I-1] + sum(ut[0..I-1])`.

use thiserror::Error;

use crate::domain::{
    check_counts, Allocation, AllocationViolation, CompositeSolution, ObjectiveVector, Order,
    SubTask, TaskSpec, ValidationError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("solution has {got} allocations but the task has {expected} sub-tasks")]
    SubTaskCount { expected: usize, got: usize },
    #[error("sub-task {index}: {source}")]
    Invalid {
        index: usize,
        #[source]
        source: ValidationError,
    },
}

/// Per-sub-task figures feeding the totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubTaskEval {
    /// Cumulative usage time of the bottleneck service.
    pub lt: f64,
    /// Single-use time of the bottleneck service.
    pub ut: f64,
    pub cost: f64,
    /// Number of selected services.
    pub num: u32,
}

/// Total time spent by a service used `count` times.
pub fn cumulative_usage_time(count: u32, unit_time: f64) -> f64 {
    f64::from(count) * unit_time
}

/// Evaluates one allocation. The allocation must be a non-zero vector of
/// the right length within the service caps; the ordered quantity is not
/// known here and is not checked.
pub fn eval_subtask(a: &Allocation, st: &SubTask) -> Result<SubTaskEval, ValidationError> {
    if a.counts.len() != st.services.len() {
        return Err(ValidationError::LengthMismatch {
            expected: st.services.len(),
            got: a.counts.len(),
        });
    }
    if a.counts.iter().all(|&c| c == 0) {
        return Err(AllocationViolation::ZeroVector.into());
    }
    for (j, (&count, service)) in a.counts.iter().zip(&st.services).enumerate() {
        if let Some(cap) = service.max_uses {
            if count > cap {
                return Err(AllocationViolation::CapExceeded {
                    service: j,
                    count,
                    cap,
                }
                .into());
            }
        }
    }
    Ok(eval_counts(&a.counts, st))
}

/// Unchecked evaluation used on the solver hot paths.
///
/// Bottleneck ties (equal cumulative time) go to the smaller unit time,
/// then to the earlier service.
pub(crate) fn eval_counts(counts: &[u32], st: &SubTask) -> SubTaskEval {
    let mut lt = f64::NEG_INFINITY;
    let mut ut = f64::INFINITY;
    let mut cost = 0.0;
    let mut num = 0;
    for (&count, service) in counts.iter().zip(&st.services) {
        cost += f64::from(count) * service.unit_cost;
        if count == 0 {
            continue;
        }
        num += 1;
        let t = cumulative_usage_time(count, service.unit_time);
        if t > lt || (t == lt && service.unit_time < ut) {
            lt = t;
            ut = service.unit_time;
        }
    }
    if num == 0 {
        lt = 0.0;
        ut = 0.0;
    }
    SubTaskEval { lt, ut, cost, num }
}

/// Completion time of every sub-task from precomputed evaluations.
pub fn completion_times_from(evals: &[SubTaskEval]) -> Vec<f64> {
    let mut times = Vec::with_capacity(evals.len());
    for (i, e) in evals.iter().enumerate() {
        let t = if i == 0 {
            e.lt
        } else {
            let prev = &evals[i - 1];
            e.lt.max(times[i - 1] - prev.ut + e.ut)
        };
        times.push(t);
    }
    times
}

/// Folds per-sub-task evaluations into the objective vector.
pub fn objectives_from(evals: &[SubTaskEval]) -> ObjectiveVector {
    let times = completion_times_from(evals);
    let last = times.last().copied().unwrap_or(0.0);
    let offsets: f64 = evals
        .iter()
        .take(evals.len().saturating_sub(1))
        .map(|e| e.ut)
        .sum();
    ObjectiveVector {
        time_total: last + offsets,
        cost_total: evals.iter().map(|e| e.cost).sum(),
        num_total: evals.iter().map(|e| e.num).sum(),
    }
}

fn eval_all(s: &CompositeSolution, t: &TaskSpec) -> Result<Vec<SubTaskEval>, EvalError> {
    if s.allocations.len() != t.subtasks.len() {
        return Err(EvalError::SubTaskCount {
            expected: t.subtasks.len(),
            got: s.allocations.len(),
        });
    }
    s.allocations
        .iter()
        .zip(&t.subtasks)
        .enumerate()
        .map(|(index, (a, st))| {
            eval_subtask(a, st).map_err(|source| EvalError::Invalid { index, source })
        })
        .collect()
}

/// Completion time of every sub-task of a solution.
pub fn completion_times(s: &CompositeSolution, t: &TaskSpec) -> Result<Vec<f64>, EvalError> {
    Ok(completion_times_from(&eval_all(s, t)?))
}

/// Total completion time, total cost and number of selected services.
pub fn total_objectives(s: &CompositeSolution, t: &TaskSpec) -> Result<ObjectiveVector, EvalError> {
    Ok(objectives_from(&eval_all(s, t)?))
}

/// Like [`total_objectives`] but also checks each allocation against the
/// ordered quantity.
pub fn evaluate_checked(
    s: &CompositeSolution,
    t: &TaskSpec,
    order: &Order,
) -> Result<ObjectiveVector, EvalError> {
    if s.allocations.len() != t.subtasks.len() {
        return Err(EvalError::SubTaskCount {
            expected: t.subtasks.len(),
            got: s.allocations.len(),
        });
    }
    for (index, (a, st)) in s.allocations.iter().zip(&t.subtasks).enumerate() {
        check_counts(&a.counts, st, order.quantity)
            .map_err(|source| EvalError::Invalid { index, source })?;
    }
    total_objectives(s, t)
}
