//! Exhaustive enumeration for tiny instances: every feasible allocation,
//! every complete solution, and the exact Pareto front.

use thiserror::Error;

use crate::domain::{Allocation, CompositeSolution, ObjectiveVector, Order, SubTask, TaskSpec};
use crate::evaluation::{eval_counts, objectives_from, SubTaskEval};
use crate::front::{sort_canonical, FrontMember};
use crate::ranking::dominates_unchecked;

pub const DEFAULT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration needs {count} items, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u128 },
    #[error("sub-task `{0}` has no feasible allocation")]
    Infeasible(String),
}

/// Number of compositions of `quantity` into `parts` non-negative parts,
/// saturating at `u128::MAX`.
pub fn composition_count(quantity: u32, parts: usize) -> u128 {
    if parts == 0 {
        return 0;
    }
    // C(q + J - 1, J - 1) built incrementally; each prefix is an integer.
    let k = (parts - 1) as u128;
    let n = u128::from(quantity) + k;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = match acc.checked_mul(n - k + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// All allocations of `quantity` units over the sub-task's services within
/// their caps, first component descending.
pub fn enumerate_allocations(st: &SubTask, order: &Order, budget: u128) -> Result<Vec<Allocation>, OracleError> {
    let q = order.quantity;
    let count = composition_count(q, st.services.len());
    if count > budget {
        return Err(OracleError::BudgetExceeded { count, budget });
    }
    let bounds: Vec<u32> = st.services.iter().map(|s| s.upper_bound(q)).collect();
    let mut out = Vec::new();
    let mut counts = vec![0u32; bounds.len()];
    fill(&bounds, 0, q, &mut counts, &mut out);
    Ok(out)
}

fn fill(bounds: &[u32], j: usize, left: u32, counts: &mut Vec<u32>, out: &mut Vec<Allocation>) {
    if j + 1 == bounds.len() {
        if left <= bounds[j] {
            counts[j] = left;
            if counts.iter().any(|&c| c > 0) {
                out.push(Allocation::new(counts.clone()));
            }
        }
        return;
    }
    for c in (0..=left.min(bounds[j])).rev() {
        counts[j] = c;
        fill(bounds, j + 1, left - c, counts, out);
    }
}

/// Exact non-dominated set over every complete solution, one member per
/// distinct objective vector, in (time, cost, num) order.
pub fn exact_pareto_front(task: &TaskSpec, order: &Order, budget: u128) -> Result<Vec<FrontMember>, OracleError> {
    let per_subtask = task
        .subtasks
        .iter()
        .map(|st| enumerate_allocations(st, order, budget))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((i, _)) = per_subtask.iter().enumerate().find(|(_, v)| v.is_empty()) {
        return Err(OracleError::Infeasible(task.subtasks[i].id.clone()));
    }
    let total = per_subtask
        .iter()
        .try_fold(1u128, |acc, v| acc.checked_mul(v.len() as u128))
        .unwrap_or(u128::MAX);
    if total > budget {
        return Err(OracleError::BudgetExceeded { count: total, budget });
    }
    let evals: Vec<Vec<SubTaskEval>> = per_subtask
        .iter()
        .zip(&task.subtasks)
        .map(|(allocs, st)| allocs.iter().map(|a| eval_counts(&a.counts, st)).collect())
        .collect();

    let mut all: Vec<(ObjectiveVector, Vec<usize>)> = Vec::with_capacity(total as usize);
    let mut pick = vec![0usize; per_subtask.len()];
    let mut buf = Vec::with_capacity(pick.len());
    loop {
        buf.clear();
        buf.extend(pick.iter().enumerate().map(|(i, &k)| evals[i][k]));
        all.push((objectives_from(&buf), pick.clone()));
        // Odometer over the Cartesian product.
        let mut i = pick.len();
        loop {
            if i == 0 {
                return Ok(finish(all, &per_subtask));
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < per_subtask[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

fn finish(mut all: Vec<(ObjectiveVector, Vec<usize>)>, per_subtask: &[Vec<Allocation>]) -> Vec<FrontMember> {
    // Lexicographic order: a vector can only be dominated by earlier ones.
    all.sort_by(|(a, pa), (b, pb)| {
        a.time_total
            .total_cmp(&b.time_total)
            .then(a.cost_total.total_cmp(&b.cost_total))
            .then(a.num_total.cmp(&b.num_total))
            .then(pa.cmp(pb))
    });
    let mut front: Vec<(ObjectiveVector, Vec<usize>)> = Vec::new();
    for (obj, pick) in all {
        let v = obj.to_array();
        let covered = front.iter().any(|(f, _)| {
            let w = f.to_array();
            w == v || dominates_unchecked(&w, &v)
        });
        if !covered {
            front.push((obj, pick));
        }
    }
    let mut out: Vec<FrontMember> = front
        .into_iter()
        .map(|(objectives, pick)| FrontMember {
            solution: CompositeSolution::new(
                pick.iter()
                    .enumerate()
                    .map(|(i, &k)| per_subtask[i][k].clone())
                    .collect(),
            ),
            objectives,
        })
        .collect();
    sort_canonical(&mut out);
    out
}

/// All complete solutions with their objectives, for small cross-checks.
pub fn enumerate_solutions(task: &TaskSpec, order: &Order, budget: u128) -> Result<Vec<FrontMember>, OracleError> {
    let per_subtask = task
        .subtasks
        .iter()
        .map(|st| enumerate_allocations(st, order, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let mut solutions: Vec<Vec<Allocation>> = vec![Vec::new()];
    for allocs in &per_subtask {
        let next: Vec<Vec<Allocation>> = solutions
            .iter()
            .flat_map(|prefix| {
                allocs.iter().map(move |a| {
                    let mut s = prefix.clone();
                    s.push(a.clone());
                    s
                })
            })
            .collect();
        if next.len() as u128 > budget {
            return Err(OracleError::BudgetExceeded {
                count: next.len() as u128,
                budget,
            });
        }
        solutions = next;
    }
    Ok(solutions
        .into_iter()
        .map(|allocs| {
            let evals: Vec<_> = allocs
                .iter()
                .zip(&task.subtasks)
                .map(|(a, st)| eval_counts(&a.counts, st))
                .collect();
            FrontMember {
                objectives: objectives_from(&evals),
                solution: CompositeSolution::new(allocs),
            }
        })
        .collect())
}
