//! Final selection of non-dominated complete solutions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::domain::{CompositeSolution, ObjectiveVector, Order, TaskSpec};
use crate::error::SolveError;
use crate::ranking;

/// A complete solution with its objective values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub solution: CompositeSolution,
    pub objectives: ObjectiveVector,
}

/// Keeps the first solution per distinct objective vector, then returns
/// the non-dominated ones ordered by (time, cost, num).
pub fn select_optimal(candidates: Vec<FrontMember>) -> Vec<FrontMember> {
    let mut seen = HashSet::new();
    let unique: Vec<FrontMember> = candidates
        .into_iter()
        .filter(|m| seen.insert(m.objectives.key()))
        .collect();
    let fitness: Vec<[f64; 3]> = unique.iter().map(|m| m.objectives.to_array()).collect();
    let keep = ranking::non_dominated(&fitness);
    let mut front: Vec<FrontMember> = keep.into_iter().map(|i| unique[i].clone()).collect();
    sort_canonical(&mut front);
    front
}

/// Lexicographic order on (time, cost, num).
pub fn sort_canonical(front: &mut [FrontMember]) {
    front.sort_by(|a, b| {
        let (x, y) = (a.objectives, b.objectives);
        x.time_total
            .total_cmp(&y.time_total)
            .then(x.cost_total.total_cmp(&y.cost_total))
            .then(x.num_total.cmp(&y.num_total))
    });
}

/// Whether no member of `front` dominates another.
pub fn is_mutually_non_dominated(front: &[FrontMember]) -> bool {
    front.iter().all(|a| {
        front.iter().all(|b| {
            !ranking::dominates_unchecked(&a.objectives.to_array(), &b.objectives.to_array())
        })
    })
}

pub(crate) fn check_instance(task: &TaskSpec, order: &Order) -> Result<(), SolveError> {
    task.check()?;
    order.check()?;
    if let Some(st) = task.infeasible_subtask(order.quantity) {
        return Err(SolveError::Infeasible {
            subtask: st.id.clone(),
            quantity: order.quantity,
            capacity: st.capacity(order.quantity),
        });
    }
    Ok(())
}
