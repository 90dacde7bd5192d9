use thiserror::Error;

use crate::domain::DomainError;
use crate::variation::VariationError;

/// Failures reported by the optimizers before or during a run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid parameter {name}: {reason}")]
    Params { name: &'static str, reason: String },
    #[error("infeasible instance: sub-task `{subtask}` can absorb {capacity} of {quantity} units")]
    Infeasible {
        subtask: String,
        quantity: u32,
        capacity: u64,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Variation(VariationError),
}

impl From<VariationError> for SolveError {
    fn from(e: VariationError) -> Self {
        match e {
            VariationError::Unsatisfiable {
                subtask,
                quantity,
                capacity,
            } => SolveError::Infeasible {
                subtask,
                quantity,
                capacity,
            },
            VariationError::Param { name, value } => SolveError::Params {
                name,
                reason: format!("{value} is out of range"),
            },
            other => SolveError::Variation(other),
        }
    }
}
