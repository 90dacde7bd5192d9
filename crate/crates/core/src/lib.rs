//! Service composition and usage-scheme optimization for cloud-manufacturing
//! customized production.
//!
//! A production task is a chain of sub-tasks; each sub-task can split the
//! ordered quantity over several functionally identical candidate services.
//! Solutions are ranked on total completion time, total cost and the number
//! of selected services. The crate provides
//!
//! - [`evaluation`]: the pipelined completion-time model and the totals,
//! - [`pdga`]: a genetic algorithm with one population per sub-task,
//! - [`nsga2`]: an NSGA-II baseline over the whole solution,
//! - [`oracle`]: exact fronts of tiny instances by enumeration,
//! - [`cli`]: configuration files, seeded experiment runs and reports.

pub mod cli;
pub mod domain;
pub mod error;
pub mod evaluation;
pub mod front;
pub mod nsga2;
pub mod oracle;
pub mod pdga;
pub mod ranking;
pub mod variation;

pub use domain::{
    support, validate_allocation, validate_solution, Allocation, AllocationViolation,
    CandidateService, CompositeSolution, DomainError, ObjectiveVector, Order, SubTask, TaskSpec,
    ValidationError,
};
pub use error::SolveError;
pub use evaluation::{completion_times, eval_subtask, total_objectives, SubTaskEval};
pub use front::FrontMember;
pub use nsga2::{run_nsga2, Nsga2Params};
pub use pdga::{run as run_pdga, PdgaParams};
pub use variation::VariationParams;
