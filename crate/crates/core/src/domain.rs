//! Problem-instance data model: orders, sub-tasks, candidate services,
//! allocations (usage-count vectors) and complete solutions.
//!
//! A production task is a sequence of sub-tasks executed in order. Each
//! sub-task owns a set of functionally identical candidate services that
//! differ only in their per-use time and cost. A solution assigns every
//! sub-task an [`Allocation`]: how many of the ordered units each candidate
//! service processes. The services with a non-zero count form the selected
//! service set of that sub-task.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while constructing domain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("service `{id}`: unit_time must be a positive finite number, got {value}")]
    UnitTime { id: String, value: f64 },
    #[error("service `{id}`: unit_cost must be a non-negative finite number, got {value}")]
    UnitCost { id: String, value: f64 },
    #[error("service `{id}`: max_uses must be at least 1")]
    ZeroCap { id: String },
    #[error("sub-task `{id}` has no candidate services")]
    NoServices { id: String },
    #[error("sub-task `{subtask}` lists service `{service}` more than once")]
    DuplicateService { subtask: String, service: String },
    #[error("task has no sub-tasks")]
    NoSubTasks,
    #[error("task lists sub-task `{id}` more than once")]
    DuplicateSubTask { id: String },
    #[error("order `{id}`: quantity must be at least 1")]
    ZeroQuantity { id: String },
    #[error("order quantity {quantity} exceeds the supported maximum {max}")]
    QuantityTooLarge { quantity: u64, max: u64 },
}

/// Largest supported order quantity (fits an `i32`).
pub const MAX_QUANTITY: u32 = i32::MAX as u32;

/// One purchasable unit of work for a sub-task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateService {
    pub id: String,
    /// Time of a single use.
    pub unit_time: f64,
    /// Cost of a single use.
    pub unit_cost: f64,
    /// Optional cap on the number of uses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_uses: Option<u32>,
}

impl CandidateService {
    pub fn new(
        id: impl Into<String>,
        unit_time: f64,
        unit_cost: f64,
        max_uses: Option<u32>,
    ) -> Result<Self, DomainError> {
        let service = CandidateService {
            id: id.into(),
            unit_time,
            unit_cost,
            max_uses,
        };
        service.check()?;
        Ok(service)
    }

    pub(crate) fn check(&self) -> Result<(), DomainError> {
        if !(self.unit_time.is_finite() && self.unit_time > 0.0) {
            return Err(DomainError::UnitTime {
                id: self.id.clone(),
                value: self.unit_time,
            });
        }
        if !(self.unit_cost.is_finite() && self.unit_cost >= 0.0) {
            return Err(DomainError::UnitCost {
                id: self.id.clone(),
                value: self.unit_cost,
            });
        }
        if self.max_uses == Some(0) {
            return Err(DomainError::ZeroCap {
                id: self.id.clone(),
            });
        }
        Ok(())
    }

    /// Upper bound on this service's count for an order of `quantity` units.
    pub fn upper_bound(&self, quantity: u32) -> u32 {
        self.max_uses.map_or(quantity, |cap| cap.min(quantity))
    }
}

/// One stage of the production task with its candidate service set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubTask {
    pub id: String,
    pub services: Vec<CandidateService>,
}

impl SubTask {
    pub fn new(
        id: impl Into<String>,
        services: Vec<CandidateService>,
    ) -> Result<Self, DomainError> {
        let subtask = SubTask {
            id: id.into(),
            services,
        };
        subtask.check()?;
        Ok(subtask)
    }

    pub(crate) fn check(&self) -> Result<(), DomainError> {
        if self.services.is_empty() {
            return Err(DomainError::NoServices {
                id: self.id.clone(),
            });
        }
        let mut seen = HashSet::new();
        for service in &self.services {
            service.check()?;
            if !seen.insert(service.id.as_str()) {
                return Err(DomainError::DuplicateService {
                    subtask: self.id.clone(),
                    service: service.id.clone(),
                });
            }
        }
        Ok(())
    }

    /// Number of candidate services (the chromosome length).
    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    /// Total number of uses the candidates can absorb for `quantity` units.
    pub fn capacity(&self, quantity: u32) -> u64 {
        self.services
            .iter()
            .map(|s| u64::from(s.upper_bound(quantity)))
            .sum()
    }

    /// Whether an allocation of `quantity` units exists at all.
    pub fn is_feasible(&self, quantity: u32) -> bool {
        quantity >= 1 && self.capacity(quantity) >= u64::from(quantity)
    }
}

/// The decomposed production task; list order is execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub subtasks: Vec<SubTask>,
}

impl TaskSpec {
    pub fn new(subtasks: Vec<SubTask>) -> Result<Self, DomainError> {
        let task = TaskSpec { subtasks };
        task.check()?;
        Ok(task)
    }

    pub fn check(&self) -> Result<(), DomainError> {
        if self.subtasks.is_empty() {
            return Err(DomainError::NoSubTasks);
        }
        let mut seen = HashSet::new();
        for subtask in &self.subtasks {
            subtask.check()?;
            if !seen.insert(subtask.id.as_str()) {
                return Err(DomainError::DuplicateSubTask {
                    id: subtask.id.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.subtasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subtasks.is_empty()
    }

    /// First sub-task that cannot absorb `quantity` units, if any.
    pub fn infeasible_subtask(&self, quantity: u32) -> Option<&SubTask> {
        self.subtasks.iter().find(|st| !st.is_feasible(quantity))
    }
}

/// A customer order. `product_type` is carried but not interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: String,
    pub product_type: String,
    pub quantity: u32,
}

impl Order {
    pub fn new(
        id: impl Into<String>,
        product_type: impl Into<String>,
        quantity: u32,
    ) -> Result<Self, DomainError> {
        let order = Order {
            id: id.into(),
            product_type: product_type.into(),
            quantity,
        };
        order.check()?;
        Ok(order)
    }

    pub fn check(&self) -> Result<(), DomainError> {
        if self.quantity == 0 {
            return Err(DomainError::ZeroQuantity {
                id: self.id.clone(),
            });
        }
        if self.quantity > MAX_QUANTITY {
            return Err(DomainError::QuantityTooLarge {
                quantity: u64::from(self.quantity),
                max: u64::from(MAX_QUANTITY),
            });
        }
        Ok(())
    }

    /// Anonymous order of `quantity` units.
    pub fn with_quantity(quantity: u32) -> Result<Self, DomainError> {
        Order::new("order", "product", quantity)
    }
}

/// Usage counts over one sub-task's candidate services (a chromosome).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    pub counts: Vec<u32>,
}

impl Allocation {
    pub fn new(counts: Vec<u32>) -> Self {
        Allocation { counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Indices of the selected services (non-zero counts).
    pub fn support(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Number of selected services.
    pub fn num_selected(&self) -> u32 {
        self.counts.iter().filter(|&&c| c > 0).count() as u32
    }
}

impl From<Vec<u32>> for Allocation {
    fn from(counts: Vec<u32>) -> Self {
        Allocation { counts }
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (j, c) in self.counts.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Free function form of [`Allocation::support`].
pub fn support(a: &Allocation) -> Vec<usize> {
    a.support()
}

/// One allocation per sub-task: the service composition plus usage scheme.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompositeSolution {
    pub allocations: Vec<Allocation>,
}

impl CompositeSolution {
    pub fn new(allocations: Vec<Allocation>) -> Self {
        CompositeSolution { allocations }
    }
}

/// The three minimized totals of a complete solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub time_total: f64,
    pub cost_total: f64,
    pub num_total: u32,
}

impl ObjectiveVector {
    pub fn to_array(&self) -> [f64; 3] {
        [self.time_total, self.cost_total, f64::from(self.num_total)]
    }

    /// Bitwise identity key used for de-duplication.
    pub(crate) fn key(&self) -> (u64, u64, u32) {
        (
            self.time_total.to_bits(),
            self.cost_total.to_bits(),
            self.num_total,
        )
    }
}

/// Which allocation condition failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationViolation {
    /// Condition 1: the vector must be non-zero.
    #[error("allocation is the zero vector")]
    ZeroVector,
    /// Condition 3: counts must add up to the ordered quantity.
    #[error("allocation uses {sum} units but the order needs {quantity}")]
    QuantityMismatch { sum: u64, quantity: u32 },
    /// Condition 4: a service was used more often than its cap allows.
    #[error("service {service} used {count} times, cap is {cap}")]
    CapExceeded { service: usize, count: u32, cap: u32 },
}

/// Structural problems that prevent checking an allocation at all.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("allocation has {got} entries but the sub-task has {expected} services")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Violation(#[from] AllocationViolation),
}

/// Checks an allocation against the sub-task's services and the order.
///
/// Non-negativity and integrality of the components are carried by the
/// `u32` representation, so the checked conditions are, in order: non-zero
/// vector, sum equal to the ordered quantity, per-service caps.
pub fn validate_allocation(
    a: &Allocation,
    st: &SubTask,
    order: &Order,
) -> Result<(), ValidationError> {
    check_counts(&a.counts, st, order.quantity)
}

pub(crate) fn check_counts(
    counts: &[u32],
    st: &SubTask,
    quantity: u32,
) -> Result<(), ValidationError> {
    if counts.len() != st.services.len() {
        return Err(ValidationError::LengthMismatch {
            expected: st.services.len(),
            got: counts.len(),
        });
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(AllocationViolation::ZeroVector.into());
    }
    let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    if sum != u64::from(quantity) {
        return Err(AllocationViolation::QuantityMismatch { sum, quantity }.into());
    }
    for (j, (&count, service)) in counts.iter().zip(&st.services).enumerate() {
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
    Ok(())
}

/// Checks every allocation of a complete solution; reports the first
/// failing sub-task index with its error.
pub fn validate_solution(
    s: &CompositeSolution,
    task: &TaskSpec,
    order: &Order,
) -> Result<(), (usize, ValidationError)> {
    if s.allocations.len() != task.subtasks.len() {
        return Err((
            s.allocations.len().min(task.subtasks.len()),
            ValidationError::LengthMismatch {
                expected: task.subtasks.len(),
                got: s.allocations.len(),
            },
        ));
    }
    for (i, (a, st)) in s.allocations.iter().zip(&task.subtasks).enumerate() {
        validate_allocation(a, st, order).map_err(|e| (i, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_services(cap: Option<u32>) -> SubTask {
        SubTask::new(
            "st",
            vec![
                CandidateService::new("a", 1.0, 1.0, cap).unwrap(),
                CandidateService::new("b", 1.0, 2.0, None).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_service_scheme_is_valid() {
        let st = two_services(None);
        let order = Order::with_quantity(10).unwrap();
        assert_eq!(
            validate_allocation(&Allocation::new(vec![10, 0]), &st, &order),
            Ok(())
        );
    }

    #[test]
    fn zero_vector_is_rejected() {
        let st = two_services(None);
        let order = Order::with_quantity(10).unwrap();
        assert_eq!(
            validate_allocation(&Allocation::new(vec![0, 0]), &st, &order),
            Err(AllocationViolation::ZeroVector.into())
        );
    }

    #[test]
    fn cap_of_twenty_is_enforced() {
        let st = two_services(Some(20));
        let order = Order::with_quantity(21).unwrap();
        assert_eq!(
            validate_allocation(&Allocation::new(vec![21, 0]), &st, &order),
            Err(AllocationViolation::CapExceeded {
                service: 0,
                count: 21,
                cap: 20
            }
            .into())
        );
    }

    #[test]
    fn wrong_sum_is_rejected() {
        let st = two_services(None);
        let order = Order::with_quantity(10).unwrap();
        assert_eq!(
            validate_allocation(&Allocation::new(vec![4, 5]), &st, &order),
            Err(AllocationViolation::QuantityMismatch { sum: 9, quantity: 10 }.into())
        );
    }

    #[test]
    fn length_mismatch_is_structural() {
        let st = two_services(None);
        let order = Order::with_quantity(10).unwrap();
        let err = validate_allocation(&Allocation::new(vec![10]), &st, &order).unwrap_err();
        assert!(matches!(err, ValidationError::LengthMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn support_lists_selected_services() {
        assert_eq!(support(&Allocation::new(vec![5, 0, 5])), vec![0, 2]);
        assert_eq!(support(&Allocation::new(vec![10, 0])), vec![0]);
        assert_eq!(support(&Allocation::new(vec![3, 3, 4])), vec![0, 1, 2]);
    }

    #[test]
    fn constructors_enforce_invariants() {
        assert!(CandidateService::new("x", 0.0, 1.0, None).is_err());
        assert!(CandidateService::new("x", 1.0, -1.0, None).is_err());
        assert!(CandidateService::new("x", 1.0, 1.0, Some(0)).is_err());
        assert!(SubTask::new("s", vec![]).is_err());
        assert!(TaskSpec::new(vec![]).is_err());
        assert!(Order::with_quantity(0).is_err());
        let dup = vec![
            CandidateService::new("x", 1.0, 1.0, None).unwrap(),
            CandidateService::new("x", 2.0, 1.0, None).unwrap(),
        ];
        assert!(matches!(
            SubTask::new("s", dup),
            Err(DomainError::DuplicateService { .. })
        ));
    }

    #[test]
    fn feasibility_accounts_for_caps() {
        let st = SubTask::new(
            "s",
            vec![
                CandidateService::new("a", 1.0, 1.0, Some(3)).unwrap(),
                CandidateService::new("b", 1.0, 1.0, Some(4)).unwrap(),
            ],
        )
        .unwrap();
        assert!(st.is_feasible(7));
        assert!(!st.is_feasible(8));
    }
}
