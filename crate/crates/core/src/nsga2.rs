//! NSGA-II baseline over the monolithic encoding: one genome holds every
//! sub-task's allocation in task order and is ranked on the three totals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{CompositeSolution, ObjectiveVector, Order, TaskSpec};
use crate::error::SolveError;
use crate::evaluation::{eval_counts, objectives_from};
use crate::front::{check_instance, select_optimal, FrontMember};
use crate::pdga::PdgaParams;
use crate::ranking;
use crate::variation::{random_allocation, vary_pair, VariationParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Params {
    pub iterations: usize,
    pub pop_size: usize,
    pub variation: VariationParams,
    pub seed: u64,
    /// Evaluate offspring on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for Nsga2Params {
    fn default() -> Self {
        Nsga2Params {
            iterations: 200,
            pop_size: 50,
            variation: VariationParams::default(),
            seed: 0,
            parallel: false,
        }
    }
}

impl From<&PdgaParams> for Nsga2Params {
    fn from(p: &PdgaParams) -> Self {
        Nsga2Params {
            iterations: p.iterations,
            pop_size: p.pop_size,
            variation: p.variation,
            seed: p.seed,
            parallel: p.parallel,
        }
    }
}

impl Nsga2Params {
    pub fn check(&self) -> Result<(), SolveError> {
        PdgaParams {
            iterations: self.iterations,
            pop_size: self.pop_size,
            limit: 0.0,
            variation: self.variation,
            seed: self.seed,
            parallel: self.parallel,
        }
        .check()
    }
}

/// One genome (all segments) with its totals.
#[derive(Debug, Clone, PartialEq)]
pub struct MonolithicIndividual {
    pub genome: CompositeSolution,
    pub objectives: ObjectiveVector,
}

impl MonolithicIndividual {
    pub fn new(genome: CompositeSolution, task: &TaskSpec) -> Self {
        let evals: Vec<_> = genome
            .allocations
            .iter()
            .zip(&task.subtasks)
            .map(|(a, st)| eval_counts(&a.counts, st))
            .collect();
        MonolithicIndividual {
            objectives: objectives_from(&evals),
            genome,
        }
    }
}

fn tournament(rank: &[usize], crowd: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.gen_range(0..rank.len());
    let b = rng.gen_range(0..rank.len());
    let better = |x: usize, y: usize| rank[x] < rank[y] || (rank[x] == rank[y] && crowd[x] > crowd[y]);
    if better(b, a) {
        b
    } else {
        a
    }
}

fn evaluate_all(genomes: Vec<CompositeSolution>, task: &TaskSpec, parallel: bool) -> Vec<MonolithicIndividual> {
    if parallel {
        genomes
            .into_par_iter()
            .map(|g| MonolithicIndividual::new(g, task))
            .collect()
    } else {
        genomes
            .into_iter()
            .map(|g| MonolithicIndividual::new(g, task))
            .collect()
    }
}

/// Final population of a run, before front extraction.
pub fn evolve(
    task: &TaskSpec,
    order: &Order,
    params: &Nsga2Params,
) -> Result<Vec<MonolithicIndividual>, SolveError> {
    params.check()?;
    check_instance(task, order)?;
    let quantity = order.quantity;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let initial = (0..params.pop_size)
        .map(|_| {
            task.subtasks
                .iter()
                .map(|st| random_allocation(st, quantity, &mut rng))
                .collect::<Result<Vec<_>, _>>()
                .map(CompositeSolution::new)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut pop = evaluate_all(initial, task, params.parallel);

    for _ in 0..params.iterations {
        let fitness: Vec<[f64; 3]> = pop.iter().map(|x| x.objectives.to_array()).collect();
        let (rank, crowd) = ranking::rank_and_crowding(&fitness);
        let mating: Vec<usize> = (0..params.pop_size)
            .map(|_| tournament(&rank, &crowd, &mut rng))
            .collect();

        let mut children = Vec::with_capacity(params.pop_size + 1);
        for pair in mating.chunks(2) {
            let (a, b) = match *pair {
                [a, b] => (a, b),
                [a] => (a, mating[rng.gen_range(0..mating.len())]),
                _ => unreachable!(),
            };
            let (pa, pb) = (&pop[a].genome, &pop[b].genome);
            let mut left = Vec::with_capacity(task.len());
            let mut right = Vec::with_capacity(task.len());
            for (i, st) in task.subtasks.iter().enumerate() {
                let (c1, c2) = vary_pair(
                    &pa.allocations[i],
                    &pb.allocations[i],
                    st,
                    quantity,
                    &params.variation,
                    &mut rng,
                )?;
                left.push(c1);
                right.push(c2);
            }
            children.push(CompositeSolution::new(left));
            children.push(CompositeSolution::new(right));
        }
        children.truncate(params.pop_size);

        let offspring = evaluate_all(children, task, params.parallel);
        let mut union = std::mem::take(&mut pop);
        union.extend(offspring);
        let fitness: Vec<[f64; 3]> = union.iter().map(|x| x.objectives.to_array()).collect();
        let keep = ranking::truncate(&fitness, params.pop_size);
        let mut slots: Vec<Option<MonolithicIndividual>> = union.into_iter().map(Some).collect();
        pop = keep
            .into_iter()
            .map(|i| slots[i].take().expect("truncate returns distinct indices"))
            .collect();
    }
    Ok(pop)
}

/// Runs NSGA-II and returns the non-dominated solutions of the final
/// population, one per distinct objective vector.
pub fn run_nsga2(task: &TaskSpec, order: &Order, params: &Nsga2Params) -> Result<Vec<FrontMember>, SolveError> {
    let pop = evolve(task, order, params)?;
    Ok(select_optimal(
        pop.into_iter()
            .map(|x| FrontMember {
                solution: x.genome,
                objectives: x.objectives,
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{validate_solution, CandidateService, SubTask};
    use crate::evaluation::total_objectives;
    use crate::front::is_mutually_non_dominated;

    fn task() -> (TaskSpec, Order) {
        let st = |id: &str, tc: &[(f64, f64)]| {
            SubTask::new(
                id,
                tc.iter()
                    .enumerate()
                    .map(|(j, &(t, c))| CandidateService::new(format!("{id}-{j}"), t, c, None).unwrap())
                    .collect(),
            )
            .unwrap()
        };
        (
            TaskSpec::new(vec![
                st("a", &[(1.0, 2.0), (2.0, 1.0)]),
                st("b", &[(3.0, 1.0), (1.0, 3.0), (2.0, 2.0)]),
            ])
            .unwrap(),
            Order::with_quantity(9).unwrap(),
        )
    }

    #[test]
    fn front_is_feasible_and_consistent_with_evaluation() {
        let (task, order) = task();
        let params = Nsga2Params {
            iterations: 20,
            pop_size: 12,
            seed: 4,
            ..Nsga2Params::default()
        };
        let front = run_nsga2(&task, &order, &params).unwrap();
        assert!(is_mutually_non_dominated(&front));
        for m in &front {
            validate_solution(&m.solution, &task, &order).unwrap();
            assert_eq!(total_objectives(&m.solution, &task).unwrap(), m.objectives);
        }
    }

    #[test]
    fn identity_variation_keeps_initial_front() {
        let (task, order) = task();
        let params = Nsga2Params {
            iterations: 1,
            pop_size: 10,
            seed: 8,
            variation: VariationParams {
                pr_c: 0.0,
                pr_m: 0.0,
                ..VariationParams::default()
            },
            ..Nsga2Params::default()
        };
        assert!(evolve(&task, &order, &Nsga2Params { iterations: 0, ..params }).is_err());
        // Rebuild the initial population from the same stream.
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let init: Vec<MonolithicIndividual> = (0..params.pop_size)
            .map(|_| {
                let g = task
                    .subtasks
                    .iter()
                    .map(|st| random_allocation(st, order.quantity, &mut rng).unwrap())
                    .collect();
                MonolithicIndividual::new(CompositeSolution::new(g), &task)
            })
            .collect();
        let initial_front: Vec<_> = select_optimal(
            init.into_iter()
                .map(|x| FrontMember {
                    solution: x.genome,
                    objectives: x.objectives,
                })
                .collect(),
        )
        .iter()
        .map(|m| m.objectives.key())
        .collect();
        let got = run_nsga2(&task, &order, &params).unwrap();
        assert!(!got.is_empty());
        for m in &got {
            assert!(initial_front.contains(&m.objectives.key()));
        }
    }

    #[test]
    fn parallel_evaluation_is_deterministic() {
        let (task, order) = task();
        let base = Nsga2Params {
            iterations: 15,
            pop_size: 10,
            seed: 21,
            ..Nsga2Params::default()
        };
        let a = run_nsga2(&task, &order, &base).unwrap();
        let b = run_nsga2(&task, &order, &Nsga2Params { parallel: true, ..base }).unwrap();
        assert_eq!(a, b);
    }
}
