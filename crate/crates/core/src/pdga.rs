//! Problem-decomposition genetic algorithm.
//!
//! Every sub-task gets its own population of allocations. Each generation
//! assembles one complete solution from the populations (bootstrap pick per
//! population, bottleneck population identified, cheapest fast-enough
//! members elsewhere) and then evolves every population once. The bottleneck
//! population is ranked on (time, cost, num), the others on (cost, num).
//! After the last generation the non-dominated complete solutions are
//! returned.
//!
//! Times used inside a population are the standalone bottleneck time `lt`
//! of the allocation, since the cross-sub-task recursion is not defined for
//! a single population.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Allocation, CompositeSolution, ObjectiveVector, Order, SubTask, TaskSpec};
use crate::error::SolveError;
use crate::evaluation::{eval_counts, objectives_from, SubTaskEval};
use crate::front::{check_instance, select_optimal, FrontMember};
use crate::ranking;
use crate::variation::{offspring, random_allocation, VariationParams};

/// Settings of one optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdgaParams {
    /// Number of generations.
    pub iterations: usize,
    /// Members per population.
    pub pop_size: usize,
    /// Completion-time threshold steering the bootstrap pick.
    pub limit: f64,
    pub variation: VariationParams,
    pub seed: u64,
    /// Evolve populations on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for PdgaParams {
    fn default() -> Self {
        PdgaParams {
            iterations: 100,
            pop_size: 50,
            limit: 0.0,
            variation: VariationParams::default(),
            seed: 0,
            parallel: false,
        }
    }
}

impl PdgaParams {
    pub fn check(&self) -> Result<(), SolveError> {
        if self.iterations == 0 {
            return Err(SolveError::Params {
                name: "iterations",
                reason: "must be at least 1".into(),
            });
        }
        if self.pop_size < 2 {
            return Err(SolveError::Params {
                name: "pop_size",
                reason: "must be at least 2".into(),
            });
        }
        if !(self.limit.is_finite() && self.limit >= 0.0) {
            return Err(SolveError::Params {
                name: "limit",
                reason: format!("{} is not a non-negative time", self.limit),
            });
        }
        self.variation.check()?;
        Ok(())
    }
}

/// An allocation with its cached sub-task figures.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub allocation: Allocation,
    pub eval: SubTaskEval,
}

impl Member {
    pub fn new(allocation: Allocation, st: &SubTask) -> Self {
        let eval = eval_counts(&allocation.counts, st);
        Member { allocation, eval }
    }

    /// Standalone completion time of the sub-task under this allocation.
    pub fn time(&self) -> f64 {
        self.eval.lt
    }
}

/// Population searching the allocations of one sub-task.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPopulation {
    pub subtask_index: usize,
    pub members: Vec<Member>,
}

impl SubPopulation {
    pub fn new(subtask_index: usize, members: Vec<Member>) -> Self {
        SubPopulation {
            subtask_index,
            members,
        }
    }

    pub fn min_time(&self) -> f64 {
        self.members
            .iter()
            .map(Member::time)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_cost(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.eval.cost)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Picks one member by its time against `limit`.
///
/// If even the fastest member reaches the limit, the fastest one is taken.
/// Otherwise the fastest member at or above the limit is taken, and when
/// every member is below the limit the slowest one. Equal times resolve to
/// the earliest position. Returns the member position and its time.
pub fn search_bootstrap(pop: &SubPopulation, limit: f64) -> (usize, f64) {
    let times: Vec<f64> = pop.members.iter().map(Member::time).collect();
    let first_of = |t: f64| times.iter().position(|&x| x == t).unwrap_or(0);
    let min_time = times.iter().copied().fold(f64::INFINITY, f64::min);
    if min_time >= limit {
        return (first_of(min_time), min_time);
    }
    let at_least = times
        .iter()
        .copied()
        .filter(|&t| t >= limit)
        .fold(f64::INFINITY, f64::min);
    if at_least.is_finite() {
        return (first_of(at_least), at_least);
    }
    let max_time = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (first_of(max_time), max_time)
}

/// Member positions chosen for one complete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    /// Chosen member position per population.
    pub picks: Vec<usize>,
    /// Population holding the slowest bootstrap pick.
    pub index: usize,
    /// That pick's time.
    pub max_time: f64,
}

/// Chooses the members forming one complete solution.
///
/// The population with the slowest bootstrap pick keeps that pick; every
/// other population contributes its cheapest member strictly faster than
/// that time (fewer services, then position, break cost ties). When no
/// member is fast enough, the fastest member is used (cheaper first).
pub fn assemble(pops: &[SubPopulation], limit: f64) -> Assembly {
    let mut picks = Vec::with_capacity(pops.len());
    let mut index = 0;
    let mut max_time = f64::NEG_INFINITY;
    for (j, pop) in pops.iter().enumerate() {
        let (pick, time) = search_bootstrap(pop, limit);
        picks.push(pick);
        if time > max_time {
            max_time = time;
            index = j;
        }
    }
    for (m, pop) in pops.iter().enumerate() {
        if m == index {
            continue;
        }
        let faster = pop
            .members
            .iter()
            .enumerate()
            .filter(|(_, x)| x.time() < max_time)
            .min_by(|(a, x), (b, y)| {
                x.eval
                    .cost
                    .total_cmp(&y.eval.cost)
                    .then(x.eval.num.cmp(&y.eval.num))
                    .then(a.cmp(b))
            });
        picks[m] = match faster {
            Some((pos, _)) => pos,
            None => pop
                .members
                .iter()
                .enumerate()
                .min_by(|(a, x), (b, y)| {
                    x.time()
                        .total_cmp(&y.time())
                        .then(x.eval.cost.total_cmp(&y.eval.cost))
                        .then(a.cmp(b))
                })
                .map(|(pos, _)| pos)
                .unwrap_or(0),
        };
    }
    Assembly {
        picks,
        index,
        max_time,
    }
}

/// Builds the complete solution for the current populations and reports
/// which population is the bottleneck.
pub fn generate_complete_solution(
    pops: &[SubPopulation],
    limit: f64,
) -> (CompositeSolution, usize) {
    let assembly = assemble(pops, limit);
    let allocations = assembly
        .picks
        .iter()
        .zip(pops)
        .map(|(&p, pop)| pop.members[p].allocation.clone())
        .collect();
    (CompositeSolution::new(allocations), assembly.index)
}

/// `(time, cost, num)` of a member. The bottleneck population ranks on all
/// three, the others on the last two.
pub fn fitness(member: &Member) -> [f64; 3] {
    let e = &member.eval;
    [e.lt, e.cost, f64::from(e.num)]
}

/// Evolves one population for one generation: offspring by crossover,
/// mutation and repair, union with the parents, and truncation back to
/// `pop_size` by non-dominated rank and crowding distance.
pub fn evolve_population(
    pop: &mut SubPopulation,
    st: &SubTask,
    quantity: u32,
    with_time: bool,
    params: &PdgaParams,
    rng: &mut ChaCha8Rng,
) -> Result<(), SolveError> {
    let parents: Vec<Allocation> = pop.members.iter().map(|m| m.allocation.clone()).collect();
    let kids = offspring(&parents, st, quantity, &params.variation, rng)?;
    let mut union = std::mem::take(&mut pop.members);
    union.extend(kids.into_iter().map(|a| Member::new(a, st)));
    let scores: Vec<[f64; 3]> = union.iter().map(fitness).collect();
    let skip = usize::from(!with_time);
    let rows: Vec<&[f64]> = scores.iter().map(|s| &s[skip..]).collect();
    let keep = ranking::truncate(&rows, params.pop_size);
    let mut slots: Vec<Option<Member>> = union.into_iter().map(Some).collect();
    pop.members = keep
        .into_iter()
        .map(|i| slots[i].take().expect("truncate returns distinct indices"))
        .collect();
    Ok(())
}

/// What one generation produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub solution: CompositeSolution,
    pub objectives: ObjectiveVector,
    pub assembly: Assembly,
}

/// Stepwise driver; [`run`] is the usual entry point.
#[derive(Debug, Clone)]
pub struct Pdga<'a> {
    task: &'a TaskSpec,
    quantity: u32,
    params: PdgaParams,
    pops: Vec<SubPopulation>,
    rngs: Vec<ChaCha8Rng>,
}

/// Independent stream per sub-task, derived from the run seed.
pub(crate) fn population_rng(seed: u64, subtask_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(subtask_index as u64);
    rng
}

impl<'a> Pdga<'a> {
    /// Validates the instance and draws the initial populations.
    pub fn new(task: &'a TaskSpec, order: &Order, params: PdgaParams) -> Result<Self, SolveError> {
        params.check()?;
        check_instance(task, order)?;
        let quantity = order.quantity;
        let mut rngs: Vec<ChaCha8Rng> = (0..task.len())
            .map(|i| population_rng(params.seed, i))
            .collect();
        let pops = task
            .subtasks
            .iter()
            .zip(rngs.iter_mut())
            .enumerate()
            .map(|(i, (st, rng))| {
                let members = (0..params.pop_size)
                    .map(|_| random_allocation(st, quantity, rng).map(|a| Member::new(a, st)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SubPopulation::new(i, members))
            })
            .collect::<Result<Vec<_>, SolveError>>()?;
        Ok(Pdga {
            task,
            quantity,
            params,
            pops,
            rngs,
        })
    }

    pub fn populations(&self) -> &[SubPopulation] {
        &self.pops
    }

    pub fn params(&self) -> &PdgaParams {
        &self.params
    }

    /// Assembles this generation's complete solution, then evolves every
    /// population using the bottleneck index just found.
    pub fn step(&mut self) -> Result<Generation, SolveError> {
        let assembly = assemble(&self.pops, self.params.limit);
        let evals: Vec<SubTaskEval> = assembly
            .picks
            .iter()
            .zip(&self.pops)
            .map(|(&p, pop)| pop.members[p].eval)
            .collect();
        let solution = CompositeSolution::new(
            assembly
                .picks
                .iter()
                .zip(&self.pops)
                .map(|(&p, pop)| pop.members[p].allocation.clone())
                .collect(),
        );
        let objectives = objectives_from(&evals);
        self.iterate(assembly.index)?;
        Ok(Generation {
            solution,
            objectives,
            assembly,
        })
    }

    /// Evolves every population once.
    pub fn iterate(&mut self, index: usize) -> Result<(), SolveError> {
        let task = self.task;
        let quantity = self.quantity;
        let params = self.params;
        let work = |(pop, rng): (&mut SubPopulation, &mut ChaCha8Rng)| {
            let i = pop.subtask_index;
            evolve_population(pop, &task.subtasks[i], quantity, i == index, &params, rng)
        };
        if params.parallel {
            self.pops
                .par_iter_mut()
                .zip(self.rngs.par_iter_mut())
                .try_for_each(work)
        } else {
            self.pops.iter_mut().zip(self.rngs.iter_mut()).try_for_each(work)
        }
    }
}

/// Runs the algorithm and returns the non-dominated complete solutions.
pub fn run(task: &TaskSpec, order: &Order, params: PdgaParams) -> Result<Vec<FrontMember>, SolveError> {
    let mut pdga = Pdga::new(task, order, params)?;
    let mut archive = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        let g = pdga.step()?;
        archive.push(FrontMember {
            solution: g.solution,
            objectives: g.objectives,
        });
    }
    Ok(select_optimal(archive))
}
