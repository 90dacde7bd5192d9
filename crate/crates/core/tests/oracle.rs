use cmcp_core::oracle::{enumerate_solutions, exact_pareto_front, DEFAULT_BUDGET};
use cmcp_core::ranking::dominates;
use cmcp_core::{
    run_nsga2, run_pdga, total_objectives, Allocation, CandidateService, CompositeSolution, Nsga2Params, Order,
    PdgaParams, SubTask, TaskSpec,
};

/// Two sub-tasks, two services each; every unit takes one time unit, the
/// first service costs 1 and the second 2.
fn toy(quantity: u32) -> (TaskSpec, Order) {
    let st = |id: &str| {
        SubTask::new(
            id,
            vec![
                CandidateService::new(format!("{id}a"), 1.0, 1.0, None).unwrap(),
                CandidateService::new(format!("{id}b"), 1.0, 2.0, None).unwrap(),
            ],
        )
        .unwrap()
    };
    (TaskSpec::new(vec![st("x"), st("y")]).unwrap(), Order::with_quantity(quantity).unwrap())
}

fn plan(a: [u32; 2], b: [u32; 2]) -> CompositeSolution {
    CompositeSolution::new(vec![Allocation::new(a.to_vec()), Allocation::new(b.to_vec())])
}

#[test]
fn toy_front_has_both_corners() {
    let (task, order) = toy(10);
    let front = exact_pareto_front(&task, &order, DEFAULT_BUDGET).unwrap();
    let objs: Vec<[f64; 3]> = front.iter().map(|m| m.objectives.to_array()).collect();

    // Everything on the cheap service: LT = 10, UT = 1, total = 10 + 1.
    let cheap = total_objectives(&plan([10, 0], [10, 0]), &task).unwrap();
    assert_eq!(cheap.to_array(), [11.0, 20.0, 2.0]);
    assert!(objs.contains(&cheap.to_array()));

    // Even split halves the stage time: LT = 5, total = 5 + 1.
    let fast = total_objectives(&plan([5, 5], [5, 5]), &task).unwrap();
    assert_eq!(fast.to_array(), [6.0, 30.0, 4.0]);
    assert!(objs.contains(&fast.to_array()));

    let min_cost = objs.iter().map(|o| o[1]).fold(f64::INFINITY, f64::min);
    let min_time = objs.iter().map(|o| o[0]).fold(f64::INFINITY, f64::min);
    assert_eq!((min_cost, min_time), (20.0, 6.0));
}

#[test]
fn tiny_enumeration_count() {
    // q = 2 over two services: [2,0], [1,1], [0,2] per sub-task.
    let (task, order) = toy(2);
    assert_eq!(enumerate_solutions(&task, &order, DEFAULT_BUDGET).unwrap().len(), 9);
}

#[test]
fn front_matches_brute_force_peeling() {
    let (task, order) = toy(6);
    let all = enumerate_solutions(&task, &order, DEFAULT_BUDGET).unwrap();
    let mut want: Vec<[f64; 3]> = all
        .iter()
        .map(|m| m.objectives.to_array())
        .filter(|v| !all.iter().any(|o| dominates(&o.objectives.to_array(), v).unwrap()))
        .collect();
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    want.dedup();
    let got: Vec<[f64; 3]> = exact_pareto_front(&task, &order, DEFAULT_BUDGET)
        .unwrap()
        .iter()
        .map(|m| m.objectives.to_array())
        .collect();
    assert_eq!(got, want);
}

#[test]
fn solvers_never_beat_the_oracle() {
    let (task, order) = toy(6);
    let exact = exact_pareto_front(&task, &order, DEFAULT_BUDGET).unwrap();
    let pdga = run_pdga(&task, &order, PdgaParams { iterations: 60, pop_size: 20, ..Default::default() }).unwrap();
    let nsga = run_nsga2(&task, &order, &Nsga2Params { iterations: 60, pop_size: 20, ..Default::default() }).unwrap();
    for m in pdga.iter().chain(&nsga) {
        for e in &exact {
            assert!(!dominates(&m.objectives.to_array(), &e.objectives.to_array()).unwrap());
        }
    }
    // NSGA-II reaches both corners of this small front.
    let corner = |k: usize| exact.iter().map(|e| e.objectives.to_array()[k]).fold(f64::INFINITY, f64::min);
    let reach = |k: usize| nsga.iter().map(|e| e.objectives.to_array()[k]).fold(f64::INFINITY, f64::min);
    assert_eq!(reach(0), corner(0));
    assert_eq!(reach(1), corner(1));
}

#[test]
fn budget_is_enforced() {
    let (task, order) = toy(10);
    assert!(exact_pareto_front(&task, &order, 50).is_err());
}
