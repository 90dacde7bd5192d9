//! Runs PDGA (several limits) and NSGA-II on the bundled clothing instance
//! and prints one line per run.
//!
//! cargo run --release --example case_study -- [seeds]

use cmcp_core::cli::{config, solve, Algorithm};
use cmcp_core::PdgaParams;

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let cfg = config::clothing();
    let runs = [
        (Algorithm::Pdga, 100, 0.0),
        (Algorithm::Pdga, 100, 30000.0),
        (Algorithm::Pdga, 100, 60000.0),
        (Algorithm::Nsga2, 200, 0.0),
    ];
    for (algorithm, iterations, limit) in runs {
        for seed in 0..seeds {
            let params = PdgaParams {
                iterations,
                limit,
                seed,
                ..cfg.params
            };
            let out = solve(&cfg.task, &cfg.order, algorithm, params).expect("solver runs");
            let n = out.front.len() as f64;
            let min_time = out.front.iter().map(|m| m.objectives.time_total).fold(f64::INFINITY, f64::min);
            let min_cost = out.front.iter().map(|m| m.objectives.cost_total).fold(f64::INFINITY, f64::min);
            let mean_num = out.front.iter().map(|m| f64::from(m.objectives.num_total)).sum::<f64>() / n;
            let cheapest_lean = out
                .front
                .iter()
                .any(|m| (m.objectives.cost_total - 30100.0).abs() < 1e-6 && m.objectives.num_total == 6);
            println!(
                "{algorithm:5} limit={limit:>7} seed={seed}: size={:3} min_time={min_time:9.1} min_cost={min_cost:9.1} mean_num={mean_num:6.2} cost30100/6={cheapest_lean} {:.0} ms",
                out.front.len(),
                out.solver_ms
            );
        }
    }
}
