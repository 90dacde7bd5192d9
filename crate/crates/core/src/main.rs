use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cmcp_core::cli::{self, config, Algorithm, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "cmcp", version, about = "Service composition experiments for customized production")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm for every seed and write fronts and summaries.
    Run(RunArgs),
    /// Run the fourteen-execution limit sweep (NSGA-II plus twelve PDGA limits).
    Sweep(RunArgs),
    /// Compare two front files of the same instance.
    Compare {
        front_a: PathBuf,
        front_b: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    #[arg(long)]
    limit: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    pop_size: Option<usize>,
    /// Repeatable; replaces the configured seed list.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evolve populations in parallel (output is unchanged).
    #[arg(long)]
    parallel: bool,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = config::load_config(&self.config)?;
        if let Some(a) = self.algorithm {
            if a != cfg.algorithm && self.iterations.is_none() {
                cfg.params.iterations = a.default_iterations();
            }
            cfg.algorithm = a;
        }
        if let Some(limit) = self.limit {
            cfg.params.limit = limit;
        }
        if let Some(n) = self.iterations {
            cfg.params.iterations = n;
        }
        if let Some(n) = self.pop_size {
            cfg.params.pop_size = n;
        }
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if let Some(seed) = cfg.seeds.first() {
            cfg.params.seed = *seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.params.parallel |= self.parallel;
        config::validate(&cfg)?;
        Ok(cfg)
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let cfg = args.load()?;
            for s in cli::run_experiment(&cfg)? {
                println!(
                    "{} seed {}: {} solutions, min time {}, min cost {}, mean services {:.3}, {:.1} ms",
                    s.algorithm,
                    s.seed,
                    s.front_size,
                    s.min_time_total,
                    s.min_cost_total,
                    s.mean_num_total,
                    s.solver_ms
                );
            }
            println!("results in {}", cfg.output_dir.display());
        }
        Command::Sweep(args) => {
            let cfg = args.load()?;
            for r in cli::run_sweep(&cfg)? {
                let limit = r.limit.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
                println!(
                    "execution {:2} {:5} G={:3} limit={:>5}: {:.1} solutions, mean services {:.3}, {:.1} ms",
                    r.execution, r.algorithm, r.iterations, limit, r.mean_front_size, r.mean_num_total, r.mean_solver_ms
                );
            }
            println!("sweep summary in {}", cfg.output_dir.join("sweep_summary.csv").display());
        }
        Command::Compare { front_a, front_b, out } => {
            let report = cli::compare(&front_a, &front_b)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match execute(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
