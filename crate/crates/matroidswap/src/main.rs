use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use matroidswap::cli::{
    self, cmd_bench, cmd_check_oracle, cmd_oracle, cmd_rpe, cmd_solve, cmd_verify, SolveOptions,
};

/// Prioritized Lorenz dominating allocations for matroid rank valuations.
#[derive(Parser)]
#[command(name = "matroidswap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an allocation with the Yankee Swap algorithm.
    Solve {
        /// Instance JSON file.
        instance: PathBuf,
        /// JSON array of agent ids, highest priority first (overrides the
        /// instance's priority).
        #[arg(long)]
        priority_file: Option<PathBuf>,
        /// Draw the priority permutation from this seed instead.
        #[arg(long, conflicts_with = "priority_file")]
        seed_priority: Option<u64>,
        /// Include the full iteration trace in the output.
        #[arg(long)]
        trace: bool,
        /// Validate every valuation as a matroid rank function first
        /// (exit 3 on failure).
        #[arg(long)]
        check_oracles: bool,
        /// Write the final allocation's exchange graph as `g -> g'` lines.
        #[arg(long, value_name = "PATH")]
        dump_exchange_graph: Option<PathBuf>,
    },
    /// Check fairness/efficiency properties of an allocation.
    Verify {
        /// Instance JSON file.
        instance: PathBuf,
        /// Allocation JSON file (e.g. the output of `solve`).
        allocation: PathBuf,
        /// Comma-separated checks: clean,ef1,efx,cmms,max-usw,mnw,leximin,
        /// lorenz,lorenz-plain. Defaults to everything feasible.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Brute-force optimal allocations on guard-sized instances.
    Oracle {
        /// Instance JSON file.
        instance: PathBuf,
        /// One of max-usw, mnw, leximin, lorenz.
        #[arg(long, default_value = "lorenz")]
        objective: String,
    },
    /// Run the benchmark harness.
    Bench {
        /// Benchmark config JSON; defaults to square sizes 50/100/200 on the
        /// partition family.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write per-run records (including wall-clock time) as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo for the randomized-priority mechanism.
    Rpe {
        /// Instance JSON file.
        instance: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Validate the matroid-rank axioms of every valuation.
    CheckOracle {
        /// Instance JSON file.
        instance: PathBuf,
        /// auto, exhaustive or sampled.
        #[arg(long, default_value = "auto")]
        mode: String,
        /// Sample count for sampled mode.
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            instance,
            priority_file,
            seed_priority,
            trace,
            check_oracles,
            dump_exchange_graph,
        } => cmd_solve(&SolveOptions {
            instance,
            priority_file,
            seed_priority,
            trace,
            check_oracles,
            dump_exchange_graph,
        }),
        Command::Verify {
            instance,
            allocation,
            checks,
        } => cmd_verify(&instance, &allocation, checks.as_deref()),
        Command::Oracle { instance, objective } => cmd_oracle(&instance, &objective),
        Command::Bench { config, csv } => cmd_bench(config.as_deref(), csv.as_deref()),
        Command::Rpe {
            instance,
            samples,
            seed,
        } => cmd_rpe(&instance, samples, seed),
        Command::CheckOracle {
            instance,
            mode,
            trials,
            seed,
        } => cmd_check_oracle(&instance, &mode, trials, seed),
    };
    match result {
        Ok(output) => {
            print!("{}", output.stdout);
            ExitCode::from(output.code as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::error_exit_code(&err) as u8)
        }
    }
}
