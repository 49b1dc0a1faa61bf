//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use recosim::experiment::{acceptance, ExperimentConfig, RunOptions};
use recosim::graph::load_graph;
use recosim::oracle;
use recosim::partition::balanced_semi_matching;

#[derive(Parser)]
#[command(name = "recosim", version, about = "Explore/exploit recommendation experiments on bipartite access graphs")]
struct Cli {
    /// Worker threads for parallel trials (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Output directory for CSV artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-trial (finite) or per-visit (infinite) rows.
        #[arg(long)]
        per_trial: bool,
    },
    /// Run an acceptance suite ("all" runs every suite, "list" lists them).
    Accept {
        /// Suite name.
        suite: String,
    },
    /// Evaluate an exact oracle and print CSV to stdout.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Expected run lengths of red balls among blue ones.
    RunLengths(RunLengthArgs),
    /// Optimal deterministic reward in the planted-item search game.
    SearchGame(SearchGameArgs),
    /// Reward upper bound for degree-power exploration on the lopsided family.
    DegreePowerBound(DegreePowerArgs),
    /// Minimum-makespan semi-matching of a graph file.
    Makespan {
        /// Graph in the plain-text edge format.
        graph: PathBuf,
    },
}

#[derive(Args)]
struct RunLengthArgs {
    #[arg(long)]
    reds: usize,
    #[arg(long)]
    blues: usize,
}

#[derive(Args)]
struct SearchGameArgs {
    #[arg(long)]
    users: usize,
    #[arg(long)]
    items: usize,
}

#[derive(Args)]
struct DegreePowerArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    epsilon: f64,
    /// "exclusive" (per-user items valued) or "shared" (one popular item).
    #[arg(long)]
    placement: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("failed to set thread count: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Run {
            config,
            seed,
            trials,
            out,
            per_trial,
        } => {
            let cfg = ExperimentConfig::load(&config).map_err(|e| e.to_string())?;
            let opts = RunOptions {
                out_dir: out,
                seed,
                trials,
                per_trial,
            };
            let started = std::time::Instant::now();
            let rows =
                recosim::experiment::run_experiment(&cfg, &opts).map_err(|e| e.to_string())?;
            println!("{}", recosim::experiment::AGGREGATE_HEADER);
            for row in &rows {
                println!("{}", row.csv_line());
            }
            eprintln!(
                "{} policies in {:.2}s",
                rows.len(),
                started.elapsed().as_secs_f64()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Accept { suite } => {
            if suite == "list" {
                for name in acceptance::SUITE_NAMES {
                    println!("{name}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            let results = acceptance::run_suite(&suite)?;
            let mut all_pass = true;
            for result in &results {
                println!("{}", result.line());
                all_pass &= result.pass;
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Oracle { which } => {
            run_oracle(which)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_oracle(which: OracleCommand) -> Result<(), String> {
    match which {
        OracleCommand::RunLengths(args) => {
            let table =
                oracle::run_length_table(args.reds, args.blues).map_err(|e| e.to_string())?;
            println!("red_index,expected_run_length");
            for (i, v) in table.per_index.iter().enumerate() {
                println!("{},{}", i + 1, *v.numer() as f64 / *v.denom() as f64);
            }
            println!("# max {} at red index {}", table.max, table.argmax() + 1);
        }
        OracleCommand::SearchGame(args) => {
            let rec = oracle::planted_search_recursion(args.users, args.items)
                .map_err(|e| e.to_string())?;
            let closed = oracle::planted_search_closed_form(args.users, args.items)
                .map_err(|e| e.to_string())?;
            let opt = oracle::planted_search_optimum(args.users, args.items)
                .map_err(|e| e.to_string())?;
            println!("users,items,recursion,closed_form,game_optimum");
            println!("{},{},{rec},{closed},{opt}", args.users, args.items);
        }
        OracleCommand::DegreePowerBound(args) => {
            let placement = match args.placement.as_str() {
                "exclusive" => oracle::LopsidedPlacement::Exclusive,
                "shared" => oracle::LopsidedPlacement::Shared,
                other => {
                    return Err(format!(
                        "placement must be exclusive or shared, got {other}"
                    ))
                }
            };
            let bound = oracle::degree_power_reward_bound(args.n, args.epsilon, placement);
            println!("n,epsilon,placement,reward_bound,ratio_bound");
            println!(
                "{},{},{},{},{}",
                args.n, args.epsilon, args.placement, bound.reward_bound, bound.ratio_bound
            );
        }
        OracleCommand::Makespan { graph } => {
            let g = load_graph(&graph).map_err(|e| e.to_string())?;
            let sm = balanced_semi_matching(&g);
            println!("# makespan {}", sm.max_load);
            print!("{}", sm.to_text());
        }
    }
    Ok(())
}
