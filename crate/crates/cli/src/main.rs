//! Command-line interface for computing capacity bounds and simulating
//! rebound protocols over finite-dimensional channel collections.
//!
//! Every command emits a JSON report to stdout (or `--out`). Reports are
//! byte-stable for fixed inputs, flags, and `--seed`; pass `--timing` to
//! include wall-clock time. Exit codes: 0 success, 1 validation or solver
//! failure, 2 parse or I/O failure.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use rebound_cli::commands::{self, BoundsArgs, ThetaHatStrategyArg};
use rebound_cli::CliError;
use rebound_cli::report::Report;
use rebound_core::capacity::PriorMode;

#[derive(Parser)]
#[command(
    name = "rebound",
    version,
    about = "Capacity bounds and protocol simulation for quantum channel collections"
)]
struct Cli {
    /// Cap worker threads (overrides the REBOUND_THREADS variable).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock time in the report (reports are byte-stable
    /// without it).
    #[arg(long, global = true)]
    timing: bool,
    /// Seed for randomized searches; recorded in the report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PriorModeArg {
    Iid,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ThetaHatArg {
    Mixture,
    Grid,
    Supplied,
}

#[derive(Subcommand)]
enum Command {
    /// Check a file's objects against their construction tolerances.
    Validate {
        path: PathBuf,
        /// Re-emit the parsed object in canonical form.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Capacity bounds for a collection (give --env and/or --group).
    Bounds {
        collection: PathBuf,
        /// Environment parametrization file.
        #[arg(long)]
        env: Option<PathBuf>,
        /// Seizure data file (needs --env).
        #[arg(long)]
        seize: Option<PathBuf>,
        /// Group file declaring the collection jointly covariant in file order.
        #[arg(long)]
        group: Option<PathBuf>,
        /// Also evaluate the finite-blocklength bound at this error.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Blocklength for the finite-blocklength bound.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Certificate gap for the Holevo iteration.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = PriorModeArg::Iid)]
        prior_mode: PriorModeArg,
        #[arg(long, value_enum, default_value_t = ThetaHatArg::Mixture)]
        theta_hat_strategy: ThetaHatArg,
        /// State files used by --theta-hat-strategy supplied.
        #[arg(long)]
        theta_hat: Vec<PathBuf>,
        /// Random candidate count for --theta-hat-strategy grid.
        #[arg(long, default_value_t = 8)]
        grid_count: usize,
    },
    /// ε-hypothesis-testing divergence between two state files.
    Dhe {
        state1: PathBuf,
        state2: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Register names carrying a classical label; adds the block-diagonal
        /// evaluation and its agreement with the dense path.
        #[arg(long)]
        classical: Vec<String>,
    },
    /// Run a rebound protocol against a collection and codebook.
    Simulate {
        protocol: PathBuf,
        collection: PathBuf,
        codebook: PathBuf,
        /// Environment file: also reduce the protocol to a POVM on the
        /// environment states and report the identity deviation.
        #[arg(long)]
        reduce: Option<PathBuf>,
    },
    /// One-design / covariance checks; optionally build a jointly covariant
    /// collection from a base channel.
    Covariance {
        group: PathBuf,
        #[arg(long)]
        collection: Option<PathBuf>,
        /// Which collection member is the base channel for --build.
        #[arg(long)]
        base_label: Option<String>,
        #[arg(long)]
        build: bool,
        /// Write the built collection here.
        #[arg(long)]
        dump_collection: Option<PathBuf>,
    },
    /// Shorthand for `simulate --reduce`.
    Reduce {
        protocol: PathBuf,
        collection: PathBuf,
        codebook: PathBuf,
        #[arg(long)]
        env: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("REBOUND_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(k) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
    let started = Instant::now();

    let command_name = match &cli.command {
        Command::Validate { .. } => "validate",
        Command::Bounds { .. } => "bounds",
        Command::Dhe { .. } => "dhe",
        Command::Simulate { .. } => "simulate",
        Command::Covariance { .. } => "covariance",
        Command::Reduce { .. } => "reduce",
    };
    let mut report = Report::new(command_name);

    let outcome = run(&cli, &mut report);
    let exit = match outcome {
        Ok((results, exit)) => {
            report.results = results;
            if cli.timing {
                report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
            }
            if let Err(e) = report.emit(cli.out.as_deref()) {
                eprintln!("rebound: cannot write report: {e}");
                std::process::exit(2);
            }
            exit
        }
        Err(e) => {
            eprintln!("rebound: {}", e.message);
            e.exit_code
        }
    };
    std::process::exit(exit);
}

fn run(cli: &Cli, report: &mut Report) -> Result<(serde_json::Value, i32), CliError> {
    match &cli.command {
        Command::Validate { path, dump } => commands::cmd_validate(path, dump.as_deref(), report),
        Command::Bounds {
            collection,
            env,
            seize,
            group,
            epsilon,
            n,
            tol,
            prior_mode,
            theta_hat_strategy,
            theta_hat,
            grid_count,
        } => {
            report.seed = Some(cli.seed);
            let args = BoundsArgs {
                collection,
                env: env.as_deref(),
                seize: seize.as_deref(),
                group: group.as_deref(),
                epsilon: *epsilon,
                n: *n,
                tol: *tol,
                prior_mode: match prior_mode {
                    PriorModeArg::Iid => PriorMode::Iid,
                    PriorModeArg::General => PriorMode::General,
                },
                theta_hat_strategy: match theta_hat_strategy {
                    ThetaHatArg::Mixture => ThetaHatStrategyArg::Mixture,
                    ThetaHatArg::Grid => ThetaHatStrategyArg::Grid,
                    ThetaHatArg::Supplied => ThetaHatStrategyArg::Supplied,
                },
                theta_hat,
                grid_count: *grid_count,
                seed: cli.seed,
            };
            commands::cmd_bounds(&args, report)
        }
        Command::Dhe { state1, state2, epsilon, classical } => {
            commands::cmd_dhe(state1, state2, *epsilon, classical, report)
        }
        Command::Simulate { protocol, collection, codebook, reduce } => {
            commands::cmd_simulate(protocol, collection, codebook, reduce.as_deref(), report)
        }
        Command::Covariance { group, collection, base_label, build, dump_collection } => {
            commands::cmd_covariance(
                group,
                collection.as_deref(),
                base_label.as_deref(),
                *build,
                dump_collection.as_deref(),
                report,
            )
        }
        Command::Reduce { protocol, collection, codebook, env } => {
            commands::cmd_simulate(protocol, collection, codebook, Some(env), report)
        }
    }
}
