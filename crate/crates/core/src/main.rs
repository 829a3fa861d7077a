//! Command-line driver: `run` executes a scenario file, `prop-check`
//! runs the randomized invariant suites, `bench` times single solves.

use clap::{Parser, Subcommand};
use crs::baselines::{solve_strategy, Strategy};
use crs::channel::{generate_channels, snr_db_to_power, SystemConfig};
use crs::harness::{checks, load_scenario, HarnessError, Protocol, RunOptions};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "crs",
    version,
    about = "Max-min fair cooperative rate-splitting simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and emit CSV and an SVG plot.
    Run {
        /// Scenario TOML file.
        scenario: PathBuf,
        /// Output directory; defaults to $CRS_OUT_DIR, then the
        /// current directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Record wall-clock solve times in the ms column. Off by
        /// default so repeated runs emit byte-identical CSV.
        #[arg(long)]
        timing: bool,
        /// Skip the SVG plot.
        #[arg(long)]
        no_plot: bool,
    },
    /// Run the randomized invariant suites.
    PropCheck {
        /// Sample count for the sampling-based suites.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
    /// Time single solves of every strategy on one reference instance.
    Bench {
        #[arg(long, default_value_t = 3)]
        users: usize,
        #[arg(long, default_value_t = 2)]
        antennas: usize,
        #[arg(long, default_value_t = 20.0)]
        snr_db: f64,
        /// Solves per strategy (distinct seeded channels).
        #[arg(long, default_value_t = 3)]
        repeats: u64,
    },
}

/// Exit code categories: 2 bad input, 3 solver failure, 4 output I/O.
fn exit_code(error: &HarnessError) -> i32 {
    match error {
        HarnessError::Scenario(_) | HarnessError::Config(_) | HarnessError::Parse(_) => 2,
        HarnessError::Selection(_) | HarnessError::Solve(_) => 3,
        HarnessError::Io(_) | HarnessError::EmptyReport => 4,
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenario,
            out_dir,
            timing,
            no_plot,
        } => run_command(&scenario, out_dir, timing, no_plot),
        Command::PropCheck { samples } => prop_check_command(samples),
        Command::Bench {
            users,
            antennas,
            snr_db,
            repeats,
        } => bench_command(users, antennas, snr_db, repeats),
    };
    std::process::exit(code);
}

fn run_command(
    scenario_path: &PathBuf,
    out_dir: Option<PathBuf>,
    timing: bool,
    no_plot: bool,
) -> i32 {
    let out_dir = out_dir
        .or_else(|| std::env::var_os("CRS_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let result = (|| -> Result<(), HarnessError> {
        let scenario = load_scenario(scenario_path)?;
        let report = crs::harness::run_scenario(&scenario, &RunOptions { timing })?;
        std::fs::create_dir_all(&out_dir)?;
        let stem = scenario.name.clone().unwrap_or_else(|| "report".into());
        let csv_path = out_dir.join(format!("{stem}.csv"));
        report.emit_csv(&csv_path)?;
        println!("wrote {}", csv_path.display());
        if !no_plot {
            let svg_path = out_dir.join(format!("{stem}.svg"));
            report.emit_plot(&svg_path)?;
            println!("wrote {}", svg_path.display());
        }
        println!(
            "{} rows, {} failed solves",
            report.rows.len(),
            report.failures
        );
        for (a, b) in [
            (Strategy::CrsSca, Strategy::Nrs),
            (Strategy::CrsSca, Strategy::Sdma),
            (Strategy::CrsSca, Strategy::CrsGrid),
            (Strategy::Nrs, Strategy::Sdma),
        ] {
            if let Some(gain) = report.gain_percent(a, b) {
                println!("mean gain {a} over {b}: {gain:.1}%");
            }
        }
        Ok(())
    })();

    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn prop_check_command(samples: usize) -> i32 {
    let outcomes = checks::run_all(samples);
    for outcome in &outcomes {
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", outcome.name, outcome.detail);
    }
    if checks::all_passed(&outcomes) {
        println!("all {} suites passed", outcomes.len());
        0
    } else {
        1
    }
}

fn bench_command(users: usize, antennas: usize, snr_db: f64, repeats: u64) -> i32 {
    let config = SystemConfig::new(users, antennas, snr_db_to_power(snr_db));
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return 2;
    }
    println!("K={users} N_t={antennas} SNR={snr_db} dB, {repeats} solves per strategy");
    for strategy in Strategy::ALL {
        let mut total_ms = 0.0_f64;
        let mut total_iterations = 0usize;
        let mut failed = 0usize;
        for seed in 0..repeats {
            let channels = generate_channels(&config, 1 + seed);
            let grouping = if strategy.cooperative() {
                match Protocol::OneBest.select_grouping(&channels, &config, strategy, seed) {
                    Ok(g) => Some(g),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return 3;
                    }
                }
            } else {
                None
            };
            let started = Instant::now();
            match solve_strategy(strategy, &channels, grouping.as_ref(), &config) {
                Ok(solution) => {
                    total_ms += started.elapsed().as_secs_f64() * 1e3;
                    total_iterations += solution.iterations;
                }
                Err(_) => failed += 1,
            }
        }
        let solved = repeats as usize - failed;
        if solved == 0 {
            println!("{strategy:>8}: all solves failed");
            continue;
        }
        println!(
            "{:>8}: {:8.1} ms/solve, {:5.1} iterations/solve, {failed} failures",
            strategy.to_string(),
            total_ms / solved as f64,
            total_iterations as f64 / solved as f64
        );
    }
    0
}
