use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use apnet::cli::{self, Overrides, ScenarioSource};

#[derive(Parser)]
#[command(
    name = "apnet",
    version,
    about = "Simulate and analyze active-passive sensing networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write the trajectory as CSV
    Simulate {
        #[command(flatten)]
        source: Source,
        /// CSV file to write the trajectory to
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
        /// Override the integration step
        #[arg(long, value_name = "SECONDS")]
        dt: Option<f64>,
        /// Override the simulated duration
        #[arg(long, value_name = "SECONDS")]
        duration: Option<f64>,
    },
    /// Evaluate the ultimate bound on the consensus error
    Bound {
        #[command(flatten)]
        source: Source,
        /// CSV file to write the trajectory (with bound column) to
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
        /// Override the integration step
        #[arg(long, value_name = "SECONDS")]
        dt: Option<f64>,
        /// Override the simulated duration
        #[arg(long, value_name = "SECONDS")]
        duration: Option<f64>,
    },
    /// Run the randomized property checks
    Verify {
        /// Number of random trials per property
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Seed for the random streams
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Name of a built-in scenario
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Path to a scenario JSON file
    #[arg(long, value_name = "FILE")]
    scenario: Option<PathBuf>,
}

impl From<Source> for ScenarioSource {
    fn from(source: Source) -> Self {
        match (source.builtin, source.scenario) {
            (Some(name), None) => ScenarioSource::Builtin(name),
            (None, Some(path)) => ScenarioSource::File(path),
            _ => unreachable!("clap enforces exactly one source"),
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("APNET_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            source,
            output,
            dt,
            duration,
        } => cli::cmd_simulate(&source.into(), output.as_ref(), Overrides { dt, duration }),
        Command::Bound {
            source,
            output,
            dt,
            duration,
        } => cli::cmd_bound(&source.into(), output.as_ref(), Overrides { dt, duration }),
        Command::Verify { trials, seed } => cli::cmd_verify(trials as usize, seed),
    };
    match result {
        Ok(report) => print!("{report}"),
        Err(error) => {
            eprintln!("error: {error}");
            std::process::exit(error.exit_code());
        }
    }
}
