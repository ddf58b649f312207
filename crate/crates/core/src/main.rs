use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dot_admm::config::{load_scenario, parse_value_list};
use dot_admm::experiment::{sweep, PreparedScenario, SweepAxis};
use dot_admm::report::{save_curve, save_sweep};
use dot_admm::validate::{run_suite, Level};

#[derive(Parser)]
#[command(version, about = "Simulate DOT-ADMM over unreliable networks")]
struct Cli {
    /// Directory for CSV output.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the scenario's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write curve.csv.
    Run { config: PathBuf },
    /// Rerun a scenario for each value of one knob and write sweep.csv.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Check operator laws and proximal oracles.
    Validate {
        #[arg(long)]
        full: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Theta,
    Delta,
    #[value(name = "slow_nodes")]
    SlowNodes,
    Switches,
}

impl From<Axis> for SweepAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Theta => SweepAxis::Theta,
            Axis::Delta => SweepAxis::Delta,
            Axis::SlowNodes => SweepAxis::SlowNodes,
            Axis::Switches => SweepAxis::Switches,
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> dot_admm::Result<dot_admm::experiment::Scenario> {
    let mut scenario = load_scenario(path)?;
    if let Some(seed) = seed {
        scenario.master_seed = seed;
    }
    Ok(scenario)
}

fn run(cli: &Cli) -> dot_admm::Result<ExitCode> {
    match &cli.command {
        Command::Run { config } => {
            let prepared = PreparedScenario::new(load(config, cli.seed)?)?;
            let result = prepared.run()?;
            let path = save_curve(&cli.out, &result)?;
            println!("scenario:          {}", result.name);
            println!("final mean error:  {:.6e}", result.final_error());
            println!("asymptotic error:  {:.6e}", result.asymptotic_error());
            match result.empirical_rate() {
                Some(fit) => println!("empirical rate:    {:.6}", fit.rate),
                None => println!("empirical rate:    n/a (no linear transient found)"),
            }
            match &result.theory {
                Some(th) => {
                    println!("gamma:             {:.6}", th.rate.gamma);
                    println!("mu:                {:.6}", th.rate.mu);
                    println!("bound asymptote:   {:.6e}", th.rate.asymptote());
                }
                None => println!("mu:                n/a (set theory_bound = true in [metrics])"),
            }
            if result.capped_updates() > 0 {
                println!("capped updates:    {}", result.capped_updates());
            }
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, axis, values } => {
            let values = parse_value_list(values)?;
            let scenario = load(config, cli.seed)?;
            let result = sweep(&scenario, (*axis).into(), &values)?;
            let path = save_sweep(&cli.out, &result)?;
            println!(
                "{:>14}  {:>16}  {:>16}",
                result.axis.to_string(),
                "asymptotic err",
                "inner iters"
            );
            for p in &result.points {
                println!(
                    "{:>14.3e}  {:>16.6e}  {:>16.2}",
                    p.value, p.asymptotic_error, p.mean_inner_iterations
                );
            }
            let verdict = if result.is_strictly_increasing() {
                "strictly increasing"
            } else if result.is_non_decreasing() {
                "non-decreasing"
            } else {
                "not monotone"
            };
            println!("asymptotic error along {}: {verdict}", result.axis);
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { full } => {
            let level = if *full { Level::Full } else { Level::Quick };
            let report = run_suite(level, cli.seed.unwrap_or(1))?;
            print!("{report}");
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
