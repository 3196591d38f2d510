use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hostsort::output;
use hostsort::scenario::{
    emit_utility_curves, load_scenario, run_scenario, run_sweep, ScenarioError,
};

#[derive(Parser)]
#[command(
    name = "hostsort",
    about = "Equilibrium solvers and tenant-sorting simulation for building-level \
             short-term-rental externalities",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Write CSV files (plus summary.json) into the output directory.
    Csv,
    /// Print the JSON summary to stdout; write nothing.
    Summary,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the closed regimes and compare their welfare.
    Solve(CommonArgs),
    /// Run the agent-based sorting simulation (requires an [abm] block).
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Override the seed in the scenario's [abm] block.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the scenario's comparative-statics sweep.
    Sweep(CommonArgs),
    /// Emit host vs. non-host utility curves over a theta grid.
    Curves {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of theta grid points.
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Load and validate a scenario file, then exit.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Solve(args) => {
            let scenario = load_scenario(&args.scenario)?;
            let mut solve_only = scenario.clone();
            solve_only.abm = None;
            let outcome = run_scenario(&solve_only, None)?;
            match args.format {
                Format::Csv => {
                    write_file(&args.out, "equilibria.csv", &output::equilibria_csv(&outcome))?;
                    write_file(&args.out, "summary.json", &output::summary_json(&outcome))?;
                    println!("wrote {}", args.out.join("equilibria.csv").display());
                }
                Format::Summary => print!("{}", output::summary_json(&outcome)),
            }
        }
        Command::Simulate { common, seed } => {
            let scenario = load_scenario(&common.scenario)?;
            if scenario.abm.is_none() {
                return Err(ScenarioError::Constraint(
                    "simulate requires an [abm] block in the scenario".into(),
                ));
            }
            let outcome = run_scenario(&scenario, seed)?;
            let abm = outcome.abm.as_ref().expect("abm block present");
            match common.format {
                Format::Csv => {
                    let name = format!("trajectory_{}.csv", abm.final_state.rng_seed);
                    write_file(&common.out, &name, &output::trajectory_csv(abm))?;
                    write_file(&common.out, "summary.json", &output::summary_json(&outcome))?;
                    println!("wrote {}", common.out.join(&name).display());
                }
                Format::Summary => print!("{}", output::summary_json(&outcome)),
            }
        }
        Command::Sweep(args) => {
            let scenario = load_scenario(&args.scenario)?;
            let table = run_sweep(&scenario)?;
            match args.format {
                Format::Csv => {
                    write_file(&args.out, "sweep.csv", &output::sweep_csv(&table))?;
                    println!("wrote {}", args.out.join("sweep.csv").display());
                }
                Format::Summary => {
                    let mut s =
                        serde_json::to_string_pretty(&table).expect("sweep table serializes");
                    s.push('\n');
                    print!("{s}");
                }
            }
        }
        Command::Curves { common, grid } => {
            let scenario = load_scenario(&common.scenario)?;
            let points = emit_utility_curves(&scenario, grid)?;
            match common.format {
                Format::Csv => {
                    write_file(
                        &common.out,
                        "utility_curves.csv",
                        &output::utility_curves_csv(&points),
                    )?;
                    println!("wrote {}", common.out.join("utility_curves.csv").display());
                }
                Format::Summary => {
                    let mut s =
                        serde_json::to_string_pretty(&points).expect("curve points serialize");
                    s.push('\n');
                    print!("{s}");
                }
            }
        }
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            println!(
                "ok: {} buildings x {} tenants, c*n = {}",
                s.market.num_buildings,
                s.market.tenants_per_building,
                s.market.social_cost()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
