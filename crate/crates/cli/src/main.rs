use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use platoon_cli::commands::{self, SimulateOptions, SweepOptions};
use platoon_cli::{resolve, Preset};

/// Virtual-target guidance platoon simulator.
///
/// Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 parse or
/// validation error, 4 domain error, 5 numerical blow-up, 6 verification
/// mismatch.
#[derive(Parser)]
#[command(name = "platoon", version, about, long_about)]
struct Cli {
    /// Built-in scenario used instead of --scenario.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,

    /// Scenario document (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario; writes trajectory.csv and summary.json.
    Simulate {
        /// Also linearize about the sine-law equilibrium.
        #[arg(long)]
        linearize: bool,
    },
    /// Spectrum of the sine-law platoon at its on-path equilibrium.
    Linearize {
        /// Platoon length, defaulting to the scenario's.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Equilibrium residuals of both laws and the regular-law offsets.
    Equilibrium,
    /// Steady offsets of both laws over a range of d*/2R.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.05)]
    ratio_min: f64,
    #[arg(long, default_value_t = 0.95)]
    ratio_max: f64,
    #[arg(long, default_value_t = 19)]
    steps: usize,
    /// Measure offsets by simulation instead of solving for the steady turn.
    #[arg(long)]
    simulate: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(cli.preset, cli.scenario.as_deref()).and_then(|scenario| match cli.command {
        Command::Simulate { linearize } => commands::simulate(
            &scenario,
            &SimulateOptions {
                out: cli.out.clone(),
                linearize,
            },
        ),
        Command::Linearize { n } => commands::linearize_cmd(&scenario, n, cli.out.as_deref()),
        Command::Equilibrium => commands::equilibrium_cmd(&scenario, cli.out.as_deref()),
        Command::Sweep(a) => commands::sweep_cmd(
            &scenario,
            &SweepOptions {
                ratio_min: a.ratio_min,
                ratio_max: a.ratio_max,
                steps: a.steps,
                simulate: a.simulate,
                out: cli.out.clone(),
            },
        ),
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
