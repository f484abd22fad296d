//! `floodwall` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid usage or input, 3 solver failure,
//! 4 file or parse failure.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use floodwall::Mode;

#[derive(Debug, Parser)]
#[command(name = "floodwall", version, about = "Flood wall placement by simulation-based optimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the unmitigated scenario and write its maximum depth.
    Simulate {
        #[command(flatten)]
        source: ScenarioSource,
        /// Output directory, created on success.
        #[arg(long)]
        out: PathBuf,
    },
    /// Search wall placements that minimise the flooded asset volume.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ScenarioSource {
    /// Built-in fixture 1 to 6.
    #[arg(long, value_name = "N")]
    builtin: Option<usize>,
    /// Scenario manifest (TOML).
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Direct,
    Pathline,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Direct => Mode::Direct,
            ModeArg::Pathline => Mode::Pathline,
        }
    }
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[arg(long, value_enum, default_value = "pathline")]
    mode: ModeArg,
    /// Place walls one at a time, splitting the budget equally.
    #[arg(long)]
    sequential: bool,
    /// Number of walls.
    #[arg(long, default_value_t = 1)]
    walls: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation budget; every candidate counts.
    #[arg(long)]
    max_evals: Option<usize>,
    /// Wall-clock budget in seconds.
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    /// Alpha-shape radius in metres; defaults to 5 cell sizes.
    #[arg(long)]
    alpha: Option<f64>,
    /// Evaluation threads.
    #[arg(long, env = "FLOODWALL_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Output directory, created on success.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { source, out } => run::simulate(&source.into(), &out),
        Command::Optimize(args) => run::optimize(&args.into()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(run::exit_code(&e))
        }
    }
}

impl From<ScenarioSource> for run::Source {
    fn from(s: ScenarioSource) -> Self {
        match (s.builtin, s.scenario) {
            (Some(k), _) => run::Source::Builtin(k),
            (None, Some(p)) => run::Source::Manifest(p),
            (None, None) => unreachable!("clap requires one scenario source"),
        }
    }
}

impl From<OptimizeArgs> for run::OptimizeSpec {
    fn from(a: OptimizeArgs) -> Self {
        run::OptimizeSpec {
            source: a.source.into(),
            mode: a.mode.into(),
            sequential: a.sequential,
            walls: a.walls,
            seed: a.seed,
            max_evals: a.max_evals,
            time_limit: a.time_limit,
            alpha: a.alpha,
            workers: a.workers,
            out: a.out,
        }
    }
}
