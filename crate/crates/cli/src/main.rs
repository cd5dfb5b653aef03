mod config;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser};
use log::LevelFilter;

use config::{Overrides, RunConfig};
use error::CliError;
use run::Subcommand;

/// Generation expansion planning with short-term variation limits.
///
/// Every subcommand reads one TOML run config and writes its artifacts under
/// `<output_dir>/<run_name>/`. Failures print one JSON line on stderr.
#[derive(Parser)]
#[command(name = "isogep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// More logging on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only the error line on failure.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Estimate a parameter set from the hourly data.
    Estimate(RunArgs),
    /// Write the MPS export and the size report.
    Build(RunArgs),
    /// Solve with the desk solver.
    Solve(RunArgs),
    /// Run the five ablation cases and the fixed-capacity checks.
    Ablate(RunArgs),
    /// Report binding variation rows and their duals.
    Duals(RunArgs),
    /// Compare the solved capacity plan with a reference plan.
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run config file.
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    demand: Option<PathBuf>,
    #[arg(long)]
    generation: Option<PathBuf>,
    #[arg(long)]
    holidays: Option<PathBuf>,
    #[arg(long)]
    parameters: Option<PathBuf>,
    #[arg(long)]
    reference_plan: Option<PathBuf>,
    #[arg(long)]
    external_solution: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            output_dir: self.output_dir.clone(),
            demand: self.demand.clone(),
            generation: self.generation.clone(),
            holidays: self.holidays.clone(),
            parameters: self.parameters.clone(),
            reference_plan: self.reference_plan.clone(),
            external_solution: self.external_solution.clone(),
        }
    }
}

impl Command {
    fn split(&self) -> (Subcommand, &RunArgs) {
        match self {
            Command::Estimate(a) => (Subcommand::Estimate, a),
            Command::Build(a) => (Subcommand::Build, a),
            Command::Solve(a) => (Subcommand::Solve, a),
            Command::Ablate(a) => (Subcommand::Ablate, a),
            Command::Duals(a) => (Subcommand::Duals, a),
            Command::Compare(a) => (Subcommand::Compare, a),
        }
    }
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => LevelFilter::Off,
        (false, 0) => LevelFilter::Warn,
        (false, 1) => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            return fail(&CliError::Usage(
                "a subcommand is required: estimate, build, solve, ablate, duals or compare".into(),
            ));
        }
        Err(e) => {
            let text = e.to_string();
            let head = text.split("\n\nUsage:").next().unwrap_or("").trim_start_matches("error: ");
            return fail(&CliError::Usage(head.to_string()));
        }
    };
    init_logging(cli.verbose, cli.quiet);
    let (cmd, args) = cli.command.split();
    let outcome = RunConfig::load(&args.config, &args.overrides()).and_then(|cfg| run::run(cmd, &cfg));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.json_line());
    ExitCode::from(e.exit_code() as u8)
}
