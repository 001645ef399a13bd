use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kdv_backstep::cli::{cmd_simulate, cmd_solve_kernels, cmd_verify, exit_code, CommandOptions};
use kdv_backstep::fdm::SchemeMode;

#[derive(Parser)]
#[command(version, about = "Backstepping output feedback for the KdV equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Consistent,
    Literal,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides `sim.scheme` from the config.
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve or load the kernels, print residuals, export gains.csv.
    SolveKernels(Common),
    /// Run the scenario and write surface.csv and norms.csv.
    Simulate(Common),
    /// Run the acceptance checks.
    Verify(Common),
}

fn options(c: Common) -> CommandOptions {
    CommandOptions {
        config: c.config,
        out_dir: c.out_dir,
        scheme: c.scheme.map(|s| match s {
            Scheme::Consistent => SchemeMode::ConsistentEuler,
            Scheme::Literal => SchemeMode::PaperLiteral,
        }),
        cache_dir: c.cache_dir,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SolveKernels(c) => cmd_solve_kernels(&options(c)).map(|_| true),
        Command::Simulate(c) => cmd_simulate(&options(c)).map(|_| true),
        Command::Verify(c) => cmd_verify(&options(c)).map(|m| m.all_passed()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
