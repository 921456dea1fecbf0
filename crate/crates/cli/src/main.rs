//! Command-line front end: solve, manufacture, verify and export.
//!
//! Exit codes: 0 success, 1 configuration or parse error, 2 continuation
//! failure, 3 verification failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(version, about = "Prescribed shifted Gauss curvature for horo-convex radial graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Grid size as NθxNφ, or N for a circle.
    #[arg(long, global = true, value_name = "NθxNφ", value_parser = config::parse_grid)]
    grid: Option<(usize, usize)>,

    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=2))]
    dim: Option<u8>,

    /// Seed for randomized initial perturbations.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Continue from the round solution to t = 1 and verify the result.
    Solve,
    /// Write an exact-solution problem file.
    Manufacture,
    /// Check a solution file, optionally against its problem.
    Verify {
        solution: PathBuf,
        #[arg(long, value_name = "FILE")]
        problem: Option<PathBuf>,
    },
    /// Write per-node fields as CSV and the surface as an OBJ mesh.
    Export { solution: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let over = config::Overrides { out: cli.out, grid: cli.grid, dim: cli.dim.map(usize::from), seed: cli.seed };
    let cfg = cli.config.as_deref();
    let result = match &cli.command {
        Command::Solve => commands::solve(cfg, &over, cli.quiet),
        Command::Manufacture => commands::manufacture(cfg, &over, cli.quiet),
        Command::Verify { solution, problem } => commands::verify(solution, problem.as_deref(), &over, cli.quiet),
        Command::Export { solution } => commands::export(solution, &over, cli.quiet),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
