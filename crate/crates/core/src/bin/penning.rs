use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use penning::scenario::{run_file, OutputFormat, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Eigenfrequencies of one ion, a balanced crystal or a general pair
    Modes,
    /// Recompute the 7 T balanced-crystal mode table
    Table1,
    /// Phonon rate equations and steady states
    Phonons,
    /// Doppler cooling time and its inverse
    Cool,
    /// Simulate ion motion and take its spectrum
    Trajectory,
    /// Time of flight, capture and extraction scans
    Beamline,
    /// Cold-plasma density, rotation and temperature bound
    Plasma,
    /// EMG or Gaussian fit of a two-column CSV
    Fit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "penning", version, about = "Penning-trap crystal scenario runner")]
struct Cli {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the `seed` key of the config
    #[arg(long)]
    seed: Option<u64>,
    /// Force one format for every file (default: CSV series, JSON summary)
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sub = match cli.command {
        Command::Modes => Subcommand::Modes,
        Command::Table1 => Subcommand::Table1,
        Command::Phonons => Subcommand::Phonons,
        Command::Cool => Subcommand::Cool,
        Command::Trajectory => Subcommand::Trajectory,
        Command::Beamline => Subcommand::Beamline,
        Command::Plasma => Subcommand::Plasma,
        Command::Fit => Subcommand::Fit,
    };
    let format = match cli.format {
        None => OutputFormat::Auto,
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
    };
    match run_file(sub, &cli.config, &cli.out, cli.seed, format) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("penning {sub}: {e:#}");
            ExitCode::FAILURE
        }
    }
}
