use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

/// Analysis toolkit for TiO2 films on III-V and Si substrates.
#[derive(Debug, Parser)]
#[command(name = "tio2kit", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Result table path; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write plot data (CSV, or SVG when the path ends in .svg).
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Directory with lattices.toml, phonons.toml, phase_rules.toml,
    /// vacancy.toml. Defaults to $TIO2KIT_CONFIG_DIR.
    #[arg(long, global = true, env = "TIO2KIT_CONFIG_DIR")]
    pub config_dir: Option<PathBuf>,
    /// Worker threads for per-file work; output order follows input order.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimal coincident interface area for substrate/film orientations.
    Mcia(commands::McIaArgs),
    /// Voigt fit of one diffraction peak with size-strain and Bragg analysis.
    XrdFit(commands::XrdArgs),
    /// Raman classification, PLE line fits and lifetimes.
    #[command(subcommand)]
    Spectra(commands::SpectraCmd),
    /// Depth-profile interdiffusion fits.
    #[command(subcommand)]
    Profile(commands::ProfileCmd),
    /// Oxygen-vacancy kinetics.
    #[command(subcommand)]
    Vacancy(commands::VacancyCmd),
    /// Roughness and the empirical phase rule.
    #[command(subcommand)]
    Film(commands::FilmCmd),
}

/// Process exit codes.
pub mod exit {
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const NUMERIC: u8 = 4;
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(exit::USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
