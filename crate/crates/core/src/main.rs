use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use krein_spectral::commands::{self, Command};

/// Spectral expansions for linear Hamilton equations and the linearized kink.
#[derive(Parser)]
#[command(name = "krein-spectral", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// More log output (-v info, -vv debug); RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args)]
struct Io {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Kink profile, linearization potential and tail fit.
    Kink(Io),
    /// Discrete spectrum, band table and edge classification.
    Spectrum(Io),
    /// Continuum eigenfunctions by two routes and the phase-shift curve.
    Modes(Io),
    /// Expansion against the grid-spectral oracle.
    Evolve(Io),
    /// The full property battery; exits 4 if any check fails.
    Verify(Io),
    /// Moving-kink band tables, positivity and kernel vector.
    Bands(Io),
    /// Commutator defect of the linearized NLS example.
    DemoNoncommute(Io),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let (command, io) = match cli.command {
        Cmd::Kink(io) => (Command::Kink, io),
        Cmd::Spectrum(io) => (Command::Spectrum, io),
        Cmd::Modes(io) => (Command::Modes, io),
        Cmd::Evolve(io) => (Command::Evolve, io),
        Cmd::Verify(io) => (Command::Verify, io),
        Cmd::Bands(io) => (Command::Bands, io),
        Cmd::DemoNoncommute(io) => (Command::DemoNoncommute, io),
    };
    match commands::run(command, &io.config, &io.out) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{}", c.line());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
