use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bergman_lab::experiment::{run, Command, ExperimentConfig, RunOptions};

/// Polynomial Bergman kernel experiments.
#[derive(Parser)]
#[command(name = "bergman-lab", version)]
struct Cli {
    /// JSON experiment config; the shipped default when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; falls back to the config's `output`, then `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fixed-order reductions, recorded in the output metadata.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// One-point function against the first-order diagonal expansion.
    KernelDiag,
    /// Berezin mass and mass outside the dilated droplet.
    BerezinConc,
    /// Total variation to the standard Gaussian after blow-up.
    GaussianTv,
    /// Compensated off-diagonal decay profiles.
    Offdiag,
    /// PSOR equilibrium potential and droplet.
    Obstacle,
    /// Berezin transform against harmonic measure (Fock weight).
    FockHarmonic,
    /// Closed-form and quadrature moments (Fock weight).
    FockMoments,
    /// Minimal dbar-solution norms against the bound.
    DbarBound,
    /// Full acceptance suite; exits nonzero on failure.
    Accept,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Command {
        match s {
            Sub::KernelDiag => Command::KernelDiag,
            Sub::BerezinConc => Command::BerezinConc,
            Sub::GaussianTv => Command::GaussianTv,
            Sub::Offdiag => Command::Offdiag,
            Sub::Obstacle => Command::Obstacle,
            Sub::FockHarmonic => Command::FockHarmonic,
            Sub::FockMoments => Command::FockMoments,
            Sub::DbarBound => Command::DbarBound,
            Sub::Accept => Command::Accept,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path),
        None => Ok(ExperimentConfig::shipped()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli.out.clone().or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let command = Command::from(cli.command);
    match run(command, &config, &RunOptions { out, deterministic: cli.deterministic }) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            if command == Command::Accept {
                let text = std::fs::read_to_string(&summary.files[0]).unwrap_or_default();
                text.lines().filter(|l| !l.starts_with('#')).for_each(|l| println!("{l}"));
            }
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
