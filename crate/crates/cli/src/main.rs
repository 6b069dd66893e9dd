//! `wlab`: runs the random-matrix experiments and writes results with a
//! reproducibility manifest.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use wlab_core::Error;

use config::{merged_settings, ExperimentConfig, Flags};

#[derive(Parser)]
#[command(name = "wlab", version, about = "Local eigenvalue statistics of Wigner matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a GUE or Wigner ensemble and write its eigenvalue archive.
    Sample(Flags),
    /// Evolve spectra by Dyson Brownian motion or the matrix OU flow.
    Evolve(Flags),
    /// Global and short-scale counting deviations from the semicircle law.
    Semicircle(Flags),
    /// Eigenvalue location and pair-spacing rigidity.
    Rigidity(Flags),
    /// Extract and rescale a local window; check the external-point assumptions.
    Window(Flags),
    /// Orthogonal polynomials for the window weight and their diagnostics.
    Oplocal(Flags),
    /// Equilibrium support and density for the window potential.
    Equilibrium(Flags),
    /// Two-point correlation estimate against the sine kernel.
    Sine(Flags),
    /// Small-gap probabilities and the fitted repulsion exponent.
    Repulsion(Flags),
    /// Mean of the regularized log-Vandermonde statistic.
    Vandermonde(Flags),
    /// Merge statistic record files and print a pass/fail summary.
    Report(ReportArgs),
}

#[derive(Args)]
struct ReportArgs {
    /// JSON-lines or JSON-array record files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    flags: Flags,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Evolve(_) => "evolve",
            Command::Semicircle(_) => "semicircle",
            Command::Rigidity(_) => "rigidity",
            Command::Window(_) => "window",
            Command::Oplocal(_) => "oplocal",
            Command::Equilibrium(_) => "equilibrium",
            Command::Sine(_) => "sine",
            Command::Repulsion(_) => "repulsion",
            Command::Vandermonde(_) => "vandermonde",
            Command::Report(_) => "report",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Sample(f)
            | Command::Evolve(f)
            | Command::Semicircle(f)
            | Command::Rigidity(f)
            | Command::Window(f)
            | Command::Oplocal(f)
            | Command::Equilibrium(f)
            | Command::Sine(f)
            | Command::Repulsion(f)
            | Command::Vandermonde(f) => f,
            Command::Report(r) => &r.flags,
        }
    }
}

fn run(cmd: &Command) -> wlab_core::Result<()> {
    let cfg = ExperimentConfig::resolve(cmd.name(), merged_settings(cmd.flags())?)?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    info!("running {} with {} threads", cfg.command, rayon::current_num_threads());
    let start = Instant::now();
    let outcome = match cmd {
        Command::Sample(_) => commands::sample(&cfg),
        Command::Evolve(_) => commands::evolve(&cfg),
        Command::Semicircle(_) => commands::semicircle(&cfg),
        Command::Rigidity(_) => commands::rigidity(&cfg),
        Command::Window(_) => commands::window(&cfg),
        Command::Oplocal(_) => commands::oplocal(&cfg),
        Command::Equilibrium(_) => commands::equilibrium(&cfg),
        Command::Sine(_) => commands::sine(&cfg),
        Command::Repulsion(_) => commands::repulsion(&cfg),
        Command::Vandermonde(_) => commands::vandermonde(&cfg),
        Command::Report(r) => commands::report(&cfg, &r.inputs),
    }?;
    let path = manifest::write_manifest(&cfg, outcome.streams, &outcome.outputs, start.elapsed().as_secs_f64())?;
    println!("{}", outcome.summary);
    info!("manifest written to {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
