//! `gatom`: batch experiments for giant atoms coupled to a 1D waveguide.
//!
//! Every subcommand reads an optional TOML config, applies flag and
//! environment overrides, runs one experiment and writes CSV tables, an SVG
//! plot and a `*_manifest.toml` that reruns the experiment byte-identically
//! when fed back through `--config`.

mod commands;
mod config;
mod csvio;
mod grid;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

/// Flags shared by every subcommand. Flags override config file values,
/// which override defaults.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config file; a previous run's manifest also works.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ensemble seed, overriding disorder.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding GATOM_OUT and output.dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ensemble size, overriding disorder.samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// CSV to fit, overriding fit.input.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the spontaneous-emission amplitude.
    Emit(CommonArgs),
    /// Snapshot the waveguide field profile.
    Field(CommonArgs),
    /// Map the poles and residues of the emission amplitude.
    Poles(CommonArgs),
    /// Sweep dark-state decay rates over a disorder grid.
    SweepDark(CommonArgs),
    /// Sweep the braided pair's total decoherence rate over a disorder grid.
    SweepDfi(CommonArgs),
    /// Sweep the braided pair's Liouvillian spectrum over the phase.
    PhiSweep(CommonArgs),
    /// Fit scaling models to a sweep CSV.
    Fit(FitArgs),
}

#[derive(Debug, Parser)]
#[command(name = "gatom", version, about = "Giant-atom waveguide toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn with_pool<F: FnOnce() -> Result<()> + Send>(threads: Option<usize>, f: F) -> Result<()> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("building thread pool")?;
            pool.install(f)
        }
        None => f(),
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let (kind, common, input) = match &cli.command {
        Command::Emit(c) => ("emit", c, None),
        Command::Field(c) => ("field", c, None),
        Command::Poles(c) => ("poles", c, None),
        Command::SweepDark(c) => ("sweep-dark", c, None),
        Command::SweepDfi(c) => ("sweep-dfi", c, None),
        Command::PhiSweep(c) => ("phi-sweep", c, None),
        Command::Fit(a) => ("fit", &a.common, a.input.as_deref()),
    };
    let mut run = config::resolve(kind, common)?;
    let threads = run.threads;
    with_pool(threads, move || match kind {
        "emit" => commands::emit(&mut run),
        "field" => commands::field(&mut run),
        "poles" => commands::poles(&mut run),
        "sweep-dark" => commands::sweep_dark(&mut run),
        "sweep-dfi" => commands::sweep_dfi(&mut run),
        "phi-sweep" => commands::phi_sweep(&mut run),
        "fit" => commands::fit(&mut run, input),
        _ => unreachable!(),
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let chain = format!("{e:#}");
            let line = chain.split_whitespace().collect::<Vec<_>>().join(" ");
            eprintln!("error: {line}");
            ExitCode::FAILURE
        }
    }
}
