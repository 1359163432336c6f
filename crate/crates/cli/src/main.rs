//! `gfi` — functional-inequality toolkit for Gaussian-smoothed discrete
//! measures.
//!
//! Subcommands evaluate the constant catalog over parameter lattices, run
//! the grid/Monte-Carlo estimators against measure files, certify potential
//! decompositions, verify transport-entropy inequalities with exact optimal
//! transport, run concentration tail checks, and sweep the conjecture
//! landscape. Artifacts (CSV/JSON plus a manifest) land in `--out`.
//!
//! Exit codes: 0 all assertions passed, 1 input or solver error, 2 the run
//! completed but an assertion failed.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use artifacts::ArtifactDir;
use commands::Ctx;
use config::Config;

#[derive(Parser)]
#[command(name = "gfi", version, about = "functional inequalities for Gaussian-smoothed discrete measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Declarative key-value config file (unknown keys are errors).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV/JSON artifacts and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Root seed; overrides the config `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweep cells.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every catalog bound over a (delta, R, d, N) lattice.
    Bounds,
    /// Estimate Poincaré / log-Sobolev constants for a measure file.
    Estimate,
    /// Build the convex+bounded potential splitting with certificates.
    Decompose,
    /// Verify transport-entropy inequalities with exact optimal transport.
    Transport,
    /// Monte Carlo tail checks, convex log-Sobolev, inf-convolution.
    Concentration,
    /// Conjecture-exploration sweep over dimensions.
    Sweep,
    /// Condensed verification battery (one pass/fail line per check).
    VerifyAll,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (cfg, config_digest) = match &cli.config {
        Some(path) => (
            Config::from_file(path)?,
            Some(artifacts::file_digest(path)?),
        ),
        None => (Config::default(), None),
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.usize("seed", 0)? as u64,
    };
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok(); // a second init in-process is harmless
    }
    let ctx = Ctx {
        cfg,
        out: ArtifactDir::create(&cli.out)?,
        seed,
        jobs: cli.jobs,
        config_digest,
    };
    match cli.command {
        Command::Bounds => commands::cmd_bounds(&ctx),
        Command::Estimate => commands::cmd_estimate(&ctx),
        Command::Decompose => commands::cmd_decompose(&ctx),
        Command::Transport => commands::cmd_transport(&ctx),
        Command::Concentration => commands::cmd_concentration(&ctx),
        Command::Sweep => commands::cmd_sweep(&ctx),
        Command::VerifyAll => commands::cmd_verify_all(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("run completed with failed assertions");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
