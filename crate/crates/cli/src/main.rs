mod commands;
mod config;
mod failure;
mod plot;

use acoustoelastic::unitcell::MeshPreset;
use clap::{Parser, Subcommand, ValueEnum};
use commands::Ctx;
use config::RunConfig;
use failure::Failure;
use std::path::PathBuf;
use std::process::ExitCode;

/// Lamb-wave dispersion of pre-stressed plates: FEM sweeps, Rayleigh-Lamb
/// reference, synthetic wavefield round trips and load analysis.
#[derive(Parser, Debug)]
#[command(name = "acoustoelastic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the k sweep, synthesis and extraction.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Element counts of the unit cell (overrides `[geometry] nx, ny`).
    #[arg(long, global = true, value_enum)]
    mesh: Option<MeshArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// FEM dispersion CSV per model and load.
    Dispersion,
    /// Rayleigh-Lamb S0/A0 of the unloaded plate.
    Reference,
    /// Synthesize a line-scan wavefield from FEM dispersion and extract it again.
    Roundtrip,
    /// Δcp, regression and unity-load-step tables from dispersion CSVs.
    Analyze,
    /// Finite-difference check of the constitutive closed forms.
    MaterialCheck,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeshArg {
    Desk,
    Fine,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.jobs == 0 {
        return Err(Failure::Config("--jobs must be ≥ 1".into()));
    }
    if let Command::MaterialCheck = cli.command {
        let cfg = cli.config.as_deref().map(RunConfig::load).transpose()?;
        return commands::material_check(cfg.as_ref());
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let out = cli.out.clone().unwrap_or_else(|| cfg.resolve(&cfg.output.dir));
    commands::ensure_dir(&out)?;
    let ctx = Ctx {
        cfg,
        out,
        jobs: cli.jobs,
        mesh: cli.mesh.map(|m| match m {
            MeshArg::Desk => MeshPreset::Desk,
            MeshArg::Fine => MeshPreset::Fine,
        }),
    };
    match cli.command {
        Command::Dispersion => commands::dispersion(&ctx),
        Command::Reference => commands::reference(&ctx),
        Command::Roundtrip => commands::roundtrip(&ctx),
        Command::Analyze => commands::analyze(&ctx),
        Command::MaterialCheck => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("acoustoelastic: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
