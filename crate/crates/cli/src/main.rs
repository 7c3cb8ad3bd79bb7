mod commands;
mod config;
mod error;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    execute, known_sections, rerun, Bounds, FramePotential, MiCurve, Otoc, Plot, Qutrit233, RampClassify,
    RunContext, VerifyMoments,
};
use config::ConfigFile;
use error::{CliError, CliResult};

/// Scrambling experiments, analytic bounds and ramp-scheme classification.
#[derive(Parser, Debug)]
#[command(name = "scramblab", version)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory receiving every output file.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// TOML file with defaults: top-level keys and one [subcommand] table each.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Mutual information between the secret's reference and player subsets.
    MiCurve(MiCurve),
    /// Classify a curve into ramp parameters (b, g).
    RampClassify(RampClassify),
    /// Write the analytic bound curves.
    Bounds(Bounds),
    /// Compare Monte Carlo purity with the exact Haar average.
    VerifyMoments(VerifyMoments),
    /// Exercise the ((2,3)) qutrit codec.
    Qutrit233(Qutrit233),
    /// Out-of-time-order correlators of sampled unitaries.
    Otoc(Otoc),
    /// Frame potential of an ensemble.
    FramePotential(FramePotential),
    /// Render curves and bounds as SVG.
    Plot(Plot),
    /// Repeat the run recorded in a manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn global<T: serde::de::DeserializeOwned>(cfg: Option<&ConfigFile>, key: &str) -> CliResult<Option<T>> {
    match cfg.and_then(|c| c.global(key)) {
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| CliError::config(format!("config file '{key}': {e}"))),
        None => Ok(None),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => Some(ConfigFile::load(p)?),
        None => None,
    };
    if let Some(c) = &cfg {
        c.check_known(&known_sections())?;
    }
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => global::<usize>(cfg.as_ref(), "threads")?,
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::config("--threads must be ≥ 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    let out_dir = match cli.out_dir {
        Some(d) => d,
        None => global::<PathBuf>(cfg.as_ref(), "out-dir")?.unwrap_or_else(|| PathBuf::from(".")),
    };
    let mut ctx = RunContext::new(out_dir)?;
    let cfg = cfg.as_ref();
    match &cli.command {
        Cmd::MiCurve(a) => execute(a, cfg, &mut ctx),
        Cmd::RampClassify(a) => execute(a, cfg, &mut ctx),
        Cmd::Bounds(a) => execute(a, cfg, &mut ctx),
        Cmd::VerifyMoments(a) => execute(a, cfg, &mut ctx),
        Cmd::Qutrit233(a) => execute(a, cfg, &mut ctx),
        Cmd::Otoc(a) => execute(a, cfg, &mut ctx),
        Cmd::FramePotential(a) => execute(a, cfg, &mut ctx),
        Cmd::Plot(a) => execute(a, cfg, &mut ctx),
        Cmd::Rerun { manifest } => rerun(manifest, &mut ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scramblab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
