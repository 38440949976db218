mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::Context;
use config::RunConfig;
use error::CliError;
use output::OutDir;

#[derive(Debug, Parser)]
#[command(name = "czpatch", version, about = "Calderón–Zygmund operators on patches: evaluation, norms and Hölder studies")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Geometric norms of the domain or of every sweep member.
    Norms,
    /// Operator values at the points of `eval.points`.
    Eval,
    /// Normal-ray profiles and their log fits.
    Profile,
    /// Empirical one-sided Hölder seminorms per regime.
    HolderScan,
    /// Seminorm over bound factor across the bumped-sphere sweep.
    ScalingStudy,
    /// Cross-method comparison of the boundary, volume and grid routes.
    OracleCheck,
    /// Regime of every pair in `classify.pairs`.
    Classify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::Eval => "eval",
            Command::Profile => "profile",
            Command::HolderScan => "holder-scan",
            Command::ScalingStudy => "scaling-study",
            Command::OracleCheck => "oracle-check",
            Command::Classify => "classify",
        }
    }
}

/// Command line overrides recorded next to the copied config.
#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    config: Option<String>,
    seed: u64,
    workers: Option<usize>,
    version: &'a str,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::config("--workers", "must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| CliError::Io(e.to_string()))?;
    }
    let text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::config("--config", format!("{}: {e}", p.display())))?),
        None => None,
    };
    let mut config = match &text {
        Some(t) => RunConfig::parse(t)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = cli.config.as_ref().and_then(|p| p.parent()) {
        config.resolve_paths(dir);
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output = out.clone();
    }
    let out = OutDir::create(&config.output)?;
    match &text {
        Some(t) => out.text("config.toml", t)?,
        None => out.text("config.toml", &toml::to_string(&config).map_err(|e| CliError::Io(e.to_string()))?)?,
    }
    out.json(
        "run.json",
        &RunRecord {
            command: cli.command.name(),
            config: cli.config.as_ref().map(|p| p.display().to_string()),
            seed: config.seed,
            workers: cli.workers,
            version: env!("CARGO_PKG_VERSION"),
        },
    )?;
    let ctx = Context { config, out };
    let result = match cli.command {
        Command::Norms => commands::cmd_norms(&ctx),
        Command::Eval => commands::cmd_eval(&ctx),
        Command::Profile => commands::cmd_profile(&ctx),
        Command::HolderScan => commands::cmd_holder_scan(&ctx),
        Command::ScalingStudy => commands::cmd_scaling_study(&ctx),
        Command::OracleCheck => commands::cmd_oracle_check(&ctx),
        Command::Classify => commands::cmd_classify(&ctx),
    };
    if let Err(CliError::Probe(probe)) = &result {
        ctx.out.json("failure.json", probe)?;
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("czpatch {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
