//! `hkdv`: batch driver for scattering, solution fields, truncation studies
//! and oracle comparisons.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] hankel_kdv::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(e.into())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hkdv", version, about = "KdV solutions through Hankel-operator Fredholm determinants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Ignore and do not write the scattering-data cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads; overrides `workers`.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Scattering data and a report.
    Scatter,
    /// Solution field and KdV residual.
    Solve,
    /// Left-truncation convergence table.
    Converge,
    /// Determinant route against the split-step solver.
    Compare,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::Scatter => Experiment::Scatter,
            Command::Solve => Experiment::Solve,
            Command::Converge => Experiment::Converge,
            Command::Compare => Experiment::Compare,
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let cfg = RunConfig::load(path)?;
    if let Some(e) = cfg.experiment {
        if e != cli.command.experiment() {
            return Err(CliError::Config(format!("config is for {e:?}, not {:?}", cli.command)));
        }
    }
    let workers = cli.workers.or(cfg.workers);
    if workers == Some(0) {
        return Err(CliError::Config("--workers must be >= 1".into()));
    }
    let q = cfg.potential(&run::config_dir(path))?;
    let ctx = run::Context {
        out: cli.out.clone().or(cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out")),
        cache: cfg.cache && !cli.no_cache,
        q,
        cfg,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Scatter => run::scatter_cmd(&ctx).map(|_| true),
        Command::Solve => run::solve_cmd(&ctx),
        Command::Converge => run::converge_cmd(&ctx).map(|_| true),
        Command::Compare => run::compare_cmd(&ctx),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("hkdv: {e}");
            ExitCode::from(e.code())
        }
    }
}
