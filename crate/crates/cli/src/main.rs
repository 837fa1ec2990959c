mod config;
mod run;
mod sweep;
mod verify;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hodge_core::strip::dump;
use hodge_core::Error as CoreError;
use log::info;

use config::{ConfigError, RunConfig};

/// Hodge Laplacian solver on the half-infinite periodic strip.
#[derive(Parser)]
#[command(name = "hodge", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem; writes solution.bin and report.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; writes verify_<suite>.csv and .json.
    Verify {
        suite: verify::Suite,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-solve over a list of grid parameter values and print CSV.
    Sweep {
        #[arg(long)]
        param: sweep::Param,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>, cfg: Option<&RunConfig>) -> PathBuf {
    flag.or_else(|| cfg.and_then(|c| c.output.clone())).unwrap_or_else(|| PathBuf::from("."))
}

fn solve(config: &Path, out: Option<PathBuf>) -> Result<bool> {
    let cfg = RunConfig::load(config)?;
    let dir = out_dir(out, Some(&cfg));
    let (phi, report) = run::solve(&cfg)?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = BufWriter::new(File::create(dir.join("solution.bin"))?);
    dump::write_form(&mut w, &phi)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    info!(
        "relative residual {:.3e}, bc violation {:.3e}",
        report.report.relative_residual, report.report.bc_violation
    );
    Ok(true)
}

fn dispatch(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError(e.to_string()))?;
    }
    match cli.command {
        Command::Solve { config, out } => solve(&config, out),
        Command::Verify { suite, config, out } => {
            let cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None if suite == verify::Suite::Symbols => RunConfig::symbols_default(),
                None => return Err(ConfigError(format!("verify {suite:?} needs --config")).into()),
            };
            let dir = out_dir(out, Some(&cfg));
            verify::run(suite, &cfg, &dir)
        }
        Command::Sweep { param, values, config, out } => {
            let cfg = RunConfig::load(&config)?;
            let dir = out.or_else(|| cfg.output.clone());
            sweep::run(&cfg, param, &values, dir.as_deref())
        }
    }
}

/// 2: incompatible zero mode; 3: invalid configuration or grid; 1: other.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 3;
        }
        match cause.downcast_ref::<CoreError>() {
            Some(CoreError::ZeroModeIncompatible { .. }) => return 2,
            Some(CoreError::InvalidGrid(_) | CoreError::DegreeOverflow { .. }) => return 3,
            _ => {}
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("HODGE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
