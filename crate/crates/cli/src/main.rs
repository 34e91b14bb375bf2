use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use magcount_cli::{load_config, run, summary, write_outputs, HarnessError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Count,
    Scan,
    Threshold,
    Hardy,
    Bounds,
    Bs,
    Assumption,
}

/// Counts and bounds bound states of radial magnetic Schrödinger operators.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Must match `command.name` in the config.
    #[arg(value_enum)]
    subcommand: Sub,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Wall-clock budget in seconds for refinement loops.
    #[arg(long)]
    budget: Option<f64>,
    /// `key.path=value`, applied before validation; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main_inner(cli: Cli) -> Result<bool, HarnessError> {
    let mut overrides = vec![];
    let name = format!("{:?}", cli.subcommand).to_lowercase();
    if let Some(out) = &cli.out {
        overrides.push(format!("output.dir={:?}", out.display().to_string()));
    }
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(b) = cli.budget {
        overrides.push(format!("solver.time_budget_s={b:?}"));
    }
    overrides.extend(cli.overrides);
    let cfg = load_config(&cli.config, &overrides)?;
    if cfg.command.name() != name {
        return Err(HarnessError::Config(format!("at `command.name`: config runs `{}` but `{name}` was requested", cfg.command.name())));
    }
    let report = run(&cfg)?;
    for p in write_outputs(&report)? {
        eprintln!("wrote {}", p.display());
    }
    println!("{}", summary(&report));
    Ok(report.converged)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("not converged within budget; partial results written");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
