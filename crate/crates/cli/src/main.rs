//! `wchaos`: Wiener chaos experiments from the command line.
//!
//! Exit status is 0 on success, 1 when a verification check fails and 2 on
//! configuration or input errors.

mod commands;
mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wiener_chaos::function_space::BasisKind;
use wiener_chaos::{ChaosError, Result};

use commands::{Format, Mode, OrderRange, Outcome, Points};
use config::{ExperimentConfig, KernelName, Overrides};

#[derive(Parser, Debug)]
#[command(name = "wchaos", version, about = "Stochastic integrals and Wick equations in Wiener chaos")]
struct Cli {
    /// JSON experiment configuration; flags take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, value_name = "NAME")]
    kernel: Option<KernelName>,
    #[arg(long, global = true, value_name = "X")]
    hurst: Option<f64>,
    #[arg(long, global = true, value_name = "T")]
    horizon: Option<f64>,
    #[arg(long, global = true, value_name = "KIND")]
    basis: Option<BasisKind>,
    #[arg(long, global = true, value_name = "K")]
    modes: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    order: Option<usize>,
    #[arg(long, global = true, value_name = "M")]
    grid: Option<usize>,
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Also write the resolved configuration to this file.
    #[arg(long, global = true, value_name = "PATH")]
    save_config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hermite polynomial values, or their Gauss–Hermite Gram table.
    Hermite {
        /// Orders: `n` or `lo:hi`.
        #[arg(long, default_value = "0:5")]
        n: OrderRange,
        /// Points: `t`, `lo:hi` or `lo:hi:count`.
        #[arg(long, default_value = "-3:3:13")]
        t: Points,
        /// Emit `E[H_n H_m]` instead of values.
        #[arg(long)]
        orthogonality: bool,
    },
    /// Itô, Stratonovich or field integral of an integrand.
    Integrate {
        /// `w-path`, `zero` or a JSON integrand file.
        #[arg(long, default_value = "w-path")]
        integrand: String,
        #[arg(long, value_enum, default_value = "ito")]
        mode: Mode,
    },
    /// Solve `u = 1 + X^⋄(u)` by closed form and by Picard iteration.
    Sde,
    /// Constants and operator-norm bounds of the fBm kernel.
    Fbm,
    /// Run a verification suite: algebra, integrals, sde, fbm or mc.
    Verify {
        #[arg(long)]
        suite: String,
    },
}

fn run(cli: Cli) -> Result<Outcome> {
    let flags = Overrides {
        kernel: cli.kernel,
        hurst: cli.hurst,
        horizon: cli.horizon,
        basis: cli.basis,
        modes: cli.modes,
        order: cli.order,
        grid: cli.grid,
        seed: cli.seed,
        out: cli.out,
    };
    let format = cli.format;
    let save = cli.save_config.clone();
    let cfg = || -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig::resolve(cli.config.as_deref(), &flags)?;
        if let Some(path) = &save {
            cfg.save(path)?;
        }
        Ok(cfg)
    };
    let (outcome, out_dir) = match cli.command {
        Command::Hermite { n, t, orthogonality } => {
            let stem = if orthogonality { "hermite_gram" } else { "hermite" };
            let mut o = commands::cmd_hermite(n, &t, orthogonality, format);
            let ext = if format == Format::Csv { "csv" } else { "json" };
            o.files.push((format!("{stem}.{ext}"), o.stdout.clone()));
            (o, flags.out.clone())
        }
        Command::Integrate { integrand, mode } => {
            let cfg = cfg()?;
            (commands::cmd_integrate(&cfg, &integrand, mode, format)?, cfg.out)
        }
        Command::Sde => {
            let cfg = cfg()?;
            (commands::cmd_sde(&cfg, format)?, cfg.out)
        }
        Command::Fbm => {
            let cfg = cfg()?;
            (commands::cmd_fbm(&cfg, format)?, cfg.out)
        }
        Command::Verify { suite } => {
            let cfg = cfg()?;
            (commands::cmd_verify(&cfg, &suite, format)?, cfg.out)
        }
    };
    if let Some(dir) = out_dir {
        fs::create_dir_all(&dir).map_err(|e| ChaosError::Config(format!("{}: {e}", dir.display())))?;
        for (name, contents) in &outcome.files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| ChaosError::Config(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
