//! `intquant`: batch driver that writes CSV/JSON artifacts plus a manifest
//! per command.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use intquant::QuantError;

use crate::config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "intquant", version, about = "Integral quantization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Analytic vs quadrature diagonal of the Cahill–Glauber seed, trace, positivity.
    CgTable,
    /// Angle operator matrix, spectrum and numeric defect.
    Angle,
    /// Affine moments, kinetic constant, weak identities and phase-space density.
    Affine,
    /// Thermal s(T), Gibbs diagonals and equality with the CG seed.
    Thermal,
    /// Full invariant suite; exits 1 on any failure.
    Verify,
}

#[derive(Args)]
struct Overrides {
    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Comma-separated Cahill–Glauber parameters.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    s: Option<Vec<f64>>,
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Comma-separated temperatures.
    #[arg(long, global = true, value_delimiter = ',')]
    temp: Option<Vec<f64>>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.s {
            c.s = v;
        }
        if let Some(v) = self.omega {
            c.omega = v;
        }
        if let Some(v) = self.temp {
            c.temp = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.outdir {
            c.outdir = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<ConfigError>()
            || matches!(
                c.downcast_ref::<QuantError>(),
                Some(
                    QuantError::InvalidParameter { .. }
                        | QuantError::DivergentMoment { .. }
                        | QuantError::Integrability(_)
                )
            )
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = match cli.overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::CgTable => commands::cg_table(&cfg).map(|_| true),
        Command::Angle => commands::angle(&cfg).map(|_| true),
        Command::Affine => commands::affine(&cfg).map(|_| true),
        Command::Thermal => commands::thermal(&cfg).map(|_| true),
        Command::Verify => commands::verify(&cfg),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
