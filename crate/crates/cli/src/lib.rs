//! `kneado` — weighted kneading matrices, determinants, pressure and
//! piecewise-linear models for piecewise-monotone interval maps, driven by
//! one TOML file per system.
//!
//! Every subcommand prints check lines as it goes and one machine-readable
//! `RESULT {json}` line at the end.  Exit status: 0 when all requested
//! checks pass, 1 when a check fails its tolerance, 2 when the run could
//! not be completed at all.

pub mod cmd;
pub mod config;
pub mod emit;
pub mod report;
pub mod sample;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use kneading_core::{Rational, Scalar};

use config::{ConfigFile, Mode, RunConfig};
use report::{fail_early, Report};

#[derive(Debug, Parser)]
#[command(name = "kneado", version, about = "Kneading determinants, pressure and straightened models for weighted interval maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a system file and print its shape
    Validate { config: PathBuf },
    /// Emit the kneading matrix and determinant as CSV tables
    Kneading { config: PathBuf },
    /// Locate the smallest positive determinant zero and report pressure
    Pressure { config: PathBuf },
    /// Weighted crossing counts and the zeta-function residuals
    Zeta { config: PathBuf },
    /// Run the full identity suite at the configured degree
    Check {
        config: PathBuf,
        /// Seed for the randomized germ and interval sweeps
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Sample the straightening map at a subcritical t and verify the
    /// conjugacy to its piecewise-linear model
    Semiconj {
        config: PathBuf,
        /// Evaluation parameter (exact forms like "1/5" or "0.2" accepted)
        #[arg(long)]
        t: String,
    },
    /// Emit the piecewise-linear model at --t, or the collapsed critical model
    Model {
        config: PathBuf,
        #[arg(long)]
        t: Option<String>,
        /// Build the model at the determinant zero, dropping collapsed branches
        #[arg(long)]
        critical: bool,
    },
    /// List cylinders to a depth with their weights and crossing classes
    Cylinders {
        config: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Emit plot-ready CSVs: the map graph, subcritical and critical
    /// straightenings, and both models
    EmitPlots {
        config: PathBuf,
        /// Subcritical parameter for the φ and model tables (default t*/2)
        #[arg(long)]
        t: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Kneading { .. } => "kneading",
            Command::Pressure { .. } => "pressure",
            Command::Zeta { .. } => "zeta",
            Command::Check { .. } => "check",
            Command::Semiconj { .. } => "semiconj",
            Command::Model { .. } => "model",
            Command::Cylinders { .. } => "cylinders",
            Command::EmitPlots { .. } => "emit-plots",
        }
    }

    fn config_path(&self) -> &PathBuf {
        match self {
            Command::Validate { config }
            | Command::Kneading { config }
            | Command::Pressure { config }
            | Command::Zeta { config }
            | Command::Check { config, .. }
            | Command::Semiconj { config, .. }
            | Command::Model { config, .. }
            | Command::Cylinders { config, .. }
            | Command::EmitPlots { config, .. } => config,
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    let name = cli.command.name();
    let (file, cfg) = match config::load(cli.command.config_path()) {
        Ok(x) => x,
        Err(e) => return fail_early(name, &e),
    };
    match cfg.mode {
        Mode::F64 => drive::<f64>(&cli.command, &file, &cfg, name),
        Mode::Rational => drive::<Rational>(&cli.command, &file, &cfg, name),
    }
}

fn drive<K: Scalar>(cmd: &Command, file: &ConfigFile, cfg: &RunConfig, name: &'static str) -> i32 {
    let mut rep = Report::new(name);
    let inner = |rep: &mut Report| -> anyhow::Result<()> {
        let sys = config::build_system::<K>(&file.system)?;
        let out = cfg.output_dir.clone();
        match cmd {
            Command::Validate { .. } => cmd::validate(&sys, cfg, rep),
            Command::Kneading { .. } => cmd::kneading(&sys, cfg, &out, rep),
            Command::Pressure { .. } => cmd::pressure_cmd(&sys, cfg, &out, rep),
            Command::Zeta { .. } => cmd::zeta_cmd(&sys, cfg, &out, rep),
            Command::Check { seed, .. } => cmd::check_cmd(&sys, cfg, *seed, rep),
            Command::Semiconj { t, .. } => {
                let t = config::parse_exact::<K>(t)?;
                cmd::semiconj_cmd(&sys, cfg, &t, &out, rep)
            }
            Command::Model { t, critical, .. } => {
                let t = t.as_deref().map(config::parse_exact::<K>).transpose()?;
                cmd::model_cmd(&sys, cfg, t.as_ref(), *critical, &out, rep)
            }
            Command::Cylinders { depth, .. } => cmd::cylinders_cmd(&sys, cfg, *depth, &out, rep),
            Command::EmitPlots { t, .. } => {
                let t = t.as_deref().map(config::parse_exact::<K>).transpose()?;
                cmd::emit_plots_cmd(&sys, cfg, t.as_ref(), &out, rep)
            }
        }
    };
    match inner(&mut rep) {
        Ok(()) => rep.finish(),
        Err(e) => fail_early(name, &e),
    }
}
