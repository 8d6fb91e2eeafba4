//! Command-line front end of the `glrt` binary.

pub mod commands;
pub mod config;
pub mod output;

use crate::{Error, Result};
use clap::{Parser, Subcommand};
use commands::{
    cmd_fox_h, cmd_pd_vs_snr, cmd_roc, cmd_validate, table1, table1_rows, table1_text, ValidateOptions,
};
use config::ExperimentConfig;
use output::{write_csv, CsvRow};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "glrt", version, about = "Detection probabilities and simulations for the post-beamforming GLRT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo trials per point; overrides the configuration.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Absolute tolerance of the analytic evaluations.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PD against PFA for each detector and scenario.
    Roc,
    /// PD against per-antenna SNR, with the SNR loss relative to the LRT.
    PdVsSnr,
    /// Quadrature against series on the nine benchmark operating points.
    Table1,
    /// Cross-checks between the analytic paths and the simulator.
    Validate {
        /// Relative threshold perturbation used to test the suite itself.
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_fault: f64,
    },
    /// Evaluates a Fox H-function problem file.
    FoxH {
        /// Problem file (TOML); `--config` is accepted as well.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli, name: &str) -> Result<ExperimentConfig> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config(format!("`{name}` needs --config <path>")))?;
    let mut cfg = ExperimentConfig::load(path, name)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(t) = cli.tolerance {
        if !(t > 0.0) {
            return Err(Error::Config(format!("--tolerance must be > 0, got {t}")));
        }
        cfg.tolerance = t;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok(cfg)
}

fn emit(rows: &[CsvRow], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            write_csv(rows, std::io::BufWriter::new(f))
        }
        None => write_csv(rows, std::io::stdout().lock()),
    }
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Roc => {
            let cfg = load_config(cli, "roc")?;
            emit(&cmd_roc(&cfg)?, cfg.out.as_deref())?;
        }
        Command::PdVsSnr => {
            let cfg = load_config(cli, "pd-vs-snr")?;
            emit(&cmd_pd_vs_snr(&cfg)?, cfg.out.as_deref())?;
        }
        Command::Table1 => {
            let rows = table1(cli.tolerance.unwrap_or(1e-10))?;
            let text = table1_text(&rows);
            match &cli.out {
                Some(p) => {
                    print!("{text}");
                    emit(&table1_rows(&rows), Some(p))?;
                }
                None => {
                    eprint!("{text}");
                    emit(&table1_rows(&rows), None)?;
                }
            }
        }
        Command::Validate { inject_fault } => {
            let opts = ValidateOptions {
                trials: cli.trials.unwrap_or(100_000),
                seed: cli.seed.unwrap_or(1),
                threshold_fault: *inject_fault,
            };
            let checks = cmd_validate(&opts)?;
            let mut stdout = std::io::stdout().lock();
            for c in &checks {
                writeln!(stdout, "{}", c.line())?;
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            writeln!(stdout, "{} checks, {} failed", checks.len(), failed)?;
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::FoxH { problem } => {
            let path = problem
                .as_ref()
                .or(cli.config.as_ref())
                .ok_or_else(|| Error::Config("`fox-h` needs --problem <path>".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            print!("{}", cmd_fox_h(&text, cli.tolerance)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Parses arguments, runs the command and maps errors to exit code 2.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
