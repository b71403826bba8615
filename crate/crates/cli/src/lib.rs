//! Command-line front end: configuration parsing, experiment dispatch and
//! CSV output.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use spinorbit::experiments::{
    run_fig3, run_fig4, run_gate, run_params_table, run_sweep, ColumnData, ExperimentName,
    GateKind, ResultTable,
};

use config::{parse_config, ConfigError, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", join_config_errors(.0))]
    Config(Vec<ConfigError>),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Numerical(#[from] spinorbit::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

fn join_config_errors(errs: &[ConfigError]) -> String {
    errs.iter()
        .map(|e| format!("config error: {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Read { .. } => EXIT_CONFIG,
            CliError::Numerical(_) | CliError::Write { .. } => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinorbit", version, about = "Spin-orbit dynamics of electrons on liquid helium")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Io {
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV destination; a `.meta` sidecar is written next to it. Without it
    /// the CSV goes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Gate {
    Phase,
    Cnot1,
    Cnot2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the derived couplings and regime flags.
    Params(Io),
    /// Distant spin-orbit JC reproduction.
    Fig3(Io),
    /// Spin-spin flip-flop reproduction.
    Fig4(Io),
    /// Simulate a gate and print its report.
    Gate {
        gate: Gate,
        #[arg(long)]
        config: PathBuf,
    },
    /// One-parameter sweep from the [experiment] sweep keys.
    Sweep(Io),
    /// Parse and validate a configuration without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text).map_err(CliError::Config)
}

fn emit(table: &ResultTable, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let write_err = |path: &Path, source| CliError::Write {
        path: path.to_owned(),
        source,
    };
    match out {
        Some(path) => {
            output::write_table(table, path).map_err(|e| write_err(path, e))?;
            write_summary(table, stdout).map_err(|e| write_err(Path::new("<stdout>"), e))?;
            writeln!(stdout, "wrote {} rows to {}", table.rows(), path.display())
                .map_err(|e| write_err(Path::new("<stdout>"), e))
        }
        None => {
            output::write_csv(table, &mut *stdout)
                .map_err(|e| write_err(Path::new("<stdout>"), e.into()))?;
            write_summary(table, stderr).map_err(|e| write_err(Path::new("<stderr>"), e))
        }
    }
}

fn write_summary(table: &ResultTable, w: &mut dyn Write) -> io::Result<()> {
    for (k, v) in &table.summary {
        writeln!(w, "{k}: {v}")?;
    }
    Ok(())
}

/// Column-per-line rendering of a one-row table.
fn write_params(table: &ResultTable, w: &mut dyn Write) -> io::Result<()> {
    for c in &table.columns {
        match &c.data {
            ColumnData::Real(v) => writeln!(w, "{:<42} {}", c.name, output::format_real(v[0]))?,
            ColumnData::Text(v) => writeln!(w, "{:<42} {}", c.name, v[0])?,
        }
    }
    write_summary(table, w)
}

pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let stdout_err = |source| CliError::Write {
        path: "<stdout>".into(),
        source,
    };
    match cli.command {
        Command::Validate { config } => {
            load_config(&config)?;
            writeln!(stdout, "{}: ok", config.display()).map_err(stdout_err)
        }
        Command::Params(io) => {
            let cfg = load_config(&io.config)?;
            let table = run_params_table(&cfg.spec(ExperimentName::ParamsTable))?;
            match &io.out {
                Some(_) => emit(&table, io.out.as_deref(), stdout, stderr),
                None => write_params(&table, stdout).map_err(stdout_err),
            }
        }
        Command::Fig3(io) => {
            let cfg = load_config(&io.config)?;
            let (table, _) = run_fig3(&cfg.spec(ExperimentName::Fig3))?;
            emit(&table, io.out.as_deref(), stdout, stderr)
        }
        Command::Fig4(io) => {
            let cfg = load_config(&io.config)?;
            let (table, _) = run_fig4(&cfg.spec(ExperimentName::Fig4))?;
            emit(&table, io.out.as_deref(), stdout, stderr)
        }
        Command::Sweep(io) => {
            let cfg = load_config(&io.config)?;
            if cfg.experiment.sweep.is_none() {
                return Err(CliError::Config(vec![ConfigError {
                    line: None,
                    message: "sweep needs sweep_param and sweep_values in [experiment]".into(),
                }]));
            }
            let table = run_sweep(&cfg.spec(ExperimentName::Sweep))?;
            emit(&table, io.out.as_deref(), stdout, stderr)
        }
        Command::Gate { gate, config } => {
            let cfg = load_config(&config)?;
            let (name, kind) = match gate {
                Gate::Phase => (ExperimentName::PhaseGate, GateKind::Phase),
                Gate::Cnot1 => (ExperimentName::CnotSingle, GateKind::CnotSingle),
                Gate::Cnot2 => (ExperimentName::CnotTwoSpin, GateKind::CnotTwoSpin),
            };
            let report = run_gate(&cfg.spec(name), kind)?;
            write!(stdout, "{report}").map_err(stdout_err)
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
/// Usage errors count as configuration errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
