//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_census, cmd_field_grid, cmd_spectrum, cmd_sweep, CensusReport, FieldGrid, GridPoint,
    PlaneSpec, SpectrumRow, SpectrumTable, StateField, SweepEntry, SweepReport, SweepSummaryRow,
    SCHEMA,
};
pub use config::{OutputFormat, RunConfig, PRESET_NAMES};
pub use output::Report;

use crate::charges::ChargeError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<ChargeError> for CliError {
    fn from(e: ChargeError) -> Self {
        match e {
            ChargeError::InvalidSphere(msg) => CliError::Config(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "monopole-atlas",
    version,
    about = "Berry-curvature monopoles of two coupled spins"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bundled configuration, applied before --config.
    #[arg(long, global = true, value_parser = PRESET_NAMES)]
    preset: Option<String>,
    /// Override a configuration key, e.g. coupling.theta_deg=60.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// csv or json; csv for spectrum and field-grid, json otherwise
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Offset into the locator's quasi-random seed sequence.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Energies and gaps along a line in b-space.
    Spectrum,
    /// Synthetic field vectors on a plane in b-space.
    FieldGrid,
    /// Monopole locations and charges inside a region.
    Census,
    /// Census for each DMI angle of the sweep.
    Sweep,
}

impl Command {
    fn default_format(self) -> OutputFormat {
        match self {
            Command::Spectrum | Command::FieldGrid => OutputFormat::Csv,
            Command::Census | Command::Sweep => OutputFormat::Json,
        }
    }
}

fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            Some((path.display().to_string(), text))
        }
        None => None,
    };
    let mut config = RunConfig::load(
        args.preset.as_deref(),
        file.as_ref().map(|(p, t)| (p.as_str(), t.as_str())),
        &args.set,
    )?;
    if let Some(seed) = args.seed {
        config.numerics.seed = seed;
    }
    if let Some(f) = args.format {
        config.output.format = Some(f);
    }
    if let Some(p) = &args.out {
        config.output.path = Some(p.display().to_string());
    }
    Ok(config)
}

/// Runs one subcommand and writes its report. A sweep with failed angles
/// still writes the report before reporting the failure.
fn execute(args: &Args) -> Result<(), CliError> {
    let config = load_config(args)?;
    let format = config
        .output
        .format
        .unwrap_or(args.command.default_format());
    let mut deferred = None;
    let report = match args.command {
        Command::Spectrum => Report::Spectrum(cmd_spectrum(&config)?),
        Command::FieldGrid => Report::Grid(cmd_field_grid(&config)?),
        Command::Census => Report::Census(cmd_census(&config)?),
        Command::Sweep => {
            let r = cmd_sweep(&config);
            let failed: Vec<String> = r
                .failures()
                .iter()
                .map(|e| format!("ϑ={}°: {}", e.theta_deg, e.error.as_deref().unwrap_or("")))
                .collect();
            if !failed.is_empty() {
                deferred = Some(CliError::Numerical(failed.join("; ")));
            }
            Report::Sweep(r)
        }
    };
    let text = report.render(format)?;
    match &config.output.path {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("writing {path}: {e}")))?
        }
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(CliError::Io(e.to_string()))
                }
                _ => {}
            }
        }
    }
    deferred.map_or(Ok(()), Err)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("monopole-atlas: {e}");
            e.exit_code()
        }
    }
}
