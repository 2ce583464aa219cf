//! Command-line surface of `well-revival`.
//!
//! Exit codes: 0 success, 1 check not met (revival below its bound, or
//! non-monotone convergence) or I/O failure, 2 configuration error, 3 numeric failure.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::{Artifact, CommandError, Outcome};
use config::{ConfigError, Entries, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "WELL_REVIVAL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "well-revival", version, about = "Revival dynamics after a sudden infinite-well expansion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density snapshots at the requested times, plus the interval probability series.
    Simulate(Flags),
    /// Far-interval probability and mirror check at an odd multiple of the revival time.
    Revival(Flags),
    /// Revival table over a list of eta values.
    Sweep(Flags),
    /// Revival time versus light-crossing time (SI units).
    Relativity(Flags),
    /// Crank-Nicolson convergence study against the spectral engine.
    OracleCheck(Flags),
}

/// Flags mirror the config-file keys; every one overrides the file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat `key = value` config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// eta = delta / L (comma-separated list for `sweep`)
    #[arg(long)]
    pub eta: Option<String>,
    /// Normalization deficit target
    #[arg(long)]
    pub deficit: Option<String>,
    #[arg(long)]
    pub grid_points: Option<String>,
    /// Time in revival units (repeatable; natural units)
    #[arg(long)]
    pub tau: Vec<String>,
    /// Time in seconds (repeatable; si units)
    #[arg(long)]
    pub time: Vec<String>,
    /// far | near | lo:hi
    #[arg(long)]
    pub interval: Option<String>,
    /// natural | si
    #[arg(long)]
    pub units: Option<String>,
    /// Particle mass in kg (si)
    #[arg(long)]
    pub mass: Option<String>,
    /// Enlarged well width L in m (si)
    #[arg(long)]
    pub length_l: Option<String>,
    /// Initial well width delta in m (si)
    #[arg(long)]
    pub length_delta: Option<String>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
    /// Output file (directory for `simulate`); stdout when absent
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub odd_multiple: Option<String>,
    /// Grid interval counts for `oracle-check`, comma-separated
    #[arg(long)]
    pub resolutions: Option<String>,
    /// Time step in revival units per dx / L for `oracle-check`
    #[arg(long)]
    pub dt_ratio: Option<String>,
}

impl Flags {
    /// File entries (if any) overlaid with the flags.
    pub fn entries(&self) -> Result<Entries, ConfigError> {
        let mut entries = match &self.config {
            Some(path) => Entries::load(path)?,
            None => Entries::default(),
        };
        let singles = [
            ("eta", &self.eta),
            ("deficit", &self.deficit),
            ("grid_points", &self.grid_points),
            ("interval", &self.interval),
            ("units", &self.units),
            ("mass", &self.mass),
            ("length_l", &self.length_l),
            ("length_delta", &self.length_delta),
            ("format", &self.format),
            ("out", &self.out),
            ("odd_multiple", &self.odd_multiple),
            ("resolutions", &self.resolutions),
            ("dt_ratio", &self.dt_ratio),
        ];
        for (key, value) in singles {
            if let Some(v) = value {
                entries.set_flag(key, v.clone());
            }
        }
        if !self.tau.is_empty() {
            entries.set_flag("tau", self.tau.join(","));
        }
        if !self.time.is_empty() {
            entries.set_flag("time", self.time.join(","));
        }
        Ok(entries)
    }
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| ConfigError::new(THREADS_ENV, format!("expected a positive integer, got `{raw}`")))?;
    // A pool may already exist when called repeatedly in-process; keep it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs one command and returns its outcome without writing anything.
pub fn execute(command: &Command) -> Result<(Outcome, RunConfig), CommandError> {
    let flags = match command {
        Command::Simulate(f)
        | Command::Revival(f)
        | Command::Sweep(f)
        | Command::Relativity(f)
        | Command::OracleCheck(f) => f,
    };
    let config = RunConfig::from_entries(&flags.entries()?)?;
    let outcome = match command {
        Command::Simulate(_) => commands::simulate(&config)?,
        Command::Revival(_) => commands::revival(&config)?,
        Command::Sweep(_) => commands::sweep(&config)?,
        Command::Relativity(_) => commands::relativity(&config)?,
        Command::OracleCheck(_) => commands::oracle_check(&config)?,
    };
    Ok((outcome, config))
}

fn write_artifacts(artifacts: &[Artifact], config: &RunConfig, is_simulate: bool) -> std::io::Result<()> {
    use std::io::Write;
    match &config.out {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for a in artifacts {
                if artifacts.len() > 1 {
                    writeln!(lock, "## {}", a.name)?;
                }
                lock.write_all(a.body.as_bytes())?;
            }
            Ok(())
        }
        Some(dir) if is_simulate => {
            std::fs::create_dir_all(dir)?;
            for a in artifacts {
                std::fs::write(dir.join(&a.name), &a.body)?;
            }
            Ok(())
        }
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, artifacts.iter().map(|a| a.body.as_str()).collect::<String>())
        }
    }
}

/// Parses `args`, runs the command, writes its output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    match execute(&cli.command) {
        Ok((outcome, config)) => {
            let is_simulate = matches!(cli.command, Command::Simulate(_));
            if let Err(e) = write_artifacts(&outcome.artifacts, &config, is_simulate) {
                eprintln!("cannot write output: {e}");
                return EXIT_CHECK_FAILED;
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(CommandError::Config(e)) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
        Err(CommandError::Numeric(e)) => {
            eprintln!("numeric failure: {e}");
            EXIT_NUMERIC
        }
    }
}
