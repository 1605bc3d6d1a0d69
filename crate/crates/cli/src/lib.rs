//! Command-line front end: Wigner maps, CHSH scans, optimization and oracle
//! verification, with CSV and JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod parse;
pub mod table;
pub mod verify;

use std::path::{Path, PathBuf};

use catbell::SearchMode;
use clap::{Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use error::CliError;
use parse::{parse_angle, parse_assignments, Range};

#[derive(Debug, Parser)]
#[command(name = "catbell", version, about = "Atom-field cat states and CHSH correlations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fixed,
    Design,
}

impl From<Mode> for SearchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Fixed => SearchMode::Fixed,
            Mode::Design => SearchMode::Design,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cat quasiprobability surface over (z, k).
    WignerMap {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Field phase in radians or as `pi/4` style.
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// `start:stop:count` in the config's length unit.
        #[arg(long, allow_hyphen_values = true)]
        z_range: Option<Range>,
        #[arg(long, allow_hyphen_values = true)]
        k_range: Option<Range>,
    },
    /// CHSH sum over (z', beta') with the other settings fixed.
    ChshScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `z=..,k=..,k_prime=..,beta=..`
        #[arg(long, allow_hyphen_values = true)]
        fix: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        zp_range: Option<Range>,
        #[arg(long, allow_hyphen_values = true)]
        betap_range: Option<Range>,
    },
    /// Maximize the phase-optimized CHSH sum.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Fixed)]
        mode: Mode,
        #[arg(long, default_value_t = commands::DEFAULT_STARTS)]
        starts: usize,
        /// Defaults to the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cross-check the closed forms against grid propagation and quadrature.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Runs one command; returns the line printed on success.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::WignerMap { config, out, beta, z_range, k_range } => {
            let cfg = RunConfig::load(&config)?;
            let (dz, dk) = commands::default_map_ranges(&cfg);
            let table = commands::wigner_map(
                &cfg,
                beta.unwrap_or(commands::DEFAULT_MAP_BETA),
                z_range.unwrap_or(dz),
                k_range.unwrap_or(dk),
            )?;
            table.write(&out)?;
            Ok(format!("wrote {} rows to {}", table.rows.len(), out.display()))
        }
        Command::ChshScan { config, out, fix, zp_range, betap_range } => {
            let cfg = RunConfig::load(&config)?;
            let assign = parse_assignments(fix.as_deref().unwrap_or("")).map_err(CliError::Usage)?;
            let fix = commands::ScanFix::from_assignments(&cfg, &assign)?;
            let (dz, db) = commands::default_scan_ranges(&cfg);
            let scan = commands::chsh_scan(&cfg, fix, zp_range.unwrap_or(dz), betap_range.unwrap_or(db))?;
            scan.table.write(&out)?;
            Ok(scan.table.trailer[0].clone())
        }
        Command::Optimize { config, out, mode, starts, seed } => {
            let cfg = RunConfig::load(&config)?;
            if starts == 0 {
                return Err(CliError::Usage("--starts must be at least 1".into()));
            }
            let (report, converged_starts) = commands::optimize(&cfg, mode.into(), starts, seed.unwrap_or(cfg.seed))?;
            write_json(&out, &report)?;
            if converged_starts == 0 {
                return Err(CliError::NotConverged { starts });
            }
            Ok(format!("best_value={} ({converged_starts}/{starts} starts converged)", table::format_sig(report.best_value)))
        }
        Command::Verify { config, out, grid_points, dt, seed } => {
            let cfg = RunConfig::load(&config)?;
            if let Some(n) = grid_points {
                if !n.is_power_of_two() {
                    return Err(CliError::Usage(format!("--grid-points must be a power of two, got {n}")));
                }
            }
            if dt.is_some_and(|d| !(d > 0.0 && d.is_finite())) {
                return Err(CliError::Usage("--dt must be positive".into()));
            }
            let report = verify::verify(&cfg, verify::VerifyOptions { grid_points, dt, seed })?;
            write_json(&out, &report)?;
            if report.passed {
                Ok(format!("all {} checks passed", report.checks.len()))
            } else {
                let mut msg = format!("failed checks: {}", report.failures().join(", "));
                for d in &report.diagnostics {
                    msg.push_str("\n  ");
                    msg.push_str(d);
                }
                Err(CliError::VerifyFailed(msg))
            }
        }
    }
}
