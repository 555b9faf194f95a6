//! Experiment runner: analytic sweeps, simulations and figure presets
//! written as CSV with `#` provenance headers.

pub mod config;
pub mod presets;

use std::io::Write;
use std::path::Path;

use mhtc_core::analytics::{capacity_for_policy, expected_count, outage_lower_bound};
use mhtc_core::simulator::{run_outage_trials_with, window_guard};
use mhtc_core::{Error, NetworkConfig, SimOptions};
use thiserror::Error as ThisError;

pub use config::Config;

pub const VERSION: &str = env!("MHTC_VERSION");

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("no row is in a valid regime")]
    AllInvalid,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::AllInvalid => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

/// Maps a core error to the CLI's classes. Regime errors come back as `Ok`
/// so the caller can flag the row instead.
fn classify(e: Error) -> Result<(), CliError> {
    match e {
        Error::Domain(_) | Error::OutOfRegime { .. } | Error::Unachievable { .. } | Error::NoneFound(_) => Ok(()),
        Error::InvalidConfig(_) | Error::DegenerateWindow { .. } => Err(CliError::Config(e.to_string())),
        Error::NoConvergence(_) => Err(CliError::Numeric(e.to_string())),
    }
}

/// A CSV body with its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| *h == name).expect("known column");
        self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect()
    }
}

pub fn num(v: f64) -> String {
    if v.is_infinite() && v > 0.0 { "inf".to_string() } else { v.to_string() }
}

/// Provenance lines: version, command, seed and the resolved config.
pub fn metadata(command: &str, seed: u64, cfg: &Config) -> Vec<String> {
    let mut out = vec![format!("mhtc {VERSION}"), format!("command: {command}"), format!("seed: {seed}")];
    out.extend(cfg.entries().into_iter().map(|(k, v)| format!("config: {k} = {v}")));
    out
}

pub fn write_csv(path: &Path, meta: &[String], table: &Table) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in meta {
        writeln!(file, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.header).map_err(std::io::Error::from)?;
    for row in &table.rows {
        w.write_record(row).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

pub const ANALYZE_COLUMNS: &[&str] =
    &["lambda", "m", "d_max", "policy", "expected_sets", "outage_bound", "tc_bound", "valid"];

struct AnalyticRow {
    expected: f64,
    outage: f64,
    tc: f64,
    valid: bool,
}

fn analytic_row(cfg: &NetworkConfig, epsilon: f64) -> Result<AnalyticRow, CliError> {
    let expected = match expected_count(cfg) {
        Ok(e) => e,
        Err(e) => {
            classify(e)?;
            f64::NAN
        }
    };
    let (tc, tc_valid) = match capacity_for_policy(cfg, epsilon) {
        Ok(c) => (c.value, c.valid),
        Err(e) => {
            classify(e)?;
            (f64::NAN, false)
        }
    };
    let outage = outage_lower_bound(expected);
    let valid = tc_valid && expected.is_finite() && (0.0..=1.0).contains(&outage);
    Ok(AnalyticRow { expected, outage, tc, valid })
}

/// Analytic sweep over the config's grids. Invalid-regime rows are kept and
/// flagged; `AllInvalid` is returned alongside the table when no row is valid.
pub fn analyze(cfg: &Config) -> Result<(Table, bool), CliError> {
    let mut table = Table::new(ANALYZE_COLUMNS);
    let mut any_valid = false;
    for net in cfg.grid()? {
        let row = analytic_row(&net, cfg.epsilon)?;
        any_valid |= row.valid;
        table.rows.push(vec![
            num(net.lambda),
            net.m.to_string(),
            config::fmt_budget(net.d_max),
            net.policy.label(),
            num(row.expected),
            num(row.outage),
            num(row.tc),
            row.valid.to_string(),
        ]);
    }
    let all_invalid = !table.rows.is_empty() && !any_valid;
    Ok((table, all_invalid))
}

pub const SIMULATE_COLUMNS: &[&str] = &["lambda", "m", "mode", "trials", "outage_mean", "outage_std", "seed"];

/// Monte Carlo outage at every (m, lambda) grid point. `outage_std` is the
/// standard error of the mean.
pub fn simulate(cfg: &Config) -> Result<Table, CliError> {
    if cfg.d_max.len() != 1 {
        return Err(CliError::Config("field `network.d_max`: simulate takes a single value".into()));
    }
    let mut table = Table::new(SIMULATE_COLUMNS);
    let opts = SimOptions::default();
    for net in cfg.grid()? {
        let window = cfg.window.unwrap_or_else(|| window_guard(&net));
        let est = match run_outage_trials_with(&net, window, cfg.trials, cfg.mode, cfg.seed, &opts) {
            Ok(est) => est,
            Err(e @ Error::NoConvergence(_)) => return Err(CliError::Numeric(e.to_string())),
            Err(e) => return Err(CliError::Config(e.to_string())),
        };
        table.rows.push(vec![
            num(net.lambda),
            net.m.to_string(),
            cfg.mode.tag().to_string(),
            est.trials.to_string(),
            num(est.mean),
            num(est.std),
            est.seed.to_string(),
        ]);
    }
    Ok(table)
}
