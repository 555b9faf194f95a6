use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mhtc_cli::presets::{reproduce, Figure, PresetOptions};
use mhtc_cli::{analyze, metadata, simulate, write_csv, CliError, Config};
use mhtc_core::SimMode;

#[derive(Parser)]
#[command(name = "mhtc", version = mhtc_cli::VERSION, about = "Multi-hop transmission capacity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic route counts, outage bounds and capacity bounds over a grid.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Override a config entry, e.g. `--set network.lambda=0.2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo outage of the typical pair over a grid.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// dynamic, predetermined or independent
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Figure data with analytic and simulated columns.
    Reproduce {
        /// fig2, fig3 or fig4
        figure: String,
        /// Trials per simulated point; 0 writes the analytic columns only.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { config, overrides, out } => {
            let cfg = Config::load(&config, &overrides)?;
            let (table, all_invalid) = analyze(&cfg)?;
            write_csv(&out, &metadata("analyze", cfg.seed, &cfg), &table)?;
            if all_invalid {
                return Err(CliError::AllInvalid);
            }
        }
        Command::Simulate { config, mut overrides, seed, trials, mode, out } => {
            if let Some(mode) = mode {
                if SimMode::from_tag(&mode).is_none() {
                    return Err(CliError::Config(format!("unknown mode `{mode}`")));
                }
                overrides.push(format!("simulation.mode={mode}"));
            }
            overrides.extend(seed.map(|s| format!("simulation.seed={s}")));
            overrides.extend(trials.map(|t| format!("simulation.trials={t}")));
            let cfg = Config::load(&config, &overrides)?;
            let table = simulate(&cfg)?;
            write_csv(&out, &metadata("simulate", cfg.seed, &cfg), &table)?;
        }
        Command::Reproduce { figure, trials, seed, out_dir } => {
            let fig = Figure::from_name(&figure)
                .ok_or_else(|| CliError::Config(format!("unknown figure `{figure}`; expected fig2, fig3 or fig4")))?;
            let output = reproduce(fig, PresetOptions { trials, seed })?;
            let (data, plot) = output.write(&out_dir)?;
            eprintln!("wrote {} and {}", data.display(), plot.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mhtc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
