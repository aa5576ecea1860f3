use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use openqst::config::parse_list;
use openqst::presets::{preset, FULL_MAX_ITERATIONS};
use openqst::{cmd_optimize, cmd_simulate, cmd_sweep, Axis, CliError, ExperimentConfig, Result, RunRecord};

/// Open spin-chain state transfer: simulation, Adam optimization and sweeps.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configuration.
    Simulate { config: PathBuf },
    /// Optimize couplings or pulse amplitudes.
    Optimize {
        config: PathBuf,
        /// Use 1000 Adam iterations.
        #[arg(long)]
        full: bool,
    },
    /// Repeat a run along one bath parameter.
    Sweep {
        config: PathBuf,
        /// Γ, γ or T (also Gamma, gamma, temperature).
        #[arg(long, value_parser = parse_axis)]
        axis: Axis,
        /// Comma-separated axis values.
        #[arg(long, value_parser = parse_values)]
        values: Values,
        /// Runs in parallel; overrides `sweep.workers`.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a built-in figure preset (fig1a, fig1b, fig1c, fig3a, fig3b, fig3c, fig5a, fig5b).
    Preset {
        name: String,
        /// Use 1000 Adam iterations.
        #[arg(long)]
        full: bool,
        /// Write the expanded configs instead of running them.
        #[arg(long)]
        emit: bool,
        /// Runs in parallel.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Clone)]
struct Values(Vec<f64>);

fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    Axis::parse(s).ok_or_else(|| format!("unknown axis {s:?}; expected Γ, γ or T"))
}

fn parse_values(s: &str) -> std::result::Result<Values, String> {
    parse_list(s).map(Values)
}

fn load(path: &Path, out: &Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(dir) = out {
        config.output_dir = dir.clone();
    }
    Ok(config)
}

fn report(record: &RunRecord) {
    println!("{}: f_max = {:.6} at t_a = {:.6}", record.config.label, record.f_max, record.t_a);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config } => report(&cmd_simulate(&load(&config, &cli.out)?)?),
        Command::Optimize { config, full } => {
            let mut config = load(&config, &cli.out)?;
            if full {
                config.optimizer.max_iterations = FULL_MAX_ITERATIONS;
            }
            let record = cmd_optimize(&config)?;
            if let Some(r) = &record.report {
                println!("best parameters: {:?}", r.best_params);
            }
            report(&record);
        }
        Command::Sweep { config, axis, values, workers } => {
            let mut config = load(&config, &cli.out)?;
            if let Some(w) = workers {
                config.sweep_workers = w;
            }
            cmd_sweep(&config, axis, &values.0)?.iter().for_each(report);
        }
        Command::Preset { name, full, emit, workers } => {
            let preset = preset(&name, full)?;
            let out = cli.out.unwrap_or_else(|| PathBuf::from("results").join(&name));
            if emit {
                for path in preset.emit(&out)? {
                    println!("{}", path.display());
                }
            } else {
                if workers == 0 {
                    return Err(CliError::Invalid("--workers must be positive".into()));
                }
                preset.run(&out, workers)?.iter().for_each(report);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
