//! `simulate`, `optimize` and `sweep`.

use std::path::Path;
use std::time::Instant;

use openqst_core::{
    max_fidelity_and_arrival, optimize, CouplingObjective, LeoControl, ParamBounds, PropagateOptions, PulseObjective,
    SimulationSetup, Trajectory,
};
use rayon::prelude::*;

use crate::config::{Axis, ExperimentConfig, OptimizeTarget};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, file, write_csv, write_json, write_summary};
use crate::parallel::{pool, Parallel};
use crate::record::{ReportRecord, RunKind, RunRecord};

fn setup(config: &ExperimentConfig, n_steps: usize) -> Result<SimulationSetup> {
    Ok(SimulationSetup::new(
        config.chain.n_sites,
        config.lindblad_kind(),
        config.bath_params()?,
        config.propagator(),
        PropagateOptions::new(config.horizon.t_total, n_steps),
    )?
    .with_couplings(config.couplings()?)?)
}

fn control(config: &ExperimentConfig, amplitudes: Option<&[f64]>) -> Result<Option<LeoControl>> {
    let shape = match (amplitudes, config.pulse_family()) {
        (Some(a), Some(family)) => family.shape(a),
        _ => config.pulse_shape(),
    };
    if shape.is_none() {
        return Ok(None);
    }
    Ok(Some(LeoControl::along_pst(shape, config.chain.n_sites)?))
}

fn write_trajectory(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let rows = trajectory.times.iter().zip(&trajectory.fidelities).map(|(&t, &f)| [t, f]);
    write_csv(path, ["t", "fidelity"], rows)
}

fn finish(record: &RunRecord, dir: &Path) -> Result<()> {
    write_json(&file(dir, &record.config.label, "manifest.json"), record)
}

/// Propagates the configured chain and writes `<label>_trajectory.csv`.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<RunRecord> {
    if config.optimize != OptimizeTarget::None {
        return Err(CliError::Invalid("simulate takes a config without optimize flags".into()));
    }
    let start = Instant::now();
    let dir = &config.output_dir;
    ensure_dir(dir)?;
    let setup = setup(config, config.horizon.n_steps)?;
    let trajectory = setup.simulate(&setup.couplings, control(config, None)?.as_ref())?;
    let (f_max, t_a) = max_fidelity_and_arrival(&trajectory);
    let trajectory_csv = file(dir, &config.label, "trajectory.csv");
    write_trajectory(&trajectory_csv, &trajectory)?;
    let record = RunRecord {
        kind: RunKind::Simulate,
        config: config.clone(),
        trajectory_csv,
        loss_csv: None,
        report: None,
        f_max,
        t_a,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    finish(&record, dir)?;
    Ok(record)
}

/// Runs Adam on the couplings or pulse amplitudes, then re-simulates the best
/// parameters at `horizon.n_steps`.
///
/// Writes `<label>_loss.csv`, `<label>_best_params.csv` and
/// `<label>_trajectory.csv`.
pub fn cmd_optimize(config: &ExperimentConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let dir = &config.output_dir;
    ensure_dir(dir)?;
    let adam = config.adam_config();
    let workers = pool(config.optimizer.workers)?;
    let inner = setup(config, config.optimizer.n_steps)?;
    let full = setup(config, config.horizon.n_steps)?;

    let (initial, outcome, trajectory) = match config.optimize {
        OptimizeTarget::None => {
            return Err(CliError::Invalid("optimize needs optimize.couplings or optimize.pulses".into()));
        }
        OptimizeTarget::Couplings => {
            let initial = config.couplings()?;
            let bounds = ParamBounds::uniform(initial.len(), config.optimizer.lower, config.optimizer.upper)?;
            let objective = Parallel::new(CouplingObjective { setup: &inner, penalty_weight: adam.penalty_weight }, workers);
            let report = optimize(&initial, &objective, &adam, Some(&bounds)).map_err(Box::new)?;
            let trajectory = full.simulate(&report.best_params, None)?;
            (initial, report, trajectory)
        }
        OptimizeTarget::Pulses => {
            let family = config.pulse_family().expect("validated pulse family");
            let initial = config.pulse_amplitudes();
            let bounds = ParamBounds::uniform(initial.len(), config.optimizer.lower, config.optimizer.upper)?;
            let objective = Parallel::new(PulseObjective::new(&inner, family, adam.penalty_weight)?, workers);
            let report = optimize(&initial, &objective, &adam, Some(&bounds)).map_err(Box::new)?;
            let trajectory = full.simulate(&full.couplings, control(config, Some(&report.best_params))?.as_ref())?;
            (initial, report, trajectory)
        }
    };

    let (f_max, t_a) = max_fidelity_and_arrival(&trajectory);
    let trajectory_csv = file(dir, &config.label, "trajectory.csv");
    write_trajectory(&trajectory_csv, &trajectory)?;
    let loss_csv = file(dir, &config.label, "loss.csv");
    let rows = outcome.loss_history.iter().zip(&outcome.fidelity_history).enumerate().map(|(k, (&l, &f))| [k as f64, l, f]);
    write_csv(&loss_csv, ["iteration", "loss", "fidelity"], rows)?;
    let rows = outcome.best_params.iter().enumerate().map(|(i, &p)| [i as f64, p]);
    write_csv(&file(dir, &config.label, "best_params.csv"), ["index", "value"], rows)?;

    let record = RunRecord {
        kind: RunKind::Optimize,
        config: config.clone(),
        trajectory_csv,
        loss_csv: Some(loss_csv),
        report: Some(ReportRecord::new(initial, outcome)),
        f_max,
        t_a,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    finish(&record, dir)?;
    Ok(record)
}

/// Simulates or optimizes, as the config asks.
pub fn cmd_run(config: &ExperimentConfig) -> Result<RunRecord> {
    match config.optimize {
        OptimizeTarget::None => cmd_simulate(config),
        _ => cmd_optimize(config),
    }
}

/// `<label>_<tag><value>`, e.g. `fig1a_Gamma0.05`.
pub fn sweep_label(label: &str, axis: Axis, value: f64) -> String {
    format!("{label}_{}{value}", axis.tag())
}

/// One run per axis value on `sweep.workers` threads, then
/// `<label>_summary.csv`.
pub fn cmd_sweep(config: &ExperimentConfig, axis: Axis, values: &[f64]) -> Result<Vec<RunRecord>> {
    if values.is_empty() {
        return Err(CliError::Invalid("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| {
            let mut c = config.with_axis(axis, v);
            c.label = sweep_label(&config.label, axis, v);
            c.validate().map(|()| c)
        })
        .collect::<Result<Vec<_>>>()?;
    let records = run_all(&configs, config.sweep_workers)?;
    let rows: Vec<_> = values.iter().zip(&records).map(|(v, r)| (v.to_string(), r.f_max, r.t_a)).collect();
    ensure_dir(&config.output_dir)?;
    write_summary(&file(&config.output_dir, &config.label, "summary.csv"), &rows)?;
    Ok(records)
}

/// Runs independent configs on `workers` threads, keeping input order.
pub fn run_all(configs: &[ExperimentConfig], workers: usize) -> Result<Vec<RunRecord>> {
    pool(workers)?.install(|| configs.par_iter().map(cmd_run).collect())
}

