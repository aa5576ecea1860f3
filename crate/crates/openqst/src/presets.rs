//! Built-in parameter sets for the fidelity figures.
//!
//! Each preset expands into groups of runs (a baseline and one or more
//! optimized schemes), one run per panel value, and writes one
//! `<preset>_<group>_summary.csv` per group.

use std::path::Path;

use openqst_core::AdamConfig;

use crate::commands::run_all;
use crate::config::{Axis, ExperimentConfig, LindbladChoice, OptimizeTarget, PulseChoice};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, file, write_summary};
use crate::record::RunRecord;

pub const NAMES: [&str; 8] = ["fig1a", "fig1b", "fig1c", "fig3a", "fig3b", "fig3c", "fig5a", "fig5b"];

/// Iteration budget of the full-length optimization.
pub const FULL_MAX_ITERATIONS: usize = 1000;

/// RK4 steps inside the coupling loss; best couplings are re-simulated with
/// the full 2000.
const COUPLING_LOSS_STEPS: usize = 400;

#[derive(Clone, Debug, PartialEq)]
pub enum PanelAxis {
    Bath(Axis, Vec<f64>),
    Lindblad(Vec<LindbladChoice>),
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub axis: PanelAxis,
    /// `(group, template)`; the template's label is ignored.
    pub groups: Vec<(&'static str, ExperimentConfig)>,
}

/// One expanded run.
#[derive(Clone, Debug)]
pub struct PresetRun {
    pub group: &'static str,
    pub axis_value: String,
    pub config: ExperimentConfig,
}

fn base(n_sites: usize, gamma_coupling: f64, gamma_memory: f64, temperature: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.chain.n_sites = n_sites;
    c.bath.gamma_coupling = gamma_coupling;
    c.bath.gamma_memory = gamma_memory;
    c.bath.temperature = temperature;
    c
}

fn coupling_groups(c: ExperimentConfig, full: bool) -> Vec<(&'static str, ExperimentConfig)> {
    let mut opt = c.clone();
    opt.optimize = OptimizeTarget::Couplings;
    opt.optimizer.n_steps = COUPLING_LOSS_STEPS;
    if full {
        opt.optimizer.max_iterations = FULL_MAX_ITERATIONS;
    }
    vec![("pst", c), ("optimized", opt)]
}

fn pulse_groups(c: ExperimentConfig, single: bool, full: bool) -> Vec<(&'static str, ExperimentConfig)> {
    let optimized = |family| {
        let mut o = c.clone();
        o.control.family = family;
        o.optimize = OptimizeTarget::Pulses;
        let adam = AdamConfig::for_pulses();
        o.optimizer.alpha = adam.alpha;
        o.optimizer.penalty_weight = adam.penalty_weight;
        o.optimizer.lower = -c.control.intensity;
        o.optimizer.upper = c.control.intensity;
        if full {
            o.optimizer.max_iterations = FULL_MAX_ITERATIONS;
        }
        o
    };
    let mut ideal = c.clone();
    ideal.control.family = PulseChoice::Ideal;
    let mut groups = vec![("ideal", ideal)];
    if single {
        groups.push(("single", optimized(PulseChoice::Piecewise)));
    }
    groups.push(("combinatorial", optimized(PulseChoice::Fourier)));
    groups
}

/// `full` raises the iteration budget from 200 to 1000.
pub fn preset(name: &str, full: bool) -> Result<Preset> {
    let bath = |axis, values: &[f64]| PanelAxis::Bath(axis, values.to_vec());
    let (axis, groups) = match name {
        "fig1a" => (bath(Axis::GammaCoupling, &[0.0, 0.05, 0.1]), coupling_groups(base(6, 0.1, 2.0, 10.0), full)),
        "fig1b" => (bath(Axis::GammaMemory, &[2.0, 5.0, 10.0]), coupling_groups(base(6, 0.1, 2.0, 10.0), full)),
        "fig1c" => (bath(Axis::Temperature, &[5.0, 10.0, 15.0]), coupling_groups(base(6, 0.1, 2.0, 10.0), full)),
        "fig3a" => (bath(Axis::GammaCoupling, &[0.05, 0.1, 0.2]), pulse_groups(base(4, 0.1, 10.0, 10.0), true, full)),
        "fig3b" => (bath(Axis::GammaMemory, &[5.0, 10.0, 20.0]), pulse_groups(base(4, 0.1, 10.0, 10.0), false, full)),
        "fig3c" => (bath(Axis::Temperature, &[5.0, 10.0, 15.0]), pulse_groups(base(4, 0.1, 10.0, 10.0), false, full)),
        "fig5a" => (
            PanelAxis::Lindblad(vec![LindbladChoice::SigmaX, LindbladChoice::Lowering]),
            coupling_groups(base(6, 0.05, 2.0, 10.0), full),
        ),
        "fig5b" => (
            PanelAxis::Lindblad(vec![LindbladChoice::SigmaX, LindbladChoice::Lowering]),
            pulse_groups(base(4, 0.1, 10.0, 10.0), false, full),
        ),
        _ => return Err(CliError::Invalid(format!("unknown preset {name:?}; expected one of {}", NAMES.join(", ")))),
    };
    Ok(Preset { name: NAMES.iter().find(|n| **n == name).expect("listed"), axis, groups })
}

impl Preset {
    /// All runs, labelled `<preset>_<group>_<panel value>`, writing into `out`.
    pub fn runs(&self, out: &Path) -> Result<Vec<PresetRun>> {
        let mut runs = Vec::new();
        for (group, template) in &self.groups {
            let panel: Vec<(String, String, ExperimentConfig)> = match &self.axis {
                PanelAxis::Bath(axis, values) => values
                    .iter()
                    .map(|&v| (v.to_string(), format!("{}{v}", axis.tag()), template.with_axis(*axis, v)))
                    .collect(),
                PanelAxis::Lindblad(kinds) => kinds
                    .iter()
                    .map(|&k| {
                        let name = serde_json::to_value(k).expect("unit variant").as_str().expect("name").to_owned();
                        let mut c = template.clone();
                        c.lindblad = k;
                        (name.clone(), name, c)
                    })
                    .collect(),
            };
            for (axis_value, tag, mut config) in panel {
                config.label = format!("{}_{group}_{tag}", self.name);
                config.output_dir = out.to_owned();
                config.validate()?;
                runs.push(PresetRun { group, axis_value, config });
            }
        }
        Ok(runs)
    }

    /// Writes every run's config as `<label>.conf`.
    pub fn emit(&self, out: &Path) -> Result<Vec<std::path::PathBuf>> {
        ensure_dir(out)?;
        self.runs(out)?
            .into_iter()
            .map(|r| {
                let path = out.join(format!("{}.conf", r.config.label));
                std::fs::write(&path, r.config.to_text()).map_err(CliError::io(&path))?;
                Ok(path)
            })
            .collect()
    }

    /// Runs everything on `workers` threads and writes the group summaries.
    pub fn run(&self, out: &Path, workers: usize) -> Result<Vec<RunRecord>> {
        let runs = self.runs(out)?;
        let configs: Vec<_> = runs.iter().map(|r| r.config.clone()).collect();
        let records = run_all(&configs, workers)?;
        for (group, _) in &self.groups {
            let rows: Vec<_> = runs
                .iter()
                .zip(&records)
                .filter(|(r, _)| r.group == *group)
                .map(|(r, rec)| (r.axis_value.clone(), rec.f_max, rec.t_a))
                .collect();
            write_summary(&file(out, &format!("{}_{group}", self.name), "summary.csv"), &rows)?;
        }
        Ok(records)
    }
}
