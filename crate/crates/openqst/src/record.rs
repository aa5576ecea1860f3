//! Serialized outcome of one run.

use std::path::PathBuf;

use openqst_core::{OptimizationReport, Termination};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Simulate,
    Optimize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: RunKind,
    pub config: ExperimentConfig,
    /// `t,fidelity` of the simulated (or best optimized) parameters.
    pub trajectory_csv: PathBuf,
    /// `iteration,loss,fidelity`, optimization runs only.
    pub loss_csv: Option<PathBuf>,
    pub report: Option<ReportRecord>,
    pub f_max: f64,
    pub t_a: f64,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationRecord {
    LossCeiling,
    MaxIterations,
}

/// Optimization report with the starting point attached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub initial_params: Vec<f64>,
    pub best_params: Vec<f64>,
    pub best_loss: f64,
    /// Fidelity seen by the loss, at the optimization resolution.
    pub best_fidelity: f64,
    pub best_iteration: usize,
    pub loss_history: Vec<f64>,
    pub fidelity_history: Vec<f64>,
    pub termination: TerminationRecord,
}

impl ReportRecord {
    pub fn new(initial_params: Vec<f64>, report: OptimizationReport) -> Self {
        Self {
            initial_params,
            best_params: report.best_params,
            best_loss: report.best_loss,
            best_fidelity: report.best_fidelity,
            best_iteration: report.best_iteration,
            loss_history: report.loss_history,
            fidelity_history: report.fidelity_history,
            termination: match report.termination {
                Termination::LossCeiling => TerminationRecord::LossCeiling,
                Termination::MaxIterations => TerminationRecord::MaxIterations,
            },
        }
    }
}
