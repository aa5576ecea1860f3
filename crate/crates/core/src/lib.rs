//! Quantum state transfer through an open XY spin chain.
//!
//! The crate propagates the reduced density matrix of the chain under a
//! non-Markovian finite-temperature master-equation hierarchy (or its Lindblad
//! limit), builds leakage-elimination (LEO) control pulses, and optimizes
//! either the couplings or the pulse amplitudes with Adam.
//!
//! It is `no_std` and only needs an allocator; IO, configuration and the
//! command-line driver live in the `openqst` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bessel;
pub mod control;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod linalg;
pub mod loss;
pub mod optimizer;
pub mod spin;

pub use bessel::{first_j0_zero, ideal_intensity};
pub use control::{
    leo_hamiltonian, passage_state, pulse_value, zero_area_residual, LeoControl, Passage, PassageCache, PulseFamily,
    PulseShape,
};
pub use dynamics::{
    fidelity, lindblad_rhs, max_fidelity_and_arrival, propagate, propagate_closed, propagate_lindblad, propagate_qsd, qsd_rhs,
    BathParams, Derivative, DynamicState, PropagateOptions, Propagator, Trajectory,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use loss::{coupling_loss, pulse_loss, CouplingObjective, PulseObjective, SimulationSetup};
pub use optimizer::{
    adam_step, finite_diff_gradient, optimize, AdamConfig, AdamState, Aborted, Evaluation, Objective,
    OptimizationReport, ParamBounds, Termination,
};
pub use spin::{basis_state, build_xy_hamiltonian, collective_lindblad, pst_couplings, ChainSpec, LindbladKind};
