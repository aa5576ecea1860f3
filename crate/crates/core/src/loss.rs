//! Transfer-quality losses for coupling and pulse optimization.
//!
//! Both losses have the form `1 − F + λ·(magnitude)`, where `F` is the largest
//! fidelity along the trajectory and the magnitude is `max|J|` for couplings or
//! `max|c(t)|` for pulses.

use alloc::vec::Vec;

use crate::control::{max_abs_on_grid, LeoControl, Passage, PulseFamily};
use crate::dynamics::{max_fidelity_and_arrival, propagate, BathParams, PropagateOptions, Propagator, Trajectory};
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::optimizer::{Evaluation, Objective};
use crate::spin::{collective_lindblad, pst_couplings, ChainSpec, LindbladKind};

/// Grid nodes used to find `c_max`.
pub const CMAX_NODES: usize = 4001;

/// Everything fixed during one optimization run.
#[derive(Clone, Debug)]
pub struct SimulationSetup {
    pub n_sites: usize,
    pub lindblad_kind: LindbladKind,
    pub bath: BathParams,
    pub propagator: Propagator,
    pub options: PropagateOptions,
    /// Couplings used when the pulse is the optimized quantity.
    pub couplings: Vec<f64>,
    lindblad: CMatrix,
}

impl SimulationSetup {
    /// Setup with PST couplings.
    pub fn new(
        n_sites: usize,
        lindblad_kind: LindbladKind,
        bath: BathParams,
        propagator: Propagator,
        options: PropagateOptions,
    ) -> Result<Self> {
        bath.validate()?;
        Ok(Self {
            n_sites,
            lindblad_kind,
            bath,
            propagator,
            options,
            couplings: pst_couplings(n_sites)?,
            lindblad: collective_lindblad(lindblad_kind, n_sites)?,
        })
    }

    pub fn with_couplings(mut self, couplings: Vec<f64>) -> Result<Self> {
        ChainSpec::new(self.n_sites, couplings.clone())?;
        self.couplings = couplings;
        Ok(self)
    }

    pub fn lindblad(&self) -> &CMatrix {
        &self.lindblad
    }

    pub fn chain(&self) -> Result<ChainSpec> {
        ChainSpec::new(self.n_sites, self.couplings.clone())
    }

    /// Propagates with explicit couplings and optional control.
    pub fn simulate(&self, couplings: &[f64], control: Option<&LeoControl>) -> Result<Trajectory> {
        let chain = ChainSpec::new(self.n_sites, couplings.to_vec())?;
        propagate(self.propagator, &chain, &self.lindblad, &self.bath, control, &self.options)
    }
}

/// `1 − F + λ·magnitude`
pub fn penalized_loss(fidelity: f64, penalty_weight: f64, magnitude: f64) -> f64 {
    1.0 - fidelity + penalty_weight * magnitude
}

/// `1 − F(J) + λ max|J_{i,i+1}|`
pub fn coupling_loss(couplings: &[f64], setup: &SimulationSetup, penalty_weight: f64) -> Result<Evaluation> {
    let trajectory = setup.simulate(couplings, None)?;
    let (fidelity, _) = max_fidelity_and_arrival(&trajectory);
    let j_max = couplings.iter().fold(0.0f64, |m, j| m.max(libm::fabs(*j)));
    Ok(Evaluation::new(penalized_loss(fidelity, penalty_weight, j_max), fidelity))
}

/// `1 − F(I) + λ c_max` with the LEO pulse along the PST passage.
pub fn pulse_loss(
    amplitudes: &[f64],
    family: &PulseFamily,
    setup: &SimulationSetup,
    penalty_weight: f64,
) -> Result<Evaluation> {
    let passage = Passage::new(&ChainSpec::pst(setup.n_sites)?);
    pulse_loss_along(amplitudes, family, setup, penalty_weight, &passage)
}

fn pulse_loss_along(
    amplitudes: &[f64],
    family: &PulseFamily,
    setup: &SimulationSetup,
    penalty_weight: f64,
    passage: &Passage,
) -> Result<Evaluation> {
    let shape = family.shape(amplitudes);
    let c_max = max_abs_on_grid(&shape, setup.options.t_total, CMAX_NODES);
    let control = LeoControl::new(shape, passage.clone());
    let trajectory = setup.simulate(&setup.couplings, Some(&control))?;
    let (fidelity, _) = max_fidelity_and_arrival(&trajectory);
    Ok(Evaluation::new(penalized_loss(fidelity, penalty_weight, c_max), fidelity))
}

/// [`coupling_loss`] as an optimizer objective.
#[derive(Clone, Debug)]
pub struct CouplingObjective<'a> {
    pub setup: &'a SimulationSetup,
    pub penalty_weight: f64,
}

impl Objective for CouplingObjective<'_> {
    fn evaluate(&self, params: &[f64]) -> Result<Evaluation> {
        coupling_loss(params, self.setup, self.penalty_weight)
    }
}

/// [`pulse_loss`] as an optimizer objective.
#[derive(Clone, Debug)]
pub struct PulseObjective<'a> {
    pub setup: &'a SimulationSetup,
    pub family: PulseFamily,
    pub penalty_weight: f64,
    passage: Passage,
}

impl<'a> PulseObjective<'a> {
    pub fn new(setup: &'a SimulationSetup, family: PulseFamily, penalty_weight: f64) -> Result<Self> {
        let passage = Passage::new(&ChainSpec::pst(setup.n_sites)?);
        Ok(Self { setup, family, penalty_weight, passage })
    }
}

impl Objective for PulseObjective<'_> {
    fn evaluate(&self, params: &[f64]) -> Result<Evaluation> {
        pulse_loss_along(params, &self.family, self.setup, self.penalty_weight, &self.passage)
    }
}
