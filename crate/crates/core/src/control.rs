//! Leakage-elimination control: the PST evolution passage, the rank-one LEO
//! Hamiltonian `c(t)|Ψ(t)⟩⟨Ψ(t)|` and the pulse families that shape `c(t)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};
use crate::spin::{site_mask, ChainSpec};

/// Control function `c(t)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PulseShape {
    NoControl,
    /// `I sin(πt/τ)`
    IdealSine { intensity: f64, half_period: f64 },
    /// `I(t) sin(ωt)` with `I(t)` piecewise constant over `P` equal segments
    /// of `t_total` and `ω = 2π/Δt`.
    PiecewiseSine { amplitudes: Vec<f64>, t_total: f64 },
    /// `Σᵢ Iᵢ sin((i+1)ωt)`
    FourierCombo { amplitudes: Vec<f64>, base_frequency: f64 },
}

impl PulseShape {
    /// `c(t)` without a horizon check.
    pub(crate) fn eval(&self, t: f64) -> f64 {
        match self {
            PulseShape::NoControl => 0.0,
            PulseShape::IdealSine { intensity, half_period } => intensity * libm::sin(PI * t / half_period),
            PulseShape::PiecewiseSine { amplitudes, t_total } => {
                if amplitudes.is_empty() {
                    return 0.0;
                }
                let p = amplitudes.len();
                let width = t_total / p as f64;
                let segment = (libm::floor(t / width) as isize).clamp(0, p as isize - 1) as usize;
                amplitudes[segment] * libm::sin(2.0 * PI / width * t)
            }
            PulseShape::FourierCombo { amplitudes, base_frequency } => amplitudes
                .iter()
                .enumerate()
                .map(|(i, a)| a * libm::sin((i + 1) as f64 * base_frequency * t))
                .sum(),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, PulseShape::NoControl)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        let finite = |amplitudes: &[f64]| match amplitudes.iter().find(|a| !a.is_finite()) {
            Some(&value) => Err(Error::InvalidParameter { name: "amplitude", value }),
            None => Ok(()),
        };
        match self {
            PulseShape::NoControl => Ok(()),
            PulseShape::IdealSine { intensity, half_period } => {
                finite(&[*intensity])?;
                positive("half_period", *half_period)
            }
            PulseShape::PiecewiseSine { amplitudes, t_total } => {
                if amplitudes.is_empty() {
                    return Err(Error::InvalidParameter { name: "segments", value: 0.0 });
                }
                finite(amplitudes)?;
                positive("t_total", *t_total)
            }
            PulseShape::FourierCombo { amplitudes, base_frequency } => {
                if amplitudes.is_empty() {
                    return Err(Error::InvalidParameter { name: "components", value: 0.0 });
                }
                finite(amplitudes)?;
                positive("base_frequency", *base_frequency)
            }
        }
    }
}

/// Amplitude-parameterized pulse family, as seen by the optimizer.
#[derive(Clone, Debug, PartialEq)]
pub enum PulseFamily {
    PiecewiseSine { t_total: f64 },
    FourierCombo { base_frequency: f64 },
}

impl PulseFamily {
    pub fn shape(&self, amplitudes: &[f64]) -> PulseShape {
        match *self {
            PulseFamily::PiecewiseSine { t_total } => {
                PulseShape::PiecewiseSine { amplitudes: amplitudes.to_vec(), t_total }
            }
            PulseFamily::FourierCombo { base_frequency } => {
                PulseShape::FourierCombo { amplitudes: amplitudes.to_vec(), base_frequency }
            }
        }
    }
}

/// `ω = 2π/Δt` with `Δt = t_total / segments`.
pub fn segment_frequency(t_total: f64, segments: usize) -> f64 {
    2.0 * PI / (t_total / segments as f64)
}

/// Relative slack on the horizon so that grid points computed as `k·dt` are accepted.
const HORIZON_SLACK: f64 = 1e-12;

/// `c(t)` for `t` in `[0, horizon]`.
pub fn pulse_value(shape: &PulseShape, t: f64, horizon: f64) -> Result<f64> {
    let slack = HORIZON_SLACK * horizon.max(1.0);
    if !(t >= -slack && t <= horizon + slack) {
        return Err(Error::Domain { t, horizon });
    }
    Ok(shape.eval(t))
}

/// Quadrature intervals for [`zero_area_residual`].
const AREA_INTERVALS: usize = 20_000;

/// `|∫₀^T c(t) dt|` by the composite trapezoid rule.
///
/// The interval count is rounded up to a multiple of the piecewise segment
/// count, so every node set includes the segment boundaries.
pub fn zero_area_residual(shape: &PulseShape, t_total: f64) -> f64 {
    let mut intervals = AREA_INTERVALS;
    if let PulseShape::PiecewiseSine { amplitudes, .. } = shape {
        let p = amplitudes.len().max(1);
        intervals = intervals.div_ceil(p) * p;
    }
    area_residual(|t| shape.eval(t), t_total, intervals)
}

/// `|∫₀^T f(t) dt|` with `intervals` trapezoid panels.
pub fn area_residual(f: impl Fn(f64) -> f64, t_total: f64, intervals: usize) -> f64 {
    let h = t_total / intervals as f64;
    let interior: f64 = (1..intervals).map(|k| f(k as f64 * h)).sum();
    libm::fabs(h * (interior + 0.5 * (f(0.0) + f(t_total))))
}

/// `max |c(t)|` over `nodes` evenly spaced points of `[0, t_total]`.
pub fn max_abs_on_grid(shape: &PulseShape, t_total: f64, nodes: usize) -> f64 {
    let nodes = nodes.max(2);
    let h = t_total / (nodes - 1) as f64;
    (0..nodes).map(|k| libm::fabs(shape.eval(k as f64 * h))).fold(0.0, f64::max)
}

/// Reference evolution `|Ψ(t)⟩ = exp(−iHt)|1⟩` of a chain.
///
/// `H` conserves the excitation number, so the evolution lives in the
/// `N`-dimensional single-excitation block, which is diagonalized once.
#[derive(Clone, Debug)]
pub struct Passage {
    n_sites: usize,
    energies: Vec<f64>,
    modes: Vec<Vec<f64>>,
}

impl Passage {
    pub fn new(chain: &ChainSpec) -> Self {
        let n = chain.n_sites();
        let mut block = vec![0.0; n * n];
        for (i, j) in chain.couplings().iter().enumerate() {
            block[i * n + i + 1] = 2.0 * j;
            block[(i + 1) * n + i] = 2.0 * j;
        }
        let eig = symmetric_eigen(n, &block);
        Self { n_sites: n, energies: eig.values, modes: eig.vectors }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Site amplitudes `⟨i|Ψ(t)⟩`, `i = 1..N`.
    pub fn site_amplitudes(&self, t: f64) -> Vec<C64> {
        let mut amps = vec![ZERO; self.n_sites];
        for (energy, mode) in self.energies.iter().zip(&self.modes) {
            let phase = C64::new(libm::cos(energy * t), -libm::sin(energy * t)) * mode[0];
            for (a, m) in amps.iter_mut().zip(mode) {
                *a += phase * m;
            }
        }
        amps
    }

    /// `|Ψ(t)⟩` in the full `2^N` space.
    pub fn state_at(&self, t: f64) -> Vec<C64> {
        let mut state = vec![ZERO; 1 << self.n_sites];
        for (site, a) in self.site_amplitudes(t).into_iter().enumerate() {
            state[site_mask(site + 1, self.n_sites)] = a;
        }
        state
    }
}

/// `exp(−iHt)|1⟩` for the given chain.
pub fn passage_state(chain: &ChainSpec, t: f64) -> Vec<C64> {
    Passage::new(chain).state_at(t)
}

/// Passage states precomputed on a fixed time grid.
#[derive(Clone, Debug)]
pub struct PassageCache {
    sample_times: Vec<f64>,
    states: Vec<Vec<C64>>,
}

impl PassageCache {
    pub fn new(passage: &Passage, sample_times: Vec<f64>) -> Self {
        let states = sample_times.iter().map(|&t| passage.state_at(t)).collect();
        Self { sample_times, states }
    }

    /// `intervals + 1` evenly spaced samples of `[0, t_total]`.
    pub fn uniform(passage: &Passage, t_total: f64, intervals: usize) -> Self {
        let h = t_total / intervals as f64;
        Self::new(passage, (0..=intervals).map(|k| k as f64 * h).collect())
    }

    pub fn sample_times(&self) -> &[f64] {
        &self.sample_times
    }

    pub fn state(&self, k: usize) -> &[C64] {
        &self.states[k]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `c |Ψ⟩⟨Ψ|`
pub fn leo_hamiltonian(c_value: f64, passage: &[C64]) -> CMatrix {
    let mut h = CMatrix::outer(passage, passage);
    h.scale(C64::new(c_value, 0.0));
    h
}

/// A pulse driving the LEO term along a passage.
#[derive(Clone, Debug)]
pub struct LeoControl {
    pub shape: PulseShape,
    pub passage: Passage,
}

impl LeoControl {
    pub fn new(shape: PulseShape, passage: Passage) -> Self {
        Self { shape, passage }
    }

    /// LEO pulse along the PST passage of an `n_sites` chain.
    pub fn along_pst(shape: PulseShape, n_sites: usize) -> Result<Self> {
        Ok(Self::new(shape, Passage::new(&ChainSpec::pst(n_sites)?)))
    }
}
