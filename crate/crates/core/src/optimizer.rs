//! Adam with central finite-difference gradients and box projection.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Adam hyperparameters plus the loss settings that travel with them.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamConfig {
    /// Learning rate `α`.
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Stop once the loss drops below this value (`ξ`).
    pub loss_ceiling: f64,
    /// Maximum number of Adam updates (`k_max`).
    pub max_iterations: usize,
    /// Relaxation parameter `λ` of the penalty term.
    pub penalty_weight: f64,
    /// Relative finite-difference step: coordinate `i` is probed at
    /// `±fd_step·max(1, |xᵢ|)`.
    pub fd_step: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self::for_couplings()
    }
}

impl AdamConfig {
    pub fn for_couplings() -> Self {
        Self {
            alpha: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            loss_ceiling: 1e-3,
            max_iterations: 1000,
            penalty_weight: 0.01,
            fd_step: 1e-3,
        }
    }

    /// Larger step and smaller `c_max` weight, sized for O(100) amplitudes.
    pub fn for_pulses() -> Self {
        Self { alpha: 1.0, penalty_weight: 1e-5, ..Self::for_couplings() }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name, value: f64, ok: bool| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        check("alpha", self.alpha, self.alpha > 0.0)?;
        check("beta1", self.beta1, (0.0..1.0).contains(&self.beta1))?;
        check("beta2", self.beta2, (0.0..1.0).contains(&self.beta2))?;
        check("epsilon", self.epsilon, self.epsilon > 0.0)?;
        check("loss_ceiling", self.loss_ceiling, self.loss_ceiling > 0.0)?;
        check("penalty_weight", self.penalty_weight, self.penalty_weight >= 0.0)?;
        check("fd_step", self.fd_step, self.fd_step > 0.0)
    }
}

/// Elementwise box `[lower, upper]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Shape { expected: lower.len(), found: upper.len() });
        }
        for (&lo, &hi) in lower.iter().zip(&upper) {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::InvalidParameter { name: "lower bound", value: lo });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(alloc::vec![lower; n], alloc::vec![upper; n])
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn clamp(&self, i: usize, x: f64) -> f64 {
        x.max(self.lower[i]).min(self.upper[i])
    }

    pub fn project(&self, params: &mut [f64]) {
        for (i, p) in params.iter_mut().enumerate() {
            *p = self.clamp(i, *p);
        }
    }

    pub fn contains(&self, params: &[f64]) -> bool {
        params.len() == self.len() && params.iter().enumerate().all(|(i, &p)| p >= self.lower[i] && p <= self.upper[i])
    }
}

/// Loss at one parameter vector, with the fidelity behind it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub fidelity: f64,
}

impl Evaluation {
    pub fn new(loss: f64, fidelity: f64) -> Self {
        Self { loss, fidelity }
    }

    /// Plain scalar loss; the fidelity is not tracked (`NaN`).
    pub fn scalar(loss: f64) -> Self {
        Self { loss, fidelity: f64::NAN }
    }
}

/// A deterministic loss function.
///
/// Implementations must be safe to call concurrently: [`evaluate_batch`]
/// may be overridden to fan the probe points out to several threads.
///
/// [`evaluate_batch`]: Objective::evaluate_batch
pub trait Objective {
    fn evaluate(&self, params: &[f64]) -> Result<Evaluation>;

    fn evaluate_batch(&self, points: &[Vec<f64>]) -> Vec<Result<Evaluation>> {
        points.iter().map(|p| self.evaluate(p)).collect()
    }
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> Result<Evaluation>,
{
    fn evaluate(&self, params: &[f64]) -> Result<Evaluation> {
        self(params)
    }
}

/// Central-difference gradient.
///
/// Coordinate `i` is probed at `xᵢ ± h·max(1, |xᵢ|)`, clamped into `bounds`
/// when given; the quotient uses the actual probe separation, and a
/// coordinate pinned by a degenerate box gets a zero derivative.
pub fn finite_diff_gradient<O: Objective + ?Sized>(
    objective: &O,
    params: &[f64],
    h: f64,
    bounds: Option<&ParamBounds>,
) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter { name: "fd_step", value: h });
    }
    if let Some(b) = bounds {
        if b.len() != params.len() {
            return Err(Error::Shape { expected: params.len(), found: b.len() });
        }
    }
    let clamp = |i: usize, x: f64| bounds.map_or(x, |b| b.clamp(i, x));

    let mut points = Vec::with_capacity(2 * params.len());
    let mut spans = Vec::with_capacity(params.len());
    for (i, &x) in params.iter().enumerate() {
        let step = h * libm::fabs(x).max(1.0);
        let plus = clamp(i, x + step);
        let minus = clamp(i, x - step);
        spans.push(plus - minus);
        for probe in [plus, minus] {
            let mut p = params.to_vec();
            p[i] = probe;
            points.push(p);
        }
    }

    let mut values = objective.evaluate_batch(&points).into_iter();
    let mut gradient = Vec::with_capacity(params.len());
    for (i, span) in spans.into_iter().enumerate() {
        let wrap = |e| Error::Gradient { coordinate: i, source: alloc::boxed::Box::new(e) };
        let plus = values.next().expect("one value per probe").map_err(wrap)?;
        let minus = values.next().expect("one value per probe").map_err(wrap)?;
        let g = if span > 0.0 { (plus.loss - minus.loss) / span } else { 0.0 };
        if !g.is_finite() {
            return Err(wrap(Error::InvalidParameter { name: "gradient", value: g }));
        }
        gradient.push(g);
    }
    Ok(gradient)
}

/// Parameters and moment estimates after `iteration` updates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub params: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub iteration: usize,
}

impl AdamState {
    pub fn new(params: Vec<f64>) -> Self {
        let n = params.len();
        Self { params, m: alloc::vec![0.0; n], v: alloc::vec![0.0; n], iteration: 0 }
    }

    /// One Adam update, projected into `bounds` when given.
    pub fn step(&mut self, gradient: &[f64], config: &AdamConfig, bounds: Option<&ParamBounds>) -> Result<()> {
        if gradient.len() != self.params.len() {
            return Err(Error::Shape { expected: self.params.len(), found: gradient.len() });
        }
        self.iteration += 1;
        let k = self.iteration as f64;
        let correction1 = 1.0 - libm::pow(config.beta1, k);
        let correction2 = 1.0 - libm::pow(config.beta2, k);
        for (i, &g) in gradient.iter().enumerate() {
            self.m[i] = config.beta1 * self.m[i] + (1.0 - config.beta1) * g;
            self.v[i] = config.beta2 * self.v[i] + (1.0 - config.beta2) * g * g;
            let m_hat = self.m[i] / correction1;
            let v_hat = self.v[i] / correction2;
            self.params[i] -= config.alpha * m_hat / (libm::sqrt(v_hat) + config.epsilon);
        }
        if let Some(b) = bounds {
            b.project(&mut self.params);
        }
        Ok(())
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(
    state: &AdamState,
    gradient: &[f64],
    config: &AdamConfig,
    bounds: Option<&ParamBounds>,
) -> Result<AdamState> {
    let mut next = state.clone();
    next.step(gradient, config, bounds)?;
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    /// Loss fell below `ξ`.
    LossCeiling,
    /// `k_max` updates were spent.
    MaxIterations,
}

/// Outcome of [`optimize`]. Histories hold one entry per evaluated iterate,
/// starting with the initial point.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationReport {
    pub best_params: Vec<f64>,
    pub best_loss: f64,
    pub best_fidelity: f64,
    pub best_iteration: usize,
    pub loss_history: Vec<f64>,
    pub fidelity_history: Vec<f64>,
    pub termination: Termination,
}

/// An optimization stopped by an error, with everything recorded so far.
#[derive(Clone, Debug, PartialEq)]
pub struct Aborted {
    pub error: Error,
    pub loss_history: Vec<f64>,
    pub fidelity_history: Vec<f64>,
    pub best_params: Option<Vec<f64>>,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "optimization aborted after {} evaluations: {}", self.loss_history.len(), self.error)
    }
}

impl core::error::Error for Aborted {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Per-iteration progress passed to an observer.
#[derive(Clone, Copy, Debug)]
pub struct Progress<'a> {
    pub iteration: usize,
    pub params: &'a [f64],
    pub evaluation: Evaluation,
}

/// Runs Adam until the loss drops below `ξ` or `k_max` updates are spent.
pub fn optimize<O: Objective + ?Sized>(
    initial: &[f64],
    objective: &O,
    config: &AdamConfig,
    bounds: Option<&ParamBounds>,
) -> core::result::Result<OptimizationReport, Aborted> {
    optimize_observed(initial, objective, config, bounds, |_| {})
}

/// [`optimize`] with a callback after every evaluated iterate.
pub fn optimize_observed<O: Objective + ?Sized>(
    initial: &[f64],
    objective: &O,
    config: &AdamConfig,
    bounds: Option<&ParamBounds>,
    mut observer: impl FnMut(Progress<'_>),
) -> core::result::Result<OptimizationReport, Aborted> {
    let mut loss_history = Vec::new();
    let mut fidelity_history = Vec::new();
    let mut best: Option<(Vec<f64>, Evaluation, usize)> = None;

    macro_rules! bail {
        ($err:expr) => {
            return Err(Aborted {
                error: $err,
                loss_history,
                fidelity_history,
                best_params: best.map(|b| b.0),
            })
        };
    }

    if let Err(e) = config.validate() {
        bail!(e);
    }
    if let Some(b) = bounds {
        if b.len() != initial.len() {
            bail!(Error::Shape { expected: initial.len(), found: b.len() });
        }
    }

    let mut state = AdamState::new(initial.to_vec());
    if let Some(b) = bounds {
        b.project(&mut state.params);
    }

    let termination = loop {
        let eval = match objective.evaluate(&state.params) {
            Ok(e) => e,
            Err(e) => bail!(e),
        };
        loss_history.push(eval.loss);
        fidelity_history.push(eval.fidelity);
        observer(Progress { iteration: state.iteration, params: &state.params, evaluation: eval });
        if best.as_ref().is_none_or(|(_, b, _)| eval.loss < b.loss) {
            best = Some((state.params.clone(), eval, state.iteration));
        }

        if eval.loss < config.loss_ceiling {
            break Termination::LossCeiling;
        }
        if state.iteration >= config.max_iterations {
            break Termination::MaxIterations;
        }
        let gradient = match finite_diff_gradient(objective, &state.params, config.fd_step, bounds) {
            Ok(g) => g,
            Err(e) => bail!(e),
        };
        if let Err(e) = state.step(&gradient, config, bounds) {
            bail!(e);
        }
    };

    let (best_params, best_eval, best_iteration) = best.expect("at least one evaluation");
    Ok(OptimizationReport {
        best_params,
        best_loss: best_eval.loss,
        best_fidelity: best_eval.fidelity,
        best_iteration,
        loss_history,
        fidelity_history,
        termination,
    })
}
