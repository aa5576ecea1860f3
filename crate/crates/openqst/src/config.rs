//! Experiment configuration in flat `section.key = value` text form.
//!
//! Lines starting with `#` are comments. Reals accept plain decimals and the
//! forms `pi`, `pi/4`, `3*pi/4`. Lists are comma separated, optionally in
//! brackets. Keys left out take defaults; several defaults are derived from
//! other settings (see [`ExperimentConfig::from_text`]).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use openqst_core::control::segment_frequency;
use openqst_core::{
    ideal_intensity, pst_couplings, AdamConfig, BathParams, ChainSpec, LindbladKind, ParamBounds, PulseFamily,
    PulseShape, Propagator,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Free-form run identifier; prefixes every output file.
    pub label: String,
    pub chain: ChainConfig,
    pub bath: BathConfig,
    pub lindblad: LindbladChoice,
    pub propagator: PropagatorChoice,
    pub horizon: HorizonConfig,
    pub control: ControlConfig,
    pub optimize: OptimizeTarget,
    pub optimizer: OptimizerConfig,
    pub output_dir: PathBuf,
    /// Parallel runs in a sweep.
    pub sweep_workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_sites: usize,
    pub couplings: CouplingMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    Pst,
    Explicit(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathConfig {
    /// `Γ`
    pub gamma_coupling: f64,
    /// `γ`
    pub gamma_memory: f64,
    /// `T`
    pub temperature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LindbladChoice {
    Lowering,
    SigmaX,
    SigmaZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorChoice {
    Qsd,
    Lindblad,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonConfig {
    pub t_total: f64,
    pub n_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseChoice {
    None,
    Ideal,
    Piecewise,
    Fourier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub family: PulseChoice,
    /// `τ` of the ideal pulse.
    pub half_period: f64,
    /// Ideal intensity `I`; also the amplitude cap for optimized pulses.
    pub intensity: f64,
    /// `P`
    pub segments: usize,
    /// `Q`
    pub components: usize,
    /// `ω` of the Fourier combination.
    pub base_frequency: f64,
    /// Explicit amplitudes; otherwise the ideal-pulse equivalent.
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeTarget {
    None,
    Couplings,
    Pulses,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub loss_ceiling: f64,
    pub max_iterations: usize,
    pub penalty_weight: f64,
    pub fd_step: f64,
    /// RK4 steps used inside the loss; the best parameters are re-simulated
    /// with `horizon.n_steps`.
    pub n_steps: usize,
    pub lower: f64,
    pub upper: f64,
    /// Threads evaluating finite-difference probes.
    pub workers: usize,
}

/// Sweepable bath parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    GammaCoupling,
    GammaMemory,
    Temperature,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Γ" | "Gamma" | "gamma_coupling" => Some(Axis::GammaCoupling),
            "γ" | "gamma" | "gamma_memory" => Some(Axis::GammaMemory),
            "T" | "temperature" => Some(Axis::Temperature),
            _ => None,
        }
    }

    /// Short tag used in file names.
    pub fn tag(self) -> &'static str {
        match self {
            Axis::GammaCoupling => "Gamma",
            Axis::GammaMemory => "gamma",
            Axis::Temperature => "T",
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_text("").expect("defaults are valid")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_text(&text)
    }

    /// Parses configuration text.
    ///
    /// Derived defaults: `control.half_period = horizon.t_total / 10`,
    /// `control.intensity` from the Bessel pulse condition,
    /// `control.base_frequency = 2π·P / t_total`, `optimizer.n_steps =
    /// horizon.n_steps`, and learning rate, penalty weight and bounds by
    /// optimization target (couplings: `0.01`, `0.01`, `[−3, −2]`; pulses:
    /// `1.0`, `1e-5`, `[−I, I]`).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut kv = Entries::read(text)?;

        let label = kv.text("run.label")?.unwrap_or_else(|| "run".to_owned());
        let n_sites = kv.parse("chain.n_sites", parse_count)?.unwrap_or(6);
        let couplings = kv
            .parse("chain.couplings", |s| match s {
                "pst" => Ok(CouplingMode::Pst),
                _ => parse_list(s).map(CouplingMode::Explicit),
            })?
            .unwrap_or(CouplingMode::Pst);
        let bath = BathConfig {
            gamma_coupling: kv.parse("bath.gamma_coupling", parse_real)?.unwrap_or(0.1),
            gamma_memory: kv.parse("bath.gamma_memory", parse_real)?.unwrap_or(2.0),
            temperature: kv.parse("bath.temperature", parse_real)?.unwrap_or(10.0),
        };
        let lindblad = kv
            .parse("system.lindblad", |s| match s {
                "lowering" => Ok(LindbladChoice::Lowering),
                "sigma_x" => Ok(LindbladChoice::SigmaX),
                "sigma_z" => Ok(LindbladChoice::SigmaZ),
                _ => Err("expected lowering, sigma_x or sigma_z".to_owned()),
            })?
            .unwrap_or(LindbladChoice::Lowering);
        let propagator = kv
            .parse("system.propagator", |s| match s {
                "qsd" => Ok(PropagatorChoice::Qsd),
                "lindblad" => Ok(PropagatorChoice::Lindblad),
                _ => Err("expected qsd or lindblad".to_owned()),
            })?
            .unwrap_or(PropagatorChoice::Qsd);
        let horizon = HorizonConfig {
            t_total: kv.parse("horizon.t_total", parse_real)?.unwrap_or(PI / 4.0),
            n_steps: kv.parse("horizon.n_steps", parse_count)?.unwrap_or(2000),
        };

        let family = kv
            .parse("control.family", |s| match s {
                "none" => Ok(PulseChoice::None),
                "ideal" => Ok(PulseChoice::Ideal),
                "piecewise" => Ok(PulseChoice::Piecewise),
                "fourier" => Ok(PulseChoice::Fourier),
                _ => Err("expected none, ideal, piecewise or fourier".to_owned()),
            })?
            .unwrap_or(PulseChoice::None);
        let half_period = kv.parse("control.half_period", parse_real)?.unwrap_or(horizon.t_total / 10.0);
        let intensity = match kv.parse("control.intensity", parse_real)? {
            Some(i) => i,
            None => ideal_intensity(half_period)?,
        };
        let segments = kv.parse("control.segments", parse_count)?.unwrap_or(5);
        let components = kv.parse("control.components", parse_count)?.unwrap_or(10);
        let base_frequency =
            kv.parse("control.base_frequency", parse_real)?.unwrap_or(segment_frequency(horizon.t_total, segments));
        let amplitudes = kv.parse("control.amplitudes", parse_list)?;
        let control =
            ControlConfig { family, half_period, intensity, segments, components, base_frequency, amplitudes };

        let couplings_on = kv.parse("optimize.couplings", parse_bool)?.unwrap_or(false);
        let pulses_on = kv.parse("optimize.pulses", parse_bool)?.unwrap_or(false);
        let optimize = match (couplings_on, pulses_on) {
            (true, true) => {
                return Err(CliError::Invalid("optimize.couplings and optimize.pulses are mutually exclusive".into()))
            }
            (true, false) => OptimizeTarget::Couplings,
            (false, true) => OptimizeTarget::Pulses,
            (false, false) => OptimizeTarget::None,
        };

        let base = match optimize {
            OptimizeTarget::Pulses => AdamConfig::for_pulses(),
            _ => AdamConfig::for_couplings(),
        };
        let (lower, upper) = match optimize {
            OptimizeTarget::Pulses => (-intensity.abs(), intensity.abs()),
            _ => (-3.0, -2.0),
        };
        let optimizer = OptimizerConfig {
            alpha: kv.parse("optimizer.alpha", parse_real)?.unwrap_or(base.alpha),
            beta1: kv.parse("optimizer.beta1", parse_real)?.unwrap_or(base.beta1),
            beta2: kv.parse("optimizer.beta2", parse_real)?.unwrap_or(base.beta2),
            epsilon: kv.parse("optimizer.epsilon", parse_real)?.unwrap_or(base.epsilon),
            loss_ceiling: kv.parse("optimizer.loss_ceiling", parse_real)?.unwrap_or(base.loss_ceiling),
            max_iterations: kv.parse("optimizer.max_iterations", parse_count)?.unwrap_or(200),
            penalty_weight: kv.parse("optimizer.penalty_weight", parse_real)?.unwrap_or(base.penalty_weight),
            fd_step: kv.parse("optimizer.fd_step", parse_real)?.unwrap_or(base.fd_step),
            n_steps: kv.parse("optimizer.n_steps", parse_count)?.unwrap_or(horizon.n_steps),
            lower: kv.parse("optimizer.lower", parse_real)?.unwrap_or(lower),
            upper: kv.parse("optimizer.upper", parse_real)?.unwrap_or(upper),
            workers: kv.parse("optimizer.workers", parse_count)?.unwrap_or(1),
        };
        let output_dir = kv.text("output.dir")?.map_or_else(|| PathBuf::from("results"), PathBuf::from);
        let sweep_workers = kv.parse("sweep.workers", parse_count)?.unwrap_or(1);
        kv.finish()?;

        let config = Self {
            label,
            chain: ChainConfig { n_sites, couplings },
            bath,
            lindblad,
            propagator,
            horizon,
            control,
            optimize,
            optimizer,
            output_dir,
            sweep_workers,
        };
        config.validate()?;
        Ok(config)
    }

    /// Every setting, one key per line; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("run.label", self.label.clone());
        put("chain.n_sites", self.chain.n_sites.to_string());
        put(
            "chain.couplings",
            match &self.chain.couplings {
                CouplingMode::Pst => "pst".into(),
                CouplingMode::Explicit(j) => list(j),
            },
        );
        put("bath.gamma_coupling", self.bath.gamma_coupling.to_string());
        put("bath.gamma_memory", self.bath.gamma_memory.to_string());
        put("bath.temperature", self.bath.temperature.to_string());
        put("system.lindblad", serde_name(&self.lindblad));
        put("system.propagator", serde_name(&self.propagator));
        put("horizon.t_total", self.horizon.t_total.to_string());
        put("horizon.n_steps", self.horizon.n_steps.to_string());
        let c = &self.control;
        put("control.family", serde_name(&c.family));
        put("control.half_period", c.half_period.to_string());
        put("control.intensity", c.intensity.to_string());
        put("control.segments", c.segments.to_string());
        put("control.components", c.components.to_string());
        put("control.base_frequency", c.base_frequency.to_string());
        if let Some(a) = &c.amplitudes {
            put("control.amplitudes", list(a));
        }
        put("optimize.couplings", (self.optimize == OptimizeTarget::Couplings).to_string());
        put("optimize.pulses", (self.optimize == OptimizeTarget::Pulses).to_string());
        let o = &self.optimizer;
        put("optimizer.alpha", o.alpha.to_string());
        put("optimizer.beta1", o.beta1.to_string());
        put("optimizer.beta2", o.beta2.to_string());
        put("optimizer.epsilon", o.epsilon.to_string());
        put("optimizer.loss_ceiling", o.loss_ceiling.to_string());
        put("optimizer.max_iterations", o.max_iterations.to_string());
        put("optimizer.penalty_weight", o.penalty_weight.to_string());
        put("optimizer.fd_step", o.fd_step.to_string());
        put("optimizer.n_steps", o.n_steps.to_string());
        put("optimizer.lower", o.lower.to_string());
        put("optimizer.upper", o.upper.to_string());
        put("optimizer.workers", o.workers.to_string());
        put("output.dir", self.output_dir.display().to_string());
        put("sweep.workers", self.sweep_workers.to_string());
        s
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(CliError::Invalid(m));
        if self.label.is_empty() || self.label.contains(['/', '\\']) {
            return invalid(format!("run.label {:?} must be a non-empty file-name fragment", self.label));
        }
        self.chain_spec()?;
        self.bath_params()?;
        if !(self.horizon.t_total > 0.0 && self.horizon.t_total.is_finite()) {
            return invalid(format!("horizon.t_total must be positive, got {}", self.horizon.t_total));
        }
        if self.horizon.n_steps == 0 || self.optimizer.n_steps == 0 {
            return invalid("step counts must be positive".into());
        }
        if self.control.segments == 0 || self.control.components == 0 {
            return invalid("control.segments and control.components must be positive".into());
        }
        if self.optimizer.workers == 0 || self.sweep_workers == 0 {
            return invalid("worker counts must be positive".into());
        }
        if let Some(a) = &self.control.amplitudes {
            let expected = match self.control.family {
                PulseChoice::Piecewise => self.control.segments,
                PulseChoice::Fourier => self.control.components,
                _ => return invalid("control.amplitudes needs control.family = piecewise or fourier".into()),
            };
            if a.len() != expected {
                return invalid(format!("control.amplitudes has {} entries, expected {expected}", a.len()));
            }
        }
        match self.optimize {
            OptimizeTarget::Pulses if !matches!(self.control.family, PulseChoice::Piecewise | PulseChoice::Fourier) => {
                return invalid("optimize.pulses needs control.family = piecewise or fourier".into());
            }
            OptimizeTarget::Couplings if self.control.family != PulseChoice::None => {
                return invalid("optimize.couplings runs without control; set control.family = none".into());
            }
            _ => {}
        }
        self.adam_config().validate()?;
        ParamBounds::uniform(1, self.optimizer.lower, self.optimizer.upper)?;
        Ok(())
    }

    pub fn bath_params(&self) -> Result<BathParams> {
        Ok(BathParams::new(self.bath.gamma_coupling, self.bath.gamma_memory, self.bath.temperature)?)
    }

    pub fn lindblad_kind(&self) -> LindbladKind {
        match self.lindblad {
            LindbladChoice::Lowering => LindbladKind::CollectiveLowering,
            LindbladChoice::SigmaX => LindbladKind::CollectiveSigmaX,
            LindbladChoice::SigmaZ => LindbladKind::CollectiveSigmaZ,
        }
    }

    pub fn propagator(&self) -> Propagator {
        match self.propagator {
            PropagatorChoice::Qsd => Propagator::Qsd,
            PropagatorChoice::Lindblad => Propagator::Lindblad,
        }
    }

    pub fn couplings(&self) -> Result<Vec<f64>> {
        Ok(match &self.chain.couplings {
            CouplingMode::Pst => pst_couplings(self.chain.n_sites)?,
            CouplingMode::Explicit(j) => j.clone(),
        })
    }

    pub fn chain_spec(&self) -> Result<ChainSpec> {
        Ok(ChainSpec::new(self.chain.n_sites, self.couplings()?)?)
    }

    pub fn adam_config(&self) -> AdamConfig {
        let o = &self.optimizer;
        AdamConfig {
            alpha: o.alpha,
            beta1: o.beta1,
            beta2: o.beta2,
            epsilon: o.epsilon,
            loss_ceiling: o.loss_ceiling,
            max_iterations: o.max_iterations,
            penalty_weight: o.penalty_weight,
            fd_step: o.fd_step,
        }
    }

    /// Amplitude-parameterized family for piecewise or Fourier control.
    pub fn pulse_family(&self) -> Option<PulseFamily> {
        match self.control.family {
            PulseChoice::Piecewise => Some(PulseFamily::PiecewiseSine { t_total: self.horizon.t_total }),
            PulseChoice::Fourier => Some(PulseFamily::FourierCombo { base_frequency: self.control.base_frequency }),
            _ => None,
        }
    }

    /// Configured amplitudes, or the ones reproducing the ideal pulse:
    /// `[I; P]` piecewise, `[I, 0, …]` Fourier.
    pub fn pulse_amplitudes(&self) -> Vec<f64> {
        let c = &self.control;
        if let Some(a) = &c.amplitudes {
            return a.clone();
        }
        match c.family {
            PulseChoice::Piecewise => vec![c.intensity; c.segments],
            PulseChoice::Fourier => {
                let mut a = vec![0.0; c.components];
                a[0] = c.intensity;
                a
            }
            _ => Vec::new(),
        }
    }

    pub fn pulse_shape(&self) -> PulseShape {
        match self.control.family {
            PulseChoice::None => PulseShape::NoControl,
            PulseChoice::Ideal => {
                PulseShape::IdealSine { intensity: self.control.intensity, half_period: self.control.half_period }
            }
            _ => self.pulse_family().expect("amplitude family").shape(&self.pulse_amplitudes()),
        }
    }

    pub fn with_axis(&self, axis: Axis, value: f64) -> Self {
        let mut c = self.clone();
        match axis {
            Axis::GammaCoupling => c.bath.gamma_coupling = value,
            Axis::GammaMemory => c.bath.gamma_memory = value,
            Axis::Temperature => c.bath.temperature = value,
        }
        c
    }
}

fn serde_name<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value).ok().and_then(|v| v.as_str().map(str::to_owned)).expect("unit variant")
}

/// Raw `key = value` pairs with their line numbers.
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn read(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config { line, message: format!("expected `key = value`, found {content:?}") });
            };
            let key = key.trim().to_owned();
            if map.insert(key.clone(), (line, value.trim().to_owned())).is_some() {
                return Err(CliError::Config { line, message: format!("duplicate key `{key}`") });
            }
        }
        Ok(Self(map))
    }

    fn text(&mut self, key: &str) -> Result<Option<String>> {
        Ok(self.0.remove(key).map(|(_, v)| v))
    }

    fn parse<T>(&mut self, key: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.0.remove(key) {
            None => Ok(None),
            Some((line, v)) => f(&v).map(Some).map_err(|m| CliError::Config { line, message: format!("{key}: {m}") }),
        }
    }

    fn finish(self) -> Result<()> {
        match self.0.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(CliError::Config { line, message: format!("unknown key `{key}`") }),
        }
    }
}

/// Decimal real or `[k*]pi[/d]`.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let bad = || format!("expected a real number, found {s:?}");
    let value = if let Some(pos) = s.find("pi") {
        let (head, tail) = (&s[..pos], &s[pos + 2..]);
        let factor = match head.trim().strip_suffix('*') {
            Some(k) => k.trim().parse::<f64>().map_err(|_| bad())?,
            None if head.trim().is_empty() => 1.0,
            None => return Err(bad()),
        };
        let divisor = match tail.trim().strip_prefix('/') {
            Some(d) => d.trim().parse::<f64>().map_err(|_| bad())?,
            None if tail.trim().is_empty() => 1.0,
            None => return Err(bad()),
        };
        factor * PI / divisor
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
    let values: Vec<f64> = inner.split(',').map(parse_real).collect::<std::result::Result<_, _>>()?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, found {s:?}"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(format!("expected true or false, found {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!(c.chain.n_sites, 6);
        assert_eq!(c.chain.couplings, CouplingMode::Pst);
        assert_eq!(c.horizon.n_steps, 2000);
        assert_eq!(c.optimizer.n_steps, 2000);
        assert_eq!(c.optimizer.max_iterations, 200);
        assert!((c.control.half_period - PI / 40.0).abs() < 1e-15);
        assert!((c.control.intensity - 96.193).abs() < 1e-3);
        assert!((c.control.base_frequency - 40.0).abs() < 1e-12);
        assert_eq!((c.optimizer.lower, c.optimizer.upper), (-3.0, -2.0));
    }

    #[test]
    fn pulse_target_switches_derived_defaults() {
        let c = ExperimentConfig::from_text("control.family = fourier\noptimize.pulses = true").unwrap();
        assert_eq!(c.optimizer.alpha, 1.0);
        assert_eq!(c.optimizer.penalty_weight, 1e-5);
        assert_eq!(c.optimizer.upper, c.control.intensity);
        assert_eq!(c.pulse_amplitudes()[0], c.control.intensity);
        assert_eq!(c.pulse_amplitudes().len(), 10);
    }

    #[test]
    fn reals() {
        assert_eq!(parse_real("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_real("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_real(" 0.25 ").unwrap(), 0.25);
        assert!(parse_real("pie").is_err());
        assert!(parse_real("inf").is_err());
        assert_eq!(parse_list("[-1, -2.5,pi]").unwrap(), vec![-1.0, -2.5, PI]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = ExperimentConfig::from_text("# c\n\nbath.gamma_memory = 2\nbath.bogus = 1").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 4, .. }), "{e}");
        let e = ExperimentConfig::from_text("chain.n_sites = x").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 1, .. }));
        let e = ExperimentConfig::from_text("a = 1\na = 2").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 2, .. }));
        assert!(ExperimentConfig::from_text("no equals sign").is_err());
    }

    #[test]
    fn exclusive_targets() {
        let both = "control.family = fourier\noptimize.pulses = true\noptimize.couplings = true";
        assert!(ExperimentConfig::from_text(both).is_err());
        assert!(ExperimentConfig::from_text("optimize.pulses = true").is_err());
    }

    #[test]
    fn explicit_couplings_are_checked_against_chain_length() {
        let c = ExperimentConfig::from_text("chain.n_sites = 3\nchain.couplings = -1, -2").unwrap();
        assert_eq!(c.couplings().unwrap(), vec![-1.0, -2.0]);
        assert!(ExperimentConfig::from_text("chain.n_sites = 4\nchain.couplings = -1, -2").is_err());
    }
}
