//! Scenario files and built-in scenarios.
//!
//! A scenario file is a JSON document with sections `domain`, `epsilon`,
//! `diffusion`, `nonlocal`, `nonlinearity`, `delay`, `forcing`,
//! `initial_history` and `solver`; unknown keys are an error. Built-ins
//! are addressed as `default:<name>` and go through the same validation
//! path as user files.
//!
//! Section shapes (see the repository README for a complete example):
//!
//! - `epsilon.kind`: `constant | decreasing-tanh | increasing-tanh |
//!   custom-sampled`
//! - `diffusion.form`: `constant | smooth-bounded`
//! - `nonlinearity.form`: `zero | cubic`
//! - `delay.kind`: `none | discrete | variable | distributed`
//! - `forcing.modes[].kind`: `constant | sin`; `forcing.tail` optional
//! - `initial_history.modes[].kind`: `constant | exp | cos`

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    sampled_slopes, DelayKernel, DelayKind, DiffusionForm, DiffusionLaw, DomainSpec, EpsKind,
    Forcing, ForcingMode, ForcingShape, ForcingTail, HistoryMode, HistoryShape, InitialHistory,
    Nonlinearity, NonlinearityForm, NonlocalFunctional, ProblemSpec, TimeProfile,
};
use crate::solver::SolverConfig;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("hypothesis {name} violated at {witness} (margin {margin}): {detail}")]
    HypothesisViolation { name: &'static str, witness: f64, margin: f64, detail: String },
    #[error("unknown scenario `{0}` (known: {})", SCENARIO_NAMES.join(", "))]
    UnknownScenario(String),
    #[error("invalid scenario field {section}.{field}: {reason}")]
    InvalidField { section: &'static str, field: &'static str, reason: String },
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
}

fn bad(
    section: &'static str,
    field: &'static str,
    reason: impl Into<String>,
) -> ProblemError {
    ProblemError::InvalidField { section, field, reason: reason.into() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub domain: DomainSection,
    pub epsilon: EpsilonSection,
    pub diffusion: DiffusionSection,
    pub nonlocal: NonlocalSection,
    pub nonlinearity: NonlinearitySection,
    pub delay: DelaySection,
    pub forcing: ForcingSection,
    pub initial_history: HistorySection,
    pub solver: SolverSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub length: f64,
    pub mode_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSection {
    pub kind: String,
    /// `constant`: the value; tanh kinds: the amplitude alpha.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// The declared bound `L` of `sup(|eps| + |eps'|)`.
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    /// `custom-sampled` only: uniform samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionSection {
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlocalSection {
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic: Option<f64>,
    pub growth_p: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub eta_tilde: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    pub kind: String,
    /// Delay window length `k`.
    pub window: f64,
    /// The Lipschitz constant `C_g`.
    pub lipschitz_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    #[serde(default)]
    pub modes: Vec<ForcingModeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<ForcingTailSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingModeSection {
    pub mode: usize,
    pub kind: String,
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTailSection {
    pub start_mode: usize,
    pub amplitude: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HistorySection {
    #[serde(default)]
    pub modes: Vec<HistoryModeSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryModeSection {
    pub mode: usize,
    pub kind: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub grid_size: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_record_every() -> usize {
    1
}

impl ScenarioFile {
    pub fn to_spec(&self) -> Result<(ProblemSpec, SolverConfig), ProblemError> {
        if self.domain.length <= 0.0 {
            return Err(bad("domain", "length", "must be positive"));
        }
        if self.domain.mode_count == 0 {
            return Err(bad("domain", "mode_count", "must be at least 1"));
        }
        let domain = DomainSpec {
            length: self.domain.length,
            mode_count: self.domain.mode_count,
        };

        let eps_kind = match self.epsilon.kind.as_str() {
            "constant" => EpsKind::Constant {
                value: self
                    .epsilon
                    .amplitude
                    .ok_or_else(|| bad("epsilon", "amplitude", "constant profile needs a value"))?,
            },
            "decreasing-tanh" => EpsKind::DecreasingTanh {
                amplitude: self
                    .epsilon
                    .amplitude
                    .ok_or_else(|| bad("epsilon", "amplitude", "tanh profile needs an amplitude"))?,
            },
            "increasing-tanh" => EpsKind::IncreasingTanh {
                amplitude: self
                    .epsilon
                    .amplitude
                    .ok_or_else(|| bad("epsilon", "amplitude", "tanh profile needs an amplitude"))?,
            },
            "custom-sampled" => {
                let t0 = self.epsilon.t0.ok_or_else(|| bad("epsilon", "t0", "required"))?;
                let dt = self.epsilon.dt.ok_or_else(|| bad("epsilon", "dt", "required"))?;
                let values = self
                    .epsilon
                    .values
                    .clone()
                    .ok_or_else(|| bad("epsilon", "values", "required"))?;
                if dt <= 0.0 || values.len() < 2 {
                    return Err(bad("epsilon", "values", "need dt > 0 and at least 2 samples"));
                }
                let derivs = sampled_slopes(&values, dt);
                EpsKind::CustomSampled { t0, dt, values, derivs }
            }
            other => return Err(bad("epsilon", "kind", format!("unknown kind `{other}`"))),
        };
        let epsilon = TimeProfile {
            kind: eps_kind,
            bound: self.epsilon.bound,
            eps_min: self.epsilon.eps_min.unwrap_or(1e-6),
        };

        let diff_form = match self.diffusion.form.as_str() {
            "constant" => DiffusionForm::Constant {
                value: self
                    .diffusion
                    .value
                    .ok_or_else(|| bad("diffusion", "value", "constant form needs a value"))?,
            },
            "smooth-bounded" => DiffusionForm::SmoothBounded {
                base: self
                    .diffusion
                    .base
                    .ok_or_else(|| bad("diffusion", "base", "smooth-bounded form needs a base"))?,
                scale: self
                    .diffusion
                    .scale
                    .ok_or_else(|| bad("diffusion", "scale", "smooth-bounded form needs a scale"))?,
            },
            other => return Err(bad("diffusion", "form", format!("unknown form `{other}`"))),
        };
        let diffusion = DiffusionLaw {
            form: diff_form,
            lower: self.diffusion.lower,
            upper: self.diffusion.upper,
        };

        let nonlocal = NonlocalFunctional { weights: self.nonlocal.weights.clone() };

        let nl_form = match self.nonlinearity.form.as_str() {
            "zero" => NonlinearityForm::Zero,
            "cubic" => NonlinearityForm::Cubic {
                linear: self
                    .nonlinearity
                    .linear
                    .ok_or_else(|| bad("nonlinearity", "linear", "cubic form needs it"))?,
                cubic: self
                    .nonlinearity
                    .cubic
                    .ok_or_else(|| bad("nonlinearity", "cubic", "cubic form needs it"))?,
            },
            other => return Err(bad("nonlinearity", "form", format!("unknown form `{other}`"))),
        };
        let nonlinearity = Nonlinearity {
            form: nl_form,
            growth_p: self.nonlinearity.growth_p,
            c0: self.nonlinearity.c0,
            c1: self.nonlinearity.c1,
            c2: self.nonlinearity.c2,
            eta_tilde: self.nonlinearity.eta_tilde,
        };

        if self.delay.window <= 0.0 {
            return Err(bad("delay", "window", "must be positive"));
        }
        let delay_kind = match self.delay.kind.as_str() {
            "none" => DelayKind::None,
            "discrete" => DelayKind::Discrete {
                lag: self.delay.lag.ok_or_else(|| bad("delay", "lag", "discrete kind needs it"))?,
                gain: self.delay.gain.ok_or_else(|| bad("delay", "gain", "discrete kind needs it"))?,
            },
            "variable" => DelayKind::VariableLag {
                base: self.delay.base.ok_or_else(|| bad("delay", "base", "variable kind needs it"))?,
                amplitude: self
                    .delay
                    .amplitude
                    .ok_or_else(|| bad("delay", "amplitude", "variable kind needs it"))?,
                frequency: self
                    .delay
                    .frequency
                    .ok_or_else(|| bad("delay", "frequency", "variable kind needs it"))?,
                gain: self.delay.gain.ok_or_else(|| bad("delay", "gain", "variable kind needs it"))?,
            },
            "distributed" => {
                let kernel = self
                    .delay
                    .kernel
                    .clone()
                    .ok_or_else(|| bad("delay", "kernel", "distributed kind needs samples"))?;
                if kernel.len() < 2 {
                    return Err(bad("delay", "kernel", "need at least 2 samples"));
                }
                DelayKind::Distributed { kernel }
            }
            other => return Err(bad("delay", "kind", format!("unknown kind `{other}`"))),
        };
        let delay = DelayKernel {
            kind: delay_kind,
            window: self.delay.window,
            lipschitz_bound: self.delay.lipschitz_bound,
        };

        let mut modes = Vec::new();
        for m in &self.forcing.modes {
            if m.mode == 0 {
                return Err(bad("forcing", "mode", "mode indices are 1-based"));
            }
            let shape = match m.kind.as_str() {
                "constant" => ForcingShape::Constant { amplitude: m.amplitude },
                "sin" => ForcingShape::Sin {
                    amplitude: m.amplitude,
                    frequency: m
                        .frequency
                        .ok_or_else(|| bad("forcing", "frequency", "sin kind needs it"))?,
                    phase: m.phase.unwrap_or(0.0),
                },
                other => return Err(bad("forcing", "kind", format!("unknown kind `{other}`"))),
            };
            modes.push(ForcingMode { mode: m.mode, shape });
        }
        let tail = match &self.forcing.tail {
            None => None,
            Some(t) => {
                if t.start_mode == 0 {
                    return Err(bad("forcing", "tail.start_mode", "mode indices are 1-based"));
                }
                Some(ForcingTail {
                    start_mode: t.start_mode,
                    amplitude: t.amplitude,
                    power: t.power,
                })
            }
        };
        let forcing = Forcing { modes, tail };

        let mut hist_modes = Vec::new();
        for m in &self.initial_history.modes {
            if m.mode == 0 {
                return Err(bad("initial_history", "mode", "mode indices are 1-based"));
            }
            let shape = match m.kind.as_str() {
                "constant" => HistoryShape::Constant { value: m.value },
                "exp" => HistoryShape::Exp {
                    value: m.value,
                    rate: m.rate.ok_or_else(|| bad("initial_history", "rate", "exp kind needs it"))?,
                },
                "cos" => HistoryShape::Cos {
                    value: m.value,
                    frequency: m
                        .frequency
                        .ok_or_else(|| bad("initial_history", "frequency", "cos kind needs it"))?,
                    phase: m.phase.unwrap_or(0.0),
                },
                other => return Err(bad("initial_history", "kind", format!("unknown kind `{other}`"))),
            };
            hist_modes.push(HistoryMode { mode: m.mode, shape });
        }
        let initial_history = InitialHistory { modes: hist_modes };

        let spec = ProblemSpec {
            domain,
            epsilon,
            diffusion,
            nonlocal,
            nonlinearity,
            delay,
            forcing,
            initial_history,
        };
        let cfg = SolverConfig::new(self.solver.dt, self.solver.grid_size, self.solver.record_every);
        cfg.validate(&spec).map_err(|e| bad("solver", "dt", e.to_string()))?;
        Ok((spec, cfg))
    }
}

/// Built-in scenario names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    LinearSingleMode,
    CubicDelayed,
    IncreasingEps,
    DecreasingEps,
    HMinusOneTail,
}

pub const SCENARIO_NAMES: [&str; 5] = [
    "linear-single-mode",
    "cubic-delayed",
    "increasing-eps",
    "decreasing-eps",
    "h-minus-one-tail",
];

impl FromStr for ScenarioName {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear-single-mode" => Ok(Self::LinearSingleMode),
            "cubic-delayed" => Ok(Self::CubicDelayed),
            "increasing-eps" => Ok(Self::IncreasingEps),
            "decreasing-eps" => Ok(Self::DecreasingEps),
            "h-minus-one-tail" => Ok(Self::HMinusOneTail),
            other => Err(ProblemError::UnknownScenario(other.to_string())),
        }
    }
}

impl std::fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::LinearSingleMode => "linear-single-mode",
            Self::CubicDelayed => "cubic-delayed",
            Self::IncreasingEps => "increasing-eps",
            Self::DecreasingEps => "decreasing-eps",
            Self::HMinusOneTail => "h-minus-one-tail",
        };
        f.write_str(s)
    }
}

/// The scenario file behind each built-in.
pub fn scenario_file(name: ScenarioName) -> ScenarioFile {
    match name {
        // The analytically solvable case: one mode, constant coefficients,
        // no reaction, no delay, no forcing. u_1(t) = c exp(-a0 lambda1
        // (t - tau) / (1 + eps0 lambda1)).
        ScenarioName::LinearSingleMode => ScenarioFile {
            domain: DomainSection { length: std::f64::consts::PI, mode_count: 1 },
            epsilon: EpsilonSection {
                kind: "constant".into(),
                amplitude: Some(1.0),
                bound: 1.0,
                eps_min: Some(1e-6),
                t0: None,
                dt: None,
                values: None,
            },
            diffusion: DiffusionSection {
                form: "constant".into(),
                value: Some(3.0),
                base: None,
                scale: None,
                lower: 3.0,
                upper: 3.0,
            },
            nonlocal: NonlocalSection { weights: vec![1.0] },
            // f = 0 satisfies the sign condition on the probe range with a
            // vanishing C2; dissipation comes entirely from the diffusion
            nonlinearity: NonlinearitySection {
                form: "zero".into(),
                linear: None,
                cubic: None,
                growth_p: 2.0,
                c0: 0.01,
                c1: 1.0,
                c2: 1e-8,
                eta_tilde: 1e-6,
            },
            delay: DelaySection {
                kind: "none".into(),
                window: 1.0,
                lipschitz_bound: 0.0,
                lag: None,
                gain: None,
                base: None,
                amplitude: None,
                frequency: None,
                kernel: None,
            },
            forcing: ForcingSection::default(),
            initial_history: HistorySection {
                modes: vec![HistoryModeSection {
                    mode: 1,
                    kind: "constant".into(),
                    value: 1.0,
                    rate: None,
                    frequency: None,
                    phase: None,
                }],
            },
            solver: SolverSection { dt: 1.0 / 64.0, grid_size: 8, record_every: 1 },
        },
        ScenarioName::CubicDelayed => cubic_like(
            EpsilonSection {
                kind: "decreasing-tanh".into(),
                amplitude: Some(0.25),
                bound: 1.29,
                eps_min: Some(1e-6),
                t0: None,
                dt: None,
                values: None,
            },
            DelaySection {
                kind: "discrete".into(),
                window: 1.0,
                lipschitz_bound: 0.25,
                lag: Some(1.0),
                gain: Some(0.5),
                base: None,
                amplitude: None,
                frequency: None,
                kernel: None,
            },
        ),
        ScenarioName::DecreasingEps => cubic_like(
            EpsilonSection {
                kind: "decreasing-tanh".into(),
                amplitude: Some(0.5),
                bound: 1.6,
                eps_min: Some(1e-6),
                t0: None,
                dt: None,
                values: None,
            },
            DelaySection {
                kind: "discrete".into(),
                window: 1.0,
                lipschitz_bound: 0.09,
                lag: Some(1.0),
                gain: Some(0.3),
                base: None,
                amplitude: None,
                frequency: None,
                kernel: None,
            },
        ),
        ScenarioName::IncreasingEps => cubic_like(
            EpsilonSection {
                kind: "increasing-tanh".into(),
                amplitude: Some(0.5),
                bound: 1.1,
                eps_min: Some(1e-6),
                t0: None,
                dt: None,
                values: None,
            },
            DelaySection {
                kind: "discrete".into(),
                window: 1.0,
                lipschitz_bound: 0.09,
                lag: Some(1.0),
                gain: Some(0.3),
                base: None,
                amplitude: None,
                frequency: None,
                kernel: None,
            },
        ),
        // Forcing whose mode amplitudes decay like j^(-1/2): square-summable
        // only against the inverse Laplacian weights
        ScenarioName::HMinusOneTail => {
            let mut f = cubic_like(
                EpsilonSection {
                    kind: "constant".into(),
                    amplitude: Some(1.0),
                    bound: 1.0,
                    eps_min: Some(1e-6),
                    t0: None,
                    dt: None,
                    values: None,
                },
                DelaySection {
                    kind: "none".into(),
                    window: 1.0,
                    lipschitz_bound: 0.0,
                    lag: None,
                    gain: None,
                    base: None,
                    amplitude: None,
                    frequency: None,
                    kernel: None,
                },
            );
            f.forcing = ForcingSection {
                modes: vec![ForcingModeSection {
                    mode: 1,
                    kind: "constant".into(),
                    amplitude: 0.2,
                    frequency: None,
                    phase: None,
                }],
                tail: Some(ForcingTailSection { start_mode: 2, amplitude: 0.3, power: 0.5 }),
            };
            f.initial_history = HistorySection {
                modes: vec![HistoryModeSection {
                    mode: 1,
                    kind: "constant".into(),
                    value: 0.3,
                    rate: None,
                    frequency: None,
                    phase: None,
                }],
            };
            f
        }
    }
}

/// Shared body of the cubic reaction scenarios: 16 modes on `(0, pi)`,
/// `f(u) = u - u^3`, gently varying nonlocal diffusion around 3.
fn cubic_like(epsilon: EpsilonSection, delay: DelaySection) -> ScenarioFile {
    ScenarioFile {
        domain: DomainSection { length: std::f64::consts::PI, mode_count: 16 },
        epsilon,
        diffusion: DiffusionSection {
            form: "smooth-bounded".into(),
            value: None,
            base: Some(3.0),
            scale: Some(0.5),
            lower: 2.5,
            upper: 3.5,
        },
        nonlocal: NonlocalSection { weights: vec![1.0] },
        nonlinearity: NonlinearitySection {
            form: "cubic".into(),
            linear: Some(1.0),
            cubic: Some(1.0),
            growth_p: 4.0,
            c0: 1.0,
            c1: 1.0,
            c2: 0.5,
            eta_tilde: 1.0,
        },
        delay,
        forcing: ForcingSection {
            modes: vec![
                ForcingModeSection {
                    mode: 1,
                    kind: "sin".into(),
                    amplitude: 0.2,
                    frequency: Some(1.0),
                    phase: Some(0.0),
                },
                ForcingModeSection {
                    mode: 2,
                    kind: "sin".into(),
                    amplitude: 0.1,
                    frequency: Some(0.5),
                    phase: Some(0.5),
                },
            ],
            tail: None,
        },
        initial_history: HistorySection {
            modes: vec![
                HistoryModeSection {
                    mode: 1,
                    kind: "exp".into(),
                    value: 0.4,
                    rate: Some(0.3),
                    frequency: None,
                    phase: None,
                },
                HistoryModeSection {
                    mode: 2,
                    kind: "cos".into(),
                    value: 0.2,
                    rate: None,
                    frequency: Some(1.0),
                    phase: Some(0.0),
                },
                HistoryModeSection {
                    mode: 3,
                    kind: "constant".into(),
                    value: 0.1,
                    rate: None,
                    frequency: None,
                    phase: None,
                },
            ],
        },
        solver: SolverSection { dt: 1.0 / 16.0, grid_size: 48, record_every: 1 },
    }
}

/// Built-in scenario as a validated spec.
pub fn default_scenario(name: ScenarioName) -> ProblemSpec {
    let (spec, _) = scenario_file(name).to_spec().expect("built-in scenarios validate");
    spec
}

/// Built-in scenario with its preferred solver configuration.
pub fn default_scenario_with_config(name: ScenarioName) -> (ProblemSpec, SolverConfig) {
    scenario_file(name).to_spec().expect("built-in scenarios validate")
}

/// Resolves `default:<name>` to a built-in, anything else as a file path.
pub fn load_scenario(uri: &str) -> Result<(ProblemSpec, SolverConfig), ProblemError> {
    if let Some(name) = uri.strip_prefix("default:") {
        let name = ScenarioName::from_str(name)?;
        return Ok(default_scenario_with_config(name));
    }
    let text = std::fs::read_to_string(Path::new(uri))?;
    let file: ScenarioFile = serde_json::from_str(&text)?;
    file.to_spec()
}
