//! Validated configuration model for the delayed nonlocal diffusion problem.
//!
//! A [`ProblemSpec`] carries every coefficient of the equation
//! `u_t - eps(t) (Delta u)_t - a(l(u)) Delta u = f(u) + g(t, u_t) + h(t)`
//! together with the structural constants the energy estimates need
//! (`L`, `m`, `M`, `C0..C2`, `eta_tilde`, `C_g`, `p`, delay window `k`).
//! Coefficients are data-driven closed forms so that specs serialize,
//! audit deterministically, and stay pure. The hypothesis audit lives in
//! [`audit`], scenario files and built-ins in [`scenario`].
//!
//! Specs are immutable after construction and safe to share across
//! concurrent trajectory runs.

mod audit;
mod scenario;

pub use audit::{audit, AuditCheck, AuditReport, DerivedConstants, ProbeGrid};
pub use scenario::{
    default_scenario, default_scenario_with_config, load_scenario, scenario_file, ProblemError,
    ScenarioFile, ScenarioName, SCENARIO_NAMES,
};

use crate::history::HistorySegment;
use crate::spectral::EigenData;

/// Interval domain `(0, length)` and the Galerkin dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub length: f64,
    pub mode_count: usize,
}

impl DomainSpec {
    /// `|Omega|` of the interval.
    pub fn measure(&self) -> f64 {
        self.length
    }
}

/// The time-dependent coefficient `eps(t)` with its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    pub kind: EpsKind,
    /// The constant `L` bounding `sup_t (|eps| + |eps'|)`.
    pub bound: f64,
    /// Profiles dipping below this are rejected: the mode mass operator
    /// `1 + eps(t) lambda_j` must stay positive.
    pub eps_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpsKind {
    Constant { value: f64 },
    /// `1 + amplitude * (1 - tanh t) / 2`: decreases from `1 + amplitude` to 1.
    DecreasingTanh { amplitude: f64 },
    /// `1 - amplitude * (1 - tanh t) / 2`: increases from `1 - amplitude` to 1.
    IncreasingTanh { amplitude: f64 },
    /// Cubic Hermite through uniform samples, constant outside the window.
    CustomSampled { t0: f64, dt: f64, values: Vec<f64>, derivs: Vec<f64> },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            EpsKind::Constant { value } => *value,
            EpsKind::DecreasingTanh { amplitude } => 1.0 + amplitude * (1.0 - t.tanh()) / 2.0,
            EpsKind::IncreasingTanh { amplitude } => 1.0 - amplitude * (1.0 - t.tanh()) / 2.0,
            EpsKind::CustomSampled { t0, dt, values, derivs } => {
                sampled_eval(*t0, *dt, values, derivs, t)
            }
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match &self.kind {
            EpsKind::Constant { .. } => 0.0,
            EpsKind::DecreasingTanh { amplitude } => -amplitude * sech_sq(t) / 2.0,
            EpsKind::IncreasingTanh { amplitude } => amplitude * sech_sq(t) / 2.0,
            EpsKind::CustomSampled { t0, dt, values, derivs } => {
                sampled_deriv(*t0, *dt, values, derivs, t)
            }
        }
    }
}

fn sech_sq(t: f64) -> f64 {
    let c = t.cosh();
    if c.is_infinite() {
        0.0
    } else {
        1.0 / (c * c)
    }
}

fn sampled_eval(t0: f64, dt: f64, values: &[f64], derivs: &[f64], t: f64) -> f64 {
    let n = values.len();
    let t_end = t0 + dt * (n - 1) as f64;
    if t <= t0 {
        return values[0];
    }
    if t >= t_end {
        return values[n - 1];
    }
    let idx = (((t - t0) / dt).floor() as usize).min(n - 2);
    let s = (t - (t0 + idx as f64 * dt)) / dt;
    crate::history::cubic_hermite(values[idx], derivs[idx], values[idx + 1], derivs[idx + 1], s, dt)
}

fn sampled_deriv(t0: f64, dt: f64, values: &[f64], derivs: &[f64], t: f64) -> f64 {
    let n = values.len();
    let t_end = t0 + dt * (n - 1) as f64;
    if t <= t0 || t >= t_end {
        return 0.0;
    }
    let idx = (((t - t0) / dt).floor() as usize).min(n - 2);
    let s = (t - (t0 + idx as f64 * dt)) / dt;
    crate::history::cubic_hermite_deriv(
        values[idx],
        derivs[idx],
        values[idx + 1],
        derivs[idx + 1],
        s,
        dt,
    )
}

/// Builds Hermite slopes for sampled profiles by centered differences
/// (one-sided at the ends).
pub(crate) fn sampled_slopes(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = (values[1] - values[0]) / dt;
    d[n - 1] = (values[n - 1] - values[n - 2]) / dt;
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
    }
    d
}

/// The nonlocal diffusion coefficient `a(s)` with bounds `m <= a <= M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionLaw {
    pub form: DiffusionForm,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionForm {
    Constant { value: f64 },
    /// `base + scale * s / sqrt(1 + s^2)`: range `base +- scale`,
    /// global Lipschitz constant `|scale|`.
    SmoothBounded { base: f64, scale: f64 },
}

impl DiffusionLaw {
    pub fn eval(&self, s: f64) -> f64 {
        match &self.form {
            DiffusionForm::Constant { value } => *value,
            DiffusionForm::SmoothBounded { base, scale } => base + scale * s / (1.0 + s * s).sqrt(),
        }
    }

    /// Lipschitz constant of `a` on `[-R, R]`.
    pub fn lipschitz_constant_on(&self, _radius: f64) -> f64 {
        match &self.form {
            DiffusionForm::Constant { .. } => 0.0,
            DiffusionForm::SmoothBounded { scale, .. } => scale.abs(),
        }
    }
}

/// Sine coefficients of the averaging weight `j` in `l(u) = integral j*u`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalFunctional {
    pub weights: Vec<f64>,
}

impl NonlocalFunctional {
    pub fn value(&self, coeffs: &[f64]) -> f64 {
        crate::spectral::nonlocal_value(coeffs, &self.weights)
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// The reaction term `f` with its growth and one-sided constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub form: NonlinearityForm,
    /// Growth exponent `p >= 2` of the sign condition.
    pub growth_p: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// One-sided constant: `(f(u)-f(v))(u-v) <= eta_tilde (u-v)^2`.
    pub eta_tilde: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityForm {
    Zero,
    /// `f(u) = linear*u - cubic*u^3`
    Cubic { linear: f64, cubic: f64 },
}

impl Nonlinearity {
    pub fn eval(&self, u: f64) -> f64 {
        match &self.form {
            NonlinearityForm::Zero => 0.0,
            NonlinearityForm::Cubic { linear, cubic } => linear * u - cubic * u * u * u,
        }
    }

    /// Antiderivative with `F(0) = 0`.
    pub fn antiderivative(&self, u: f64) -> f64 {
        match &self.form {
            NonlinearityForm::Zero => 0.0,
            NonlinearityForm::Cubic { linear, cubic } => {
                let u2 = u * u;
                linear * u2 / 2.0 - cubic * u2 * u2 / 4.0
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.form, NonlinearityForm::Zero)
    }
}

/// The delay operator `g(t, u_t)` acting on history segments.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayKernel {
    pub kind: DelayKind,
    /// Delay window length `k`.
    pub window: f64,
    /// The constant `C_g` of the Lipschitz condition
    /// `||g(t,v1) - g(t,v2)||^2 <= C_g ||v1 - v2||^2_{C_L2}`.
    pub lipschitz_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DelayKind {
    None,
    /// `g(t, u_t) = gain * u(t - lag)`
    Discrete { lag: f64, gain: f64 },
    /// `g(t, u_t) = gain * u(t - lag(t))` with
    /// `lag(t) = base + amplitude * sin(frequency * t)`.
    VariableLag { base: f64, amplitude: f64, frequency: f64, gain: f64 },
    /// `g(t, u_t) = integral over [-k,0] of kernel(theta) u(t+theta)`,
    /// kernel given by uniform samples on `[-k, 0]`.
    Distributed { kernel: Vec<f64> },
}

impl DelayKernel {
    pub fn is_none(&self) -> bool {
        matches!(self.kind, DelayKind::None)
    }

    pub fn lag_at(&self, t: f64) -> Option<f64> {
        match &self.kind {
            DelayKind::Discrete { lag, .. } => Some(*lag),
            DelayKind::VariableLag { base, amplitude, frequency, .. } => {
                Some(base + amplitude * (frequency * t).sin())
            }
            _ => None,
        }
    }

    /// Mode coefficients of `g(t, u_t)` given the segment ending at `t`.
    ///
    /// The segment's latest node may lie slightly behind `t` (mid step);
    /// lookups then extrapolate the last Hermite piece.
    pub fn eval(&self, t: f64, segment: &HistorySegment, n_modes: usize) -> Vec<f64> {
        match &self.kind {
            DelayKind::None => vec![0.0; n_modes],
            DelayKind::Discrete { lag, gain } => {
                let mut v = segment.sample_abs(t - lag);
                for x in &mut v {
                    *x *= gain;
                }
                v
            }
            DelayKind::VariableLag { gain, .. } => {
                let lag = self.lag_at(t).unwrap();
                let mut v = segment.sample_abs(t - lag);
                for x in &mut v {
                    *x *= gain;
                }
                v
            }
            DelayKind::Distributed { kernel } => {
                let m = kernel.len();
                debug_assert!(m >= 2);
                let dtheta = self.window / (m - 1) as f64;
                let mut acc = vec![vec![0.0; n_modes]; m];
                for (i, slot) in acc.iter_mut().enumerate() {
                    let theta = -self.window + i as f64 * dtheta;
                    let u = segment.sample_abs(t + theta);
                    for (s, x) in slot.iter_mut().zip(&u) {
                        *s = kernel[i] * x;
                    }
                }
                (0..n_modes)
                    .map(|j| {
                        let col: Vec<f64> = acc.iter().map(|row| row[j]).collect();
                        crate::quad::simpson_uniform(&col, dtheta)
                    })
                    .collect()
            }
        }
    }

    /// The analytically sharp `C_g` for the built-in kinds.
    pub fn derived_lipschitz_bound(&self) -> f64 {
        match &self.kind {
            DelayKind::None => 0.0,
            DelayKind::Discrete { gain, .. } | DelayKind::VariableLag { gain, .. } => gain * gain,
            DelayKind::Distributed { kernel } => {
                let m = kernel.len();
                let dtheta = self.window / (m - 1) as f64;
                let abs: Vec<f64> = kernel.iter().map(|k| k.abs()).collect();
                let l1 = crate::quad::simpson_uniform(&abs, dtheta);
                l1 * l1
            }
        }
    }
}

/// External force `h(t)` as per-mode amplitude functions, plus an optional
/// slowly-decaying tail of constant mode amplitudes modelling forcing that
/// lives in `H^{-1}` only.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Forcing {
    pub modes: Vec<ForcingMode>,
    pub tail: Option<ForcingTail>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingMode {
    /// 1-based mode index.
    pub mode: usize,
    pub shape: ForcingShape,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingShape {
    Constant { amplitude: f64 },
    Sin { amplitude: f64, frequency: f64, phase: f64 },
}

/// `h_j = amplitude * j^{-power}` for `j >= start_mode`, constant in time.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTail {
    pub start_mode: usize,
    pub amplitude: f64,
    pub power: f64,
}

impl Forcing {
    pub fn is_zero(&self) -> bool {
        self.modes.is_empty() && self.tail.is_none()
    }

    /// Amplitude of mode `j` (1-based) at time `t`.
    pub fn coeff(&self, j: usize, t: f64) -> f64 {
        let mut v = 0.0;
        for m in &self.modes {
            if m.mode == j {
                v += match &m.shape {
                    ForcingShape::Constant { amplitude } => *amplitude,
                    ForcingShape::Sin { amplitude, frequency, phase } => {
                        amplitude * (frequency * t + phase).sin()
                    }
                };
            }
        }
        if let Some(tail) = &self.tail {
            if j >= tail.start_mode {
                v += tail.amplitude * (j as f64).powf(-tail.power);
            }
        }
        v
    }

    pub fn eval_vec(&self, t: f64, n_modes: usize) -> Vec<f64> {
        (1..=n_modes).map(|j| self.coeff(j, t)).collect()
    }

    /// `||h(t)||_{-1}^2` over the resolved modes.
    pub fn hminus1_sq(&self, t: f64, eigen: &EigenData) -> f64 {
        (1..=eigen.len())
            .map(|j| {
                let c = self.coeff(j, t);
                c * c / eigen.lambda[j - 1]
            })
            .sum()
    }
}

/// Initial history `phi(theta)`, per-mode closed forms on `[-k, 0]`.
/// Multiple entries on the same mode are summed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialHistory {
    pub modes: Vec<HistoryMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryMode {
    /// 1-based mode index.
    pub mode: usize,
    pub shape: HistoryShape,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HistoryShape {
    Constant { value: f64 },
    /// `value * exp(rate * theta)`
    Exp { value: f64, rate: f64 },
    /// `value * cos(frequency * theta + phase)`
    Cos { value: f64, frequency: f64, phase: f64 },
}

impl InitialHistory {
    pub fn coeff(&self, j: usize, theta: f64) -> f64 {
        let mut v = 0.0;
        for m in &self.modes {
            if m.mode == j {
                v += match &m.shape {
                    HistoryShape::Constant { value } => *value,
                    HistoryShape::Exp { value, rate } => value * (rate * theta).exp(),
                    HistoryShape::Cos { value, frequency, phase } => {
                        value * (frequency * theta + phase).cos()
                    }
                };
            }
        }
        v
    }

    /// Exact theta-derivative, used to seed Hermite data of the segment.
    pub fn coeff_deriv(&self, j: usize, theta: f64) -> f64 {
        let mut v = 0.0;
        for m in &self.modes {
            if m.mode == j {
                v += match &m.shape {
                    HistoryShape::Constant { .. } => 0.0,
                    HistoryShape::Exp { value, rate } => value * rate * (rate * theta).exp(),
                    HistoryShape::Cos { value, frequency, phase } => {
                        -value * frequency * (frequency * theta + phase).sin()
                    }
                };
            }
        }
        v
    }

    pub fn eval_vec(&self, theta: f64, n_modes: usize) -> Vec<f64> {
        (1..=n_modes).map(|j| self.coeff(j, theta)).collect()
    }

    pub fn deriv_vec(&self, theta: f64, n_modes: usize) -> Vec<f64> {
        (1..=n_modes).map(|j| self.coeff_deriv(j, theta)).collect()
    }

    /// Uniformly rescale all amplitudes.
    pub fn scaled(&self, factor: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| HistoryMode {
                mode: m.mode,
                shape: match &m.shape {
                    HistoryShape::Constant { value } => {
                        HistoryShape::Constant { value: value * factor }
                    }
                    HistoryShape::Exp { value, rate } => {
                        HistoryShape::Exp { value: value * factor, rate: *rate }
                    }
                    HistoryShape::Cos { value, frequency, phase } => HistoryShape::Cos {
                        value: value * factor,
                        frequency: *frequency,
                        phase: *phase,
                    },
                },
            })
            .collect();
        Self { modes }
    }
}

/// The full coefficient set of the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    pub epsilon: TimeProfile,
    pub diffusion: DiffusionLaw,
    pub nonlocal: NonlocalFunctional,
    pub nonlinearity: Nonlinearity,
    pub delay: DelayKernel,
    pub forcing: Forcing,
    pub initial_history: InitialHistory,
}

impl ProblemSpec {
    pub fn n_modes(&self) -> usize {
        self.domain.mode_count
    }

    /// Delay window `k`.
    pub fn window(&self) -> f64 {
        self.delay.window
    }

    /// Replace the initial history, keeping everything else.
    pub fn with_history(&self, history: InitialHistory) -> Self {
        Self { initial_history: history, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tanh_profiles_monotone_and_bounded() {
        let dec = TimeProfile {
            kind: EpsKind::DecreasingTanh { amplitude: 0.5 },
            bound: 1.6,
            eps_min: 1e-6,
        };
        let inc = TimeProfile {
            kind: EpsKind::IncreasingTanh { amplitude: 0.5 },
            bound: 1.1,
            eps_min: 1e-6,
        };
        let mut t = -30.0;
        while t <= 30.0 {
            assert!(dec.deriv(t) <= 0.0, "decreasing profile must have eps' <= 0");
            assert!(inc.deriv(t) >= 0.0, "increasing profile must have eps' >= 0");
            assert!(dec.eval(t) <= 1.5 + 1e-12 && dec.eval(t) >= 1.0 - 1e-12);
            assert!(inc.eval(t) >= 0.5 - 1e-12 && inc.eval(t) <= 1.0 + 1e-12);
            t += 0.37;
        }
        assert_relative_eq!(dec.eval(60.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(inc.eval(60.0), 1.0, epsilon = 1e-12);
        // derivative consistency against central differences
        let h = 1e-6;
        for t in [-2.0, 0.0, 1.3] {
            let fd = (dec.eval(t + h) - dec.eval(t - h)) / (2.0 * h);
            assert_relative_eq!(dec.deriv(t), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn custom_sampled_profile_interpolates() {
        let dt = 0.25;
        let t0 = -1.0;
        let values: Vec<f64> = (0..9).map(|i| 1.0 + 0.1 * (t0 + i as f64 * dt).sin()).collect();
        let derivs = sampled_slopes(&values, dt);
        let p = TimeProfile {
            kind: EpsKind::CustomSampled { t0, dt, values: values.clone(), derivs },
            bound: 1.2,
            eps_min: 1e-6,
        };
        // exact at nodes, constant extension outside
        for (i, v) in values.iter().enumerate() {
            assert_relative_eq!(p.eval(t0 + i as f64 * dt), *v, epsilon = 1e-14);
        }
        assert_relative_eq!(p.eval(-5.0), values[0]);
        assert_relative_eq!(p.eval(5.0), *values.last().unwrap());
    }

    #[test]
    fn diffusion_bounds_and_lipschitz() {
        let a = DiffusionLaw {
            form: DiffusionForm::SmoothBounded { base: 3.0, scale: 0.5 },
            lower: 2.5,
            upper: 3.5,
        };
        let mut s = -50.0;
        while s <= 50.0 {
            let v = a.eval(s);
            assert!(v >= a.lower - 1e-12 && v <= a.upper + 1e-12);
            s += 0.13;
        }
        // sampled difference quotients never exceed the declared constant
        let lc = a.lipschitz_constant_on(50.0);
        let mut s = -5.0;
        while s < 5.0 {
            let q = (a.eval(s + 1e-3) - a.eval(s)).abs() / 1e-3;
            assert!(q <= lc + 1e-9);
            s += 0.0371;
        }
    }

    #[test]
    fn forcing_modes_and_tail() {
        let f = Forcing {
            modes: vec![ForcingMode {
                mode: 1,
                shape: ForcingShape::Sin { amplitude: 0.2, frequency: 1.0, phase: 0.0 },
            }],
            tail: Some(ForcingTail { start_mode: 2, amplitude: 0.3, power: 0.5 }),
        };
        assert_relative_eq!(f.coeff(1, std::f64::consts::FRAC_PI_2), 0.2, epsilon = 1e-14);
        assert_relative_eq!(f.coeff(2, 0.0), 0.3 / (2.0f64).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(f.coeff(3, 0.0), 0.3 / (3.0f64).sqrt(), epsilon = 1e-14);
        let eigen = crate::spectral::eigenvalues(&DomainSpec {
            length: std::f64::consts::PI,
            mode_count: 4,
        });
        let hm = f.hminus1_sq(0.0, &eigen);
        let expect: f64 = (2..=4)
            .map(|j| {
                let c = 0.3 / (j as f64).sqrt();
                c * c / (j * j) as f64
            })
            .sum();
        assert_relative_eq!(hm, expect, epsilon = 1e-14);
    }

    #[test]
    fn history_derivative_consistency() {
        let phi = InitialHistory {
            modes: vec![
                HistoryMode { mode: 1, shape: HistoryShape::Exp { value: 0.4, rate: 0.3 } },
                HistoryMode {
                    mode: 1,
                    shape: HistoryShape::Cos { value: 0.1, frequency: 2.0, phase: 0.3 },
                },
                HistoryMode { mode: 2, shape: HistoryShape::Constant { value: 0.2 } },
            ],
        };
        let h = 1e-6;
        for theta in [-0.9, -0.5, -0.1] {
            for j in 1..=2 {
                let fd = (phi.coeff(j, theta + h) - phi.coeff(j, theta - h)) / (2.0 * h);
                assert_relative_eq!(phi.coeff_deriv(j, theta), fd, epsilon = 1e-8);
            }
        }
        let scaled = phi.scaled(2.0);
        assert_relative_eq!(scaled.coeff(1, -0.5), 2.0 * phi.coeff(1, -0.5), epsilon = 1e-14);
    }
}
