//! Semi-discrete Galerkin system and the method-of-steps integrator.
//!
//! Testing the equation against the orthonormal eigenfunctions reduces it
//! to mode ODEs
//!
//! ```text
//! u_j' = [ F_j - a(l(u)) lambda_j u_j ] / (1 + eps(t) lambda_j),
//! F_j  = (f(u))_j + (g(t, u_t))_j + h_j(t),
//! ```
//!
//! integrated by classical four-stage Runge-Kutta. Delayed arguments are
//! looked up in the running [`HistorySegment`]; lookups that reach into the
//! current step extrapolate the last Hermite piece (`dt <= k/16` is
//! enforced, so such lookups stay within one panel). Along the way the
//! integrator records the norm bundle, the window sup-norms, and the
//! energy-equality residual
//!
//! ```text
//! R(tau, t) = E(t) - E(tau)
//!           + int (2 a(l(u)) - eps') ||grad u||^2 dr
//!           - 2 int (f(u) + g(r, u_r) + h(r), u(r)) dr,
//! ```
//!
//! with `E = ||u||^2 + eps ||grad u||^2` and composite Simpson quadrature,
//! so `|R| = O(dt^4)` under step halving.

use thiserror::Error;

use crate::history::HistorySegment;
use crate::problem::{audit, InitialHistory, ProblemError, ProblemSpec, ProbeGrid};
use crate::quad::cumulative_simpson_blocked;
use crate::report::g17;
use crate::spectral::{norms_of_coeffs, EigenData, NormBundle, SineBasis, SpectralField};

/// Abort threshold on `||u||^2`: the hypotheses guarantee global
/// existence, so crossing it signals a configuration or solver bug.
pub const BLOWUP_GUARD: f64 = 1e30;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("mass operator degenerate at t = {t}: 1 + eps*lambda_{mode} = {value}")]
    DegenerateMass { t: f64, mode: usize, value: f64 },
    #[error("solution lost finiteness at t = {t} (blow-up guard {BLOWUP_GUARD:e})")]
    NonFinite { t: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Audit(#[from] ProblemError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegratorOrder {
    #[default]
    Rk4,
}

/// Step size, collocation grid, and recording cadence.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub dt: f64,
    pub integrator: IntegratorOrder,
    pub grid_size: usize,
    pub record_every: usize,
    /// Keep per-stage coefficient samples for the decomposition replay.
    pub capture_stages: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, grid_size: usize, record_every: usize) -> Self {
        Self { dt, integrator: IntegratorOrder::Rk4, grid_size, record_every, capture_stages: false }
    }

    pub fn validate(&self, spec: &ProblemSpec) -> Result<(), SolverError> {
        if !(self.dt > 0.0) {
            return Err(SolverError::InvalidConfig("dt must be positive".into()));
        }
        let k = spec.window();
        let ratio = k / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 {
            return Err(SolverError::InvalidConfig(format!(
                "dt = {} must divide the delay window k = {k} exactly",
                self.dt
            )));
        }
        if self.dt > k / 16.0 + 1e-12 {
            return Err(SolverError::InvalidConfig(format!(
                "dt = {} exceeds k/16 = {}; delayed lookups would leave the Hermite panel",
                self.dt,
                k / 16.0
            )));
        }
        let need = 2 * spec.n_modes() + 1;
        if self.grid_size < need {
            return Err(SolverError::InvalidConfig(format!(
                "grid_size = {} below the anti-aliasing margin 2N+1 = {need}",
                self.grid_size
            )));
        }
        if self.record_every == 0 {
            return Err(SolverError::InvalidConfig("record_every must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }
}

/// One right-hand-side evaluation with its diagnostics.
#[derive(Debug, Clone)]
pub struct RhsEval {
    pub du: Vec<f64>,
    pub a_value: f64,
    pub l_value: f64,
    /// Coefficients of `f(u) + g(t, u_t)`.
    pub fg: Vec<f64>,
    /// Coefficients of `h(t)`.
    pub h: Vec<f64>,
}

pub(crate) fn eval_rhs(
    t: f64,
    coeffs: &[f64],
    segment: &HistorySegment,
    spec: &ProblemSpec,
    basis: &SineBasis,
    eigen: &EigenData,
) -> Result<RhsEval, SolverError> {
    let n = spec.n_modes();
    let l_value = spec.nonlocal.value(coeffs);
    let a_value = spec.diffusion.eval(l_value);
    let mut fg = if spec.nonlinearity.is_zero() {
        vec![0.0; n]
    } else {
        basis.project_fn(coeffs, |u| spec.nonlinearity.eval(u))
    };
    if !spec.delay.is_none() {
        let g = spec.delay.eval(t, segment, n);
        for (a, b) in fg.iter_mut().zip(&g) {
            *a += b;
        }
    }
    let h = spec.forcing.eval_vec(t, n);
    let eps = spec.epsilon.eval(t);
    let mut du = vec![0.0; n];
    for j in 0..n {
        let denom = 1.0 + eps * eigen.lambda[j];
        if denom <= 1e-12 {
            return Err(SolverError::DegenerateMass { t, mode: j + 1, value: denom });
        }
        du[j] = (fg[j] + h[j] - a_value * eigen.lambda[j] * coeffs[j]) / denom;
    }
    Ok(RhsEval { du, a_value, l_value, fg, h })
}

/// Time-derivative coefficients of the Galerkin system at one instant.
pub fn rhs(
    t: f64,
    state: &SpectralField,
    segment: &HistorySegment,
    spec: &ProblemSpec,
) -> Result<SpectralField, SolverError> {
    let basis = SineBasis::new(&spec.domain, 2 * spec.n_modes() + 1)?;
    let eigen = crate::spectral::eigenvalues(&spec.domain);
    let e = eval_rhs(t, &state.coeffs, segment, spec, &basis, &eigen)?;
    Ok(SpectralField::new(e.du, t))
}

/// One recorded instant along a trajectory.
#[derive(Debug, Clone)]
pub struct TrajNode {
    pub t: f64,
    pub coeffs: Vec<f64>,
    pub norms: NormBundle,
    /// `||u_t||^2_{C_L2}` over the trailing delay window.
    pub c_l2_sq: f64,
    /// `||u_t||^2_{C_L2} + |eps| ||grad u_t||^2_{C_L2}`.
    pub c_ht_sq: f64,
    pub a_value: f64,
    pub l_value: f64,
    /// `E = ||u||^2 + eps ||grad u||^2`.
    pub energy: f64,
    /// `(2 a - eps') ||grad u||^2`.
    pub dissipation: f64,
    /// `2 (f + g + h, u)`.
    pub power: f64,
    pub energy_residual: f64,
}

/// Per-step Runge-Kutta stage samples for the decomposition replay.
#[derive(Debug, Clone)]
pub struct StepStages {
    pub t: [f64; 4],
    pub a_value: [f64; 4],
    /// Coefficients of `f(u) + g(t, u_t)` at each stage.
    pub fg: [Vec<f64>; 4],
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub tau: f64,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    pub window: f64,
    /// Initial-history nodes strictly before `tau`, at step resolution.
    pub prelude: Vec<(f64, Vec<f64>)>,
    pub nodes: Vec<TrajNode>,
    pub final_segment: HistorySegment,
    pub eigen: EigenData,
    pub stages: Option<Vec<StepStages>>,
}

impl TrajectoryRecord {
    pub fn endpoint(&self) -> &TrajNode {
        self.nodes.last().expect("at least the initial node is recorded")
    }

    /// Recording interval `dt * record_every`.
    pub fn dt_record(&self) -> f64 {
        self.dt * self.record_every as f64
    }

    /// Largest energy-equality residual magnitude over the run.
    pub fn max_energy_residual(&self) -> f64 {
        self.nodes.iter().map(|n| n.energy_residual.abs()).fold(0.0, f64::max)
    }

    /// CSV per the trajectory schema, 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,L2_sq,grad_sq,Ht_sq,C_L2_sq,C_Ht_sq,a_value,l_value,energy_residual")?;
        for n in &self.nodes {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                g17(n.t),
                g17(n.norms.l2_sq),
                g17(n.norms.grad_sq),
                g17(n.norms.ht_sq),
                g17(n.c_l2_sq),
                g17(n.c_ht_sq),
                g17(n.a_value),
                g17(n.l_value),
                g17(n.energy_residual)
            )?;
        }
        Ok(())
    }

    /// The full uniform time series `prelude ++ nodes` (requires
    /// `record_every == 1` for uniform spacing across `tau`).
    pub fn dense_series(&self) -> Vec<(f64, &[f64])> {
        let mut out: Vec<(f64, &[f64])> =
            self.prelude.iter().map(|(t, c)| (*t, c.as_slice())).collect();
        out.extend(self.nodes.iter().map(|n| (n.t, n.coeffs.as_slice())));
        out
    }
}

/// Integrates the audited problem from `tau` to `t_end`.
///
/// The segment is seeded from the initial history at step resolution; the
/// final segment spans `[t_end - k, t_end]`. `t_end - tau` must be a
/// multiple of `dt * record_every`.
pub fn integrate(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    tau: f64,
    t_end: f64,
) -> Result<TrajectoryRecord, SolverError> {
    audit(spec, &ProbeGrid::default()).into_result()?;
    integrate_unaudited(spec, cfg, tau, t_end)
}

/// Same as [`integrate`] but trusts the caller to have audited the spec
/// (ensemble drivers audit once and launch many runs).
pub fn integrate_unaudited(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    tau: f64,
    t_end: f64,
) -> Result<TrajectoryRecord, SolverError> {
    cfg.validate(spec)?;
    let span = t_end - tau;
    if span < 0.0 {
        return Err(SolverError::InvalidConfig("t_end must be >= tau".into()));
    }
    let steps_f = span / cfg.dt;
    let n_steps = steps_f.round() as usize;
    if (steps_f - n_steps as f64).abs() > 1e-6 {
        return Err(SolverError::InvalidConfig(format!(
            "t_end - tau = {span} is not a multiple of dt = {}",
            cfg.dt
        )));
    }
    if n_steps % cfg.record_every != 0 {
        return Err(SolverError::InvalidConfig(format!(
            "step count {n_steps} is not a multiple of record_every = {}",
            cfg.record_every
        )));
    }

    let n = spec.n_modes();
    let eigen = crate::spectral::eigenvalues(&spec.domain);
    let basis = SineBasis::new(&spec.domain, cfg.grid_size)?;
    let mut segment =
        HistorySegment::from_initial_history(&spec.initial_history, n, tau, cfg.dt, spec.window());
    let prelude: Vec<(f64, Vec<f64>)> = (0..segment.n_nodes() - 1)
        .map(|i| {
            let (t, c) = segment.node(i);
            (t, c.to_vec())
        })
        .collect();

    let mut y: Vec<f64> = segment.latest_state().to_vec();
    let mut stages: Option<Vec<StepStages>> =
        if cfg.capture_stages { Some(Vec::with_capacity(n_steps)) } else { None };
    let mut nodes: Vec<TrajNode> = Vec::with_capacity(n_steps / cfg.record_every + 1);

    // seam fix: the first panel's left slope is the equation derivative
    let d0 = eval_rhs(tau, &y, &segment, spec, &basis, &eigen)?;
    segment.set_latest_deriv(d0.du.clone());
    push_node(&mut nodes, tau, &y, &d0, spec, &eigen, &segment);

    let mut d_latest = d0;
    for step in 0..n_steps {
        let t0 = tau + step as f64 * cfg.dt;
        let t1 = tau + (step + 1) as f64 * cfg.dt;
        let th = t0 + 0.5 * cfg.dt;
        let dt = cfg.dt;

        let k1 = d_latest;
        let y2: Vec<f64> = y.iter().zip(&k1.du).map(|(a, b)| a + 0.5 * dt * b).collect();
        let k2 = eval_rhs(th, &y2, &segment, spec, &basis, &eigen)?;
        let y3: Vec<f64> = y.iter().zip(&k2.du).map(|(a, b)| a + 0.5 * dt * b).collect();
        let k3 = eval_rhs(th, &y3, &segment, spec, &basis, &eigen)?;
        let y4: Vec<f64> = y.iter().zip(&k3.du).map(|(a, b)| a + dt * b).collect();
        let k4 = eval_rhs(t1, &y4, &segment, spec, &basis, &eigen)?;

        for (i, yi) in y.iter_mut().enumerate() {
            *yi += dt / 6.0 * (k1.du[i] + 2.0 * k2.du[i] + 2.0 * k3.du[i] + k4.du[i]);
        }
        let l2_sq: f64 = y.iter().map(|c| c * c).sum();
        if !l2_sq.is_finite() || l2_sq > BLOWUP_GUARD {
            return Err(SolverError::NonFinite { t: t1 });
        }

        if let Some(st) = stages.as_mut() {
            st.push(StepStages {
                t: [t0, th, th, t1],
                a_value: [k1.a_value, k2.a_value, k3.a_value, k4.a_value],
                fg: [k1.fg.clone(), k2.fg.clone(), k3.fg.clone(), k4.fg.clone()],
            });
        }

        // derivative at the accepted node doubles as next step's k1
        let d1 = eval_rhs(t1, &y, &segment, spec, &basis, &eigen)?;
        segment.push(t1, y.clone(), d1.du.clone());
        if (step + 1) % cfg.record_every == 0 {
            push_node(&mut nodes, t1, &y, &d1, spec, &eigen, &segment);
        }
        d_latest = d1;
    }

    // energy-equality residual on the recorded grid; the integrand has
    // derivative breakpoints at delay-length spacing from the initial time
    let dt_rec = cfg.dt * cfg.record_every as f64;
    let diss: Vec<f64> = nodes.iter().map(|n| n.dissipation).collect();
    let power: Vec<f64> = nodes.iter().map(|n| n.power).collect();
    let block = breakpoint_block(spec.window(), dt_rec);
    let cum_diss = cumulative_simpson_blocked(&diss, dt_rec, block);
    let cum_power = cumulative_simpson_blocked(&power, dt_rec, block);
    let e0 = nodes[0].energy;
    for (i, node) in nodes.iter_mut().enumerate() {
        node.energy_residual = (node.energy - e0) + cum_diss[i] - cum_power[i];
    }

    Ok(TrajectoryRecord {
        tau,
        t_end,
        dt: cfg.dt,
        record_every: cfg.record_every,
        window: spec.window(),
        prelude,
        nodes,
        final_segment: segment,
        eigen,
        stages,
    })
}

/// Panels per delay window on the recording grid, when the window is a
/// node multiple; zero (no blocking) otherwise.
pub(crate) fn breakpoint_block(window: f64, dt_rec: f64) -> usize {
    let ratio = window / dt_rec;
    if (ratio - ratio.round()).abs() <= 1e-6 && ratio.round() >= 1.0 {
        ratio.round() as usize
    } else {
        0
    }
}

fn push_node(
    nodes: &mut Vec<TrajNode>,
    t: f64,
    y: &[f64],
    d: &RhsEval,
    spec: &ProblemSpec,
    eigen: &EigenData,
    segment: &HistorySegment,
) {
    let eps = spec.epsilon.eval(t);
    let eps_d = spec.epsilon.deriv(t);
    let norms = norms_of_coeffs(y, eigen, eps);
    let power = 2.0
        * y.iter()
            .zip(d.fg.iter().zip(&d.h))
            .map(|(u, (fg, h))| (fg + h) * u)
            .sum::<f64>();
    nodes.push(TrajNode {
        t,
        coeffs: y.to_vec(),
        norms,
        c_l2_sq: segment.c_l2_sq(eigen),
        c_ht_sq: segment.c_ht_sq(eigen, &spec.epsilon),
        a_value: d.a_value,
        l_value: d.l_value,
        energy: norms.l2_sq + eps * norms.grad_sq,
        dissipation: (2.0 * d.a_value - eps_d) * norms.grad_sq,
        power,
        energy_residual: 0.0,
    });
}

/// Trailing-window maxima with argmax index; ties resolve to the later
/// index. `out[i] = max(values[i.saturating_sub(w)..=i])`.
pub(crate) fn trailing_window_max(values: &[f64], w: usize) -> Vec<(f64, usize)> {
    let mut out = Vec::with_capacity(values.len());
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for i in 0..values.len() {
        while let Some(&b) = deque.back() {
            if values[b] <= values[i] {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(i);
        let cutoff = i.saturating_sub(w);
        while let Some(&f) = deque.front() {
            if f < cutoff {
                deque.pop_front();
            } else {
                break;
            }
        }
        let &front = deque.front().unwrap();
        out.push((values[front], front));
    }
    out
}

/// Windowed squared-norm series of a trajectory difference: per recorded
/// time `t >= tau`, the sup over `[t-k, t]` of `||.||^2` and
/// `||grad .||^2` with the `|eps|` weight at the gradient argmax.
#[derive(Debug, Clone)]
pub struct DifferenceSeries {
    /// `(t, D(t))` with `D = sup ||diff||^2 + |eps*| sup ||grad diff||^2`.
    pub series: Vec<(f64, f64)>,
    /// `sup ||diff||^2` component per time.
    pub c_l2_sq: Vec<f64>,
}

/// Continuous-dependence report: the measured counterpart of the
/// exponential estimate `D(t) <= exp(C (t + k - tau)) D(tau)`.
#[derive(Debug, Clone)]
pub struct DependenceReport {
    pub series: Vec<(f64, f64)>,
    pub d_tau: f64,
    /// Smallest constant making the exponential bound hold over the run.
    pub c_hat: f64,
}

/// Squared-difference window sups for two same-grid records.
pub fn difference_series(
    r1: &TrajectoryRecord,
    r2: &TrajectoryRecord,
    spec: &ProblemSpec,
) -> DifferenceSeries {
    assert_eq!(r1.record_every, 1, "difference monitors need record_every = 1");
    assert_eq!(r2.record_every, 1, "difference monitors need record_every = 1");
    let s1 = r1.dense_series();
    let s2 = r2.dense_series();
    assert_eq!(s1.len(), s2.len(), "records must share the time grid");
    let eigen = &r1.eigen;
    let n_pre = r1.prelude.len();
    let w = crate::history::steps_in_window(r1.window, r1.dt);

    let mut l2 = Vec::with_capacity(s1.len());
    let mut grad = Vec::with_capacity(s1.len());
    let mut times = Vec::with_capacity(s1.len());
    for ((t, a), (t2, b)) in s1.iter().zip(&s2) {
        assert!((t - t2).abs() <= 1e-9 * (1.0 + t.abs()), "records must share timestamps");
        let mut l2s = 0.0;
        let mut gs = 0.0;
        for ((x, y), lam) in a.iter().zip(b.iter()).zip(&eigen.lambda) {
            let d = x - y;
            l2s += d * d;
            gs += lam * d * d;
        }
        times.push(*t);
        l2.push(l2s);
        grad.push(gs);
    }
    let max_l2 = trailing_window_max(&l2, w);
    let max_grad = trailing_window_max(&grad, w);
    let mut series = Vec::new();
    let mut c_l2_sq = Vec::new();
    for i in n_pre..times.len() {
        let (l2m, _) = max_l2[i];
        let (gm, gi) = max_grad[i];
        let eps_w = spec.epsilon.eval(times[gi]).abs();
        series.push((times[i], l2m + eps_w * gm));
        c_l2_sq.push(l2m);
    }
    DifferenceSeries { series, c_l2_sq }
}

/// Integrates the problem from two initial histories and measures the
/// continuous-dependence constant.
pub fn continuous_dependence(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    tau: f64,
    t_end: f64,
    phi1: &InitialHistory,
    phi2: &InitialHistory,
) -> Result<DependenceReport, SolverError> {
    let cfg = SolverConfig { record_every: 1, ..cfg.clone() };
    let spec1 = spec.with_history(phi1.clone());
    let spec2 = spec.with_history(phi2.clone());
    audit(&spec1, &ProbeGrid::default()).into_result()?;
    audit(&spec2, &ProbeGrid::default()).into_result()?;
    let r1 = integrate_unaudited(&spec1, &cfg, tau, t_end)?;
    let r2 = integrate_unaudited(&spec2, &cfg, tau, t_end)?;
    let diff = difference_series(&r1, &r2, spec);
    let d_tau = diff.series[0].1;
    let floor = 1e-28 * (1.0 + d_tau);
    let mut c_hat = 0.0f64;
    if d_tau > 0.0 {
        for (t, d) in diff.series.iter().skip(1) {
            if *d > floor {
                c_hat = c_hat.max((d / d_tau).ln() / (t + spec.window() - tau));
            }
        }
    }
    Ok(DependenceReport { series: diff.series, d_tau, c_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{
        default_scenario, default_scenario_with_config, DelayKernel, DelayKind, ScenarioName,
    };
    use approx::assert_relative_eq;

    #[test]
    fn rhs_mode_arithmetic() {
        // N=1, a=3, eps=1, lambda_1=1, f=g=h=0, u_1=2: u' = -3*1*2/(1+1) = -3
        let spec = default_scenario(ScenarioName::LinearSingleMode);
        let seg = HistorySegment::from_initial_history(
            &spec.initial_history,
            1,
            0.0,
            1.0 / 16.0,
            1.0,
        );
        let state = SpectralField::new(vec![2.0], 0.0);
        let d = rhs(0.0, &state, &seg, &spec).unwrap();
        assert_relative_eq!(d.coeffs[0], -3.0, epsilon = 1e-14);
    }

    #[test]
    fn rhs_zero_state_is_rest() {
        let mut spec = default_scenario(ScenarioName::CubicDelayed);
        spec.forcing = Default::default();
        spec.initial_history = InitialHistory::default();
        let seg = HistorySegment::from_initial_history(
            &spec.initial_history,
            spec.n_modes(),
            0.0,
            1.0 / 16.0,
            1.0,
        );
        let state = SpectralField::zeros(spec.n_modes(), 0.0);
        let d = rhs(0.0, &state, &seg, &spec).unwrap();
        assert!(d.coeffs.iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn rhs_discrete_delay_arithmetic() {
        // g = 0.5 * u(t-k), constant history u_1 = 1, a = 3, eps = 1,
        // lambda_1 = 1: u' = (0.5 - 3)/2 = -1.25
        let mut spec = default_scenario(ScenarioName::LinearSingleMode);
        spec.delay = DelayKernel {
            kind: DelayKind::Discrete { lag: 1.0, gain: 0.5 },
            window: 1.0,
            lipschitz_bound: 0.25,
        };
        let seg = HistorySegment::from_initial_history(
            &spec.initial_history,
            1,
            0.0,
            1.0 / 16.0,
            1.0,
        );
        let state = SpectralField::new(vec![1.0], 0.0);
        let d = rhs(0.0, &state, &seg, &spec).unwrap();
        assert_relative_eq!(d.coeffs[0], -1.25, epsilon = 1e-14);
    }

    #[test]
    fn linear_single_mode_matches_closed_form() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::LinearSingleMode);
        let rec = integrate(&spec, &cfg, 0.0, 1.0).unwrap();
        let end = rec.endpoint();
        let exact = crate::oracle::single_mode_closed_form(3.0, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(end.coeffs[0], exact, max_relative = 1e-7);
    }

    #[test]
    fn order_four_on_linear_scenario() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::LinearSingleMode);
        let exact = crate::oracle::single_mode_closed_form(3.0, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        let err = |dt: f64| {
            let rec = integrate(&spec, &cfg.with_dt(dt), 0.0, 1.0).unwrap();
            (rec.endpoint().coeffs[0] - exact).abs()
        };
        let e1 = err(1.0 / 32.0);
        let e2 = err(1.0 / 64.0);
        assert!(e1 / e2 > 12.0, "Richardson ratio {} too small", e1 / e2);
    }

    #[test]
    fn rest_state_preserved_exactly() {
        let mut spec = default_scenario(ScenarioName::CubicDelayed);
        spec.forcing = Default::default();
        spec.initial_history = InitialHistory::default();
        let cfg = SolverConfig::new(1.0 / 16.0, 48, 1);
        let rec = integrate(&spec, &cfg, 0.0, 2.0).unwrap();
        for node in &rec.nodes {
            assert!(node.norms.l2_sq == 0.0, "rest state must stay exactly zero");
        }
    }

    #[test]
    fn deterministic_bitwise() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::CubicDelayed);
        let r1 = integrate(&spec, &cfg, 0.0, 1.0).unwrap();
        let r2 = integrate(&spec, &cfg, 0.0, 1.0).unwrap();
        for (a, b) in r1.nodes.iter().zip(&r2.nodes) {
            assert_eq!(a.coeffs, b.coeffs);
            assert_eq!(a.energy_residual.to_bits(), b.energy_residual.to_bits());
        }
    }

    #[test]
    fn energy_residual_fourth_order() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::CubicDelayed);
        let res = |dt: f64| {
            integrate(&spec, &cfg.with_dt(dt), 0.0, 1.0).unwrap().max_energy_residual()
        };
        let r1 = res(1.0 / 32.0);
        let r2 = res(1.0 / 64.0);
        assert!(r1 / r2 > 8.0, "residual ratio {} too small (r1={r1:e}, r2={r2:e})", r1 / r2);
    }

    #[test]
    fn dependence_uniqueness_and_linear_ratio() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::LinearSingleMode);
        let phi = spec.initial_history.clone();
        // identical histories: D = 0 everywhere
        let rep = continuous_dependence(&spec, &cfg, 0.0, 1.0, &phi, &phi).unwrap();
        assert_eq!(rep.d_tau, 0.0);
        assert!(rep.series.iter().all(|(_, d)| *d == 0.0));
        assert_eq!(rep.c_hat, 0.0);

        // phi2 = 2 phi1: closed-form squared ratio
        let phi2 = phi.scaled(2.0);
        let rep = continuous_dependence(&spec, &cfg, 0.0, 2.0, &phi, &phi2).unwrap();
        let rate = 3.0 * 1.0 / (1.0 + 1.0);
        for (t, d) in rep.series.iter().filter(|(t, _)| *t >= 1.0) {
            // window sup sits at the oldest node t - k
            let expect = rep.d_tau * (-2.0 * rate * (t - 1.0)).exp();
            assert_relative_eq!(*d, expect, max_relative = 1e-5);
        }
        assert!(rep.c_hat >= 0.0);
    }

    #[test]
    fn config_validation_rejects_bad_dt() {
        let spec = default_scenario(ScenarioName::CubicDelayed);
        assert!(SolverConfig::new(0.3, 48, 1).validate(&spec).is_err()); // no division
        assert!(SolverConfig::new(0.25, 48, 1).validate(&spec).is_err()); // > k/16
        assert!(SolverConfig::new(1.0 / 16.0, 20, 1).validate(&spec).is_err()); // coarse grid
        assert!(SolverConfig::new(1.0 / 16.0, 48, 1).validate(&spec).is_ok());
    }

    #[test]
    fn trailing_window_max_ties_to_later() {
        let vals = [1.0, 3.0, 3.0, 2.0, 0.5];
        let out = trailing_window_max(&vals, 2);
        assert_eq!(out[2], (3.0, 2)); // tie resolves to the later index
        assert_eq!(out[3], (3.0, 2));
        assert_eq!(out[4], (3.0, 2)); // window spans w+1 nodes
    }
}
