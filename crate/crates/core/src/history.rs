//! The delayed trajectory segment `u_t` over `[t-k, t]`.
//!
//! A segment is a uniform ring buffer of states plus their stored
//! time-derivatives (right-hand-side evaluations), giving dense cubic
//! Hermite interpolation with `O(dt^4)` error for theta lookups. Sup-in-
//! delay norms are evaluated over the stored nodes only; no interpolated
//! maxima are counted. The norm weight `|eps_t|` pairs with the node where
//! the gradient (respectively Laplacian) term attains its maximum; ties
//! break toward the latest node. Alternative weightings are exposed as
//! diagnostics since the continuous theory leaves this pairing open.

use std::collections::VecDeque;

use thiserror::Error;

use crate::problem::{InitialHistory, TimeProfile};
use crate::spectral::EigenData;

#[derive(Debug, Error, PartialEq)]
pub enum HistoryError {
    #[error("theta = {theta} outside the delay window [-{window}, 0]")]
    OutOfWindow { theta: f64, window: f64 },
}

/// Cubic Hermite value on one panel: endpoint values `y0, y1`, endpoint
/// slopes `d0, d1` (per unit of `t`), local coordinate `s in [0, 1]`,
/// panel width `dt`.
pub fn cubic_hermite(y0: f64, d0: f64, y1: f64, d1: f64, s: f64, dt: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * dt * d0 + h01 * y1 + h11 * dt * d1
}

/// Derivative (per unit of `t`) of the Hermite panel above.
pub fn cubic_hermite_deriv(y0: f64, d0: f64, y1: f64, d1: f64, s: f64, dt: f64) -> f64 {
    let s2 = s * s;
    let h00d = 6.0 * s2 - 6.0 * s;
    let h10d = 3.0 * s2 - 4.0 * s + 1.0;
    let h01d = -6.0 * s2 + 6.0 * s;
    let h11d = 3.0 * s2 - 2.0 * s;
    (h00d * y0 + h01d * y1) / dt + h10d * d0 + h11d * d1
}

/// Which sup-in-delay norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupNormKind {
    /// `max_theta ||u(t+theta)||_2`
    CL2,
    /// `max ||u||^2 + |eps| max ||grad u||^2`
    CHt,
    /// `max ||grad u||^2 + |eps| max ||Delta u||^2`
    CHt1,
}

/// Where the scalar weight `|eps_t|` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpsWeighting {
    /// At the node where the weighted term attains its max (default).
    #[default]
    GradArgmax,
    /// At the segment's latest time.
    Latest,
    /// `max |eps|` over the window.
    WindowMax,
    /// `min |eps|` over the window.
    WindowMin,
}

/// Closed-form past: at or before the initial time the trajectory IS the
/// initial function, so lookups there evaluate it directly instead of
/// interpolating. This also sidesteps the derivative jump of the solution
/// at the initial time.
#[derive(Debug, Clone, PartialEq)]
struct ExactPast {
    phi: InitialHistory,
    tau: f64,
    n_modes: usize,
    /// When present, states are basis evaluations of the modal history:
    /// `state[i] = sum_j rows[i][j] phi_j(theta)` (the finite-difference
    /// reference stores grid values, not coefficients).
    rows: Option<Vec<Vec<f64>>>,
}

impl ExactPast {
    fn eval(&self, theta: f64) -> Vec<f64> {
        let modal = self.phi.eval_vec(theta, self.n_modes);
        match &self.rows {
            None => modal,
            Some(rows) => rows
                .iter()
                .map(|r| r.iter().zip(&modal).map(|(w, c)| w * c).sum())
                .collect(),
        }
    }

    fn eval_deriv(&self, theta: f64) -> Vec<f64> {
        let modal = self.phi.deriv_vec(theta, self.n_modes);
        match &self.rows {
            None => modal,
            Some(rows) => rows
                .iter()
                .map(|r| r.iter().zip(&modal).map(|(w, c)| w * c).sum())
                .collect(),
        }
    }
}

/// Uniform record of `(time, coefficients, d/dt coefficients)` spanning at
/// least the delay window.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySegment {
    times: VecDeque<f64>,
    states: VecDeque<Vec<f64>>,
    derivs: VecDeque<Vec<f64>>,
    dt: f64,
    window: f64,
    exact_past: Option<ExactPast>,
}

impl HistorySegment {
    /// Seeds the segment from the initial history on `[tau-k, tau]`.
    /// `dt` must divide the window exactly.
    pub fn from_initial_history(
        phi: &InitialHistory,
        n_modes: usize,
        tau: f64,
        dt: f64,
        window: f64,
    ) -> Self {
        Self::seed(ExactPast { phi: phi.clone(), tau, n_modes, rows: None }, tau, dt, window)
    }

    /// Seeds a segment of basis evaluations of the modal history:
    /// node states are `rows * phi(theta)`. Used by grid-space solvers.
    pub fn from_initial_history_projected(
        phi: &InitialHistory,
        n_modes: usize,
        rows: Vec<Vec<f64>>,
        tau: f64,
        dt: f64,
        window: f64,
    ) -> Self {
        Self::seed(ExactPast { phi: phi.clone(), tau, n_modes, rows: Some(rows) }, tau, dt, window)
    }

    fn seed(past: ExactPast, tau: f64, dt: f64, window: f64) -> Self {
        let steps = steps_in_window(window, dt);
        let mut seg = Self {
            times: VecDeque::with_capacity(steps + 2),
            states: VecDeque::with_capacity(steps + 2),
            derivs: VecDeque::with_capacity(steps + 2),
            dt,
            window,
            exact_past: None,
        };
        for i in 0..=steps {
            let theta = -window + i as f64 * dt;
            seg.times.push_back(tau + theta);
            seg.states.push_back(past.eval(theta));
            seg.derivs.push_back(past.eval_deriv(theta));
        }
        seg.exact_past = Some(past);
        seg
    }

    /// Builds a segment directly from node data (times must be uniform).
    pub fn from_nodes(
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
        derivs: Vec<Vec<f64>>,
        dt: f64,
        window: f64,
    ) -> Self {
        assert!(times.len() >= 2, "segment needs at least two nodes");
        assert_eq!(times.len(), states.len());
        assert_eq!(times.len(), derivs.len());
        for w in times.windows(2) {
            assert!(
                ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt,
                "segment nodes must be uniformly spaced by dt"
            );
        }
        Self {
            times: times.into(),
            states: states.into(),
            derivs: derivs.into(),
            dt,
            window,
            exact_past: None,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn n_nodes(&self) -> usize {
        self.times.len()
    }

    pub fn latest_time(&self) -> f64 {
        *self.times.back().expect("segment is never empty")
    }

    pub fn earliest_time(&self) -> f64 {
        *self.times.front().expect("segment is never empty")
    }

    pub fn latest_state(&self) -> &[f64] {
        self.states.back().expect("segment is never empty")
    }

    /// Replaces the stored slope at the latest node. The integrator calls
    /// this at the initial time so the first Hermite panel carries the
    /// right-sided (equation) derivative rather than the slope of the
    /// initial function.
    pub fn set_latest_deriv(&mut self, deriv: Vec<f64>) {
        *self.derivs.back_mut().expect("segment is never empty") = deriv;
    }

    pub fn node(&self, i: usize) -> (f64, &[f64]) {
        (self.times[i], &self.states[i])
    }

    /// Appends the next node and drops nodes older than the window.
    pub fn push(&mut self, t: f64, state: Vec<f64>, deriv: Vec<f64>) {
        let expected = self.latest_time() + self.dt;
        assert!(
            (t - expected).abs() <= 1e-6 * self.dt,
            "non-uniform push: expected t = {expected}, got {t}"
        );
        self.times.push_back(t);
        self.states.push_back(state);
        self.derivs.push_back(deriv);
        let cutoff = t - self.window - 0.5 * self.dt;
        while *self.times.front().unwrap() < cutoff {
            self.times.pop_front();
            self.states.pop_front();
            self.derivs.pop_front();
        }
    }

    /// `u_t(theta) = u(t + theta)` by cubic Hermite interpolation; exact at
    /// stored nodes.
    pub fn sample(&self, theta: f64) -> Result<Vec<f64>, HistoryError> {
        let tol = 1e-9 * self.dt.max(1.0);
        if theta < -self.window - tol || theta > tol {
            return Err(HistoryError::OutOfWindow { theta, window: self.window });
        }
        Ok(self.sample_abs(self.latest_time() + theta.clamp(-self.window, 0.0)))
    }

    /// Interpolates at an absolute time. Times up to one panel beyond the
    /// latest node extrapolate the last Hermite piece; this happens for
    /// delayed lookups inside a Runge-Kutta step that reach past the last
    /// accepted node. Panics outside `[earliest, latest + dt]`: audited
    /// configurations keep all lookups inside that range.
    pub fn sample_abs(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        let front = self.times[0];
        let back = self.times[n - 1];
        let tol = 1e-6 * self.dt;
        assert!(
            t >= front - tol && t <= back + self.dt + tol,
            "history lookup at t = {t} outside stored range [{front}, {back}] + dt"
        );
        if let Some(past) = &self.exact_past {
            if t <= past.tau + tol {
                return past.eval(t - past.tau);
            }
        }
        if n == 1 {
            return self.states[0].clone();
        }
        let idx = (((t - front) / self.dt).floor() as isize).clamp(0, n as isize - 2) as usize;
        let s = (t - self.times[idx]) / self.dt;
        let (y0, d0) = (&self.states[idx], &self.derivs[idx]);
        let (y1, d1) = (&self.states[idx + 1], &self.derivs[idx + 1]);
        y0.iter()
            .zip(d0)
            .zip(y1.iter().zip(d1))
            .map(|((a, da), (b, db))| cubic_hermite(*a, *da, *b, *db, s, self.dt))
            .collect()
    }

    fn window_nodes(&self) -> impl Iterator<Item = (f64, &Vec<f64>)> {
        let cutoff = self.latest_time() - self.window - 0.5 * self.dt;
        self.times
            .iter()
            .copied()
            .zip(self.states.iter())
            .filter(move |(t, _)| *t >= cutoff)
    }

    /// `max_theta ||u(t+theta)||_2` over stored nodes (not squared).
    pub fn c_l2_norm(&self, eigen: &EigenData) -> f64 {
        self.c_l2_sq(eigen).sqrt()
    }

    pub fn c_l2_sq(&self, _eigen: &EigenData) -> f64 {
        self.window_nodes()
            .map(|(_, c)| c.iter().map(|x| x * x).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Composite `||u_t||^2_{C_L2} + |eps| ||grad u_t||^2_{C_L2}`.
    pub fn c_ht_sq(&self, eigen: &EigenData, eps: &TimeProfile) -> f64 {
        self.c_ht_sq_with(eigen, eps, EpsWeighting::GradArgmax)
    }

    pub fn c_ht_sq_with(&self, eigen: &EigenData, eps: &TimeProfile, w: EpsWeighting) -> f64 {
        let (max_l2, max_grad, t_grad) = self.window_extrema(eigen, 1);
        let _ = max_grad;
        max_l2 + self.eps_weight(eps, t_grad, w) * max_grad
    }

    /// Composite `||grad u_t||^2_{C_L2} + |eps| ||Delta u_t||^2_{C_L2}`.
    pub fn c_ht1_sq(&self, eigen: &EigenData, eps: &TimeProfile) -> f64 {
        self.c_ht1_sq_with(eigen, eps, EpsWeighting::GradArgmax)
    }

    pub fn c_ht1_sq_with(&self, eigen: &EigenData, eps: &TimeProfile, w: EpsWeighting) -> f64 {
        let (max_grad, max_lap, t_lap) = self.window_extrema(eigen, 2);
        max_grad + self.eps_weight(eps, t_lap, w) * max_lap
    }

    /// Maxima of `sum lambda^(order-1) c^2` and `sum lambda^order c^2` over
    /// window nodes, plus the time where the higher-order term peaks.
    fn window_extrema(&self, eigen: &EigenData, order: u32) -> (f64, f64, f64) {
        let mut lo_max = 0.0f64;
        let mut hi_max = 0.0f64;
        let mut t_hi = self.latest_time();
        for (t, c) in self.window_nodes() {
            let mut lo = 0.0;
            let mut hi = 0.0;
            for (x, l) in c.iter().zip(&eigen.lambda) {
                let base = l.powi(order as i32 - 1);
                lo += base * x * x;
                hi += base * l * x * x;
            }
            lo_max = lo_max.max(lo);
            if hi >= hi_max {
                hi_max = hi;
                t_hi = t;
            }
        }
        (lo_max, hi_max, t_hi)
    }

    fn eps_weight(&self, eps: &TimeProfile, t_argmax: f64, w: EpsWeighting) -> f64 {
        match w {
            EpsWeighting::GradArgmax => eps.eval(t_argmax).abs(),
            EpsWeighting::Latest => eps.eval(self.latest_time()).abs(),
            EpsWeighting::WindowMax => self
                .window_nodes()
                .map(|(t, _)| eps.eval(t).abs())
                .fold(0.0, f64::max),
            EpsWeighting::WindowMin => self
                .window_nodes()
                .map(|(t, _)| eps.eval(t).abs())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Window maxima of `||u||^2` and `||grad u||^2` separately (the
    /// contraction estimate weights the gradient part by `L` instead of
    /// `|eps|`).
    pub fn c_l2_and_grad_sq(&self, eigen: &EigenData) -> (f64, f64) {
        let (l2, grad, _) = self.window_extrema(eigen, 1);
        (l2, grad)
    }

    /// Dispatcher for the three sup norms. `CL2` returns the norm itself;
    /// the time-dependent kinds return the squared composite the estimates
    /// work with.
    pub fn sup_norm(&self, kind: SupNormKind, eigen: &EigenData, eps: &TimeProfile) -> f64 {
        match kind {
            SupNormKind::CL2 => self.c_l2_norm(eigen),
            SupNormKind::CHt => self.c_ht_sq(eigen, eps),
            SupNormKind::CHt1 => self.c_ht1_sq(eigen, eps),
        }
    }

    /// Node-wise difference of two segments sharing timestamps.
    pub fn difference(&self, other: &Self) -> Self {
        assert_eq!(self.times.len(), other.times.len(), "segments must share nodes");
        for (a, b) in self.times.iter().zip(&other.times) {
            assert!((a - b).abs() <= 1e-6 * self.dt, "segments must share timestamps");
        }
        let sub = |xs: &VecDeque<Vec<f64>>, ys: &VecDeque<Vec<f64>>| {
            xs.iter()
                .zip(ys)
                .map(|(x, y)| x.iter().zip(y).map(|(a, b)| a - b).collect())
                .collect()
        };
        Self {
            times: self.times.clone(),
            states: sub(&self.states, &other.states),
            derivs: sub(&self.derivs, &other.derivs),
            dt: self.dt,
            window: self.window,
            // differences are consumed node-wise for norms; no dense past
            exact_past: None,
        }
    }

    /// Long-form CSV dump `t,j,coef` at 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,j,coef")?;
        for (t, state) in self.times.iter().zip(&self.states) {
            for (j, c) in state.iter().enumerate() {
                writeln!(w, "{},{},{}", crate::report::g17(*t), j + 1, crate::report::g17(*c))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn steps_in_window(window: f64, dt: f64) -> usize {
    let ratio = window / dt;
    let steps = ratio.round();
    assert!(
        (ratio - steps).abs() <= 1e-6,
        "dt = {dt} must divide the delay window k = {window} exactly"
    );
    steps as usize
}
