//! Explicit constants and bounds of the dissipative estimates.
//!
//! The exponential pullback estimate controls the windowed energy norm by
//! three fully explicit terms:
//!
//! ```text
//! ||u_t||^2_{C_L2} + |eps_t| ||grad u_t||^2_{C_L2}
//!   <= coef_b * (2 C0 |Omega| / eta) e^{eta k}
//!    + coef_a * e^{eta k} (||phi||^2_{C_L2} + eps_tau ||grad phi||^2_{C_L2}) e^{-eta1 (t - tau)}
//!    + coef_c * e^{eta k} int_tau^t e^{-eta1 (t - s)} ||h(s)||_{-1}^2 ds,
//! ```
//!
//! The `e^{eta k}` window factor multiplies the initial-data term as well:
//! for `t < tau + k` the sup still sees raw history, so the term may not
//! decay below `||phi||^2` before one delay length has elapsed. Dropping
//! that factor makes the estimate false on the delay-free single-mode
//! problem at `t = tau + k`.
//!
//! with `0 < eta < (1+L) lambda1 / (1 + lambda1 L)`, the delay-corrected
//! rate `eta1 = eta - C_g e^{eta k} / (1 + lambda1 L) > 0`, and
//!
//! ```text
//! coef_b = 1 + C_g e^{eta k} / ((1 + lambda1 L) eta1),
//! coef_a = coef_c = 1 + C_g e^{eta k} / ((1 + lambda1 L) (eta - eta1)).
//! ```
//!
//! Because `eta - eta1` IS `C_g e^{eta k} / (1 + lambda1 L)`, the third
//! coefficient collapses to exactly 2 whenever a delay is present; the
//! delay-free limit is defined as 1 (no Gronwall correction exists then).
//! The phi-independent part plus a margin `delta` is the absorbing radius
//! `rho^2(t)`; the tempered-universe test and the two-trajectory
//! contraction functional complete the section-4 toolkit.

use thiserror::Error;

use crate::problem::ProblemSpec;
use crate::quad::simpson_uniform;
use crate::report::g17;
use crate::solver::TrajectoryRecord;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error(
        "delay too strong: eta1 <= 0 for every admissible eta (sup eta1 = {sup_eta1} at eta = {at_eta})"
    )]
    DelayTooStrong { sup_eta1: f64, at_eta: f64 },
    #[error("eta = {eta} outside the admissible interval (0, {max})")]
    EtaOutOfRange { eta: f64, max: f64 },
    #[error("forcing tail integral did not converge within {horizon} time units")]
    ForcingNotTempered { horizon: f64 },
    #[error("trajectory records do not share timestamps")]
    TimestampMismatch,
}

/// Derived estimate constants for one problem.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    pub eta: f64,
    pub eta1: f64,
    /// Prefactor of the initial-data term.
    pub coef_a: f64,
    /// Prefactor of the constant term.
    pub coef_b: f64,
    /// Prefactor of the forcing term.
    pub coef_c: f64,
    pub lambda1: f64,
    /// `L`, the bound on `sup(|eps| + |eps'|)`.
    pub l_bound: f64,
    pub c_g: f64,
    pub window: f64,
    pub c0: f64,
    pub omega_measure: f64,
    /// Margin added to the absorbing radius.
    pub delta: f64,
}

/// Default admissible rate: 90% of the open upper end of the interval.
pub fn default_eta(lambda1: f64, l_bound: f64) -> f64 {
    0.9 * (1.0 + l_bound) * lambda1 / (1.0 + lambda1 * l_bound)
}

fn eta1_of(eta: f64, c_g: f64, window: f64, lambda1: f64, l_bound: f64) -> f64 {
    eta - c_g * (eta * window).exp() / (1.0 + lambda1 * l_bound)
}

/// Builds the constants from raw parameters (tests drive this directly).
pub fn constants_from_parts(
    eta: f64,
    c_g: f64,
    window: f64,
    lambda1: f64,
    l_bound: f64,
    c0: f64,
    omega_measure: f64,
    delta_scale: f64,
) -> Result<BoundConstants, EnergyError> {
    let eta_max = (1.0 + l_bound) * lambda1 / (1.0 + lambda1 * l_bound);
    if !(eta > 0.0 && eta < eta_max) {
        return Err(EnergyError::EtaOutOfRange { eta, max: eta_max });
    }
    let eta1 = eta1_of(eta, c_g, window, lambda1, l_bound);
    if eta1 <= 0.0 {
        let (sup, at) = sup_eta1(c_g, window, lambda1, l_bound);
        return Err(EnergyError::DelayTooStrong { sup_eta1: sup, at_eta: at });
    }
    let denom = 1.0 + lambda1 * l_bound;
    let (coef_a, coef_b, coef_c) = if c_g == 0.0 {
        // delay-free limit: no Gronwall correction terms exist
        (1.0, 1.0, 1.0)
    } else {
        let corr = c_g * (eta * window).exp() / denom;
        let coef_b = 1.0 + corr / eta1;
        let coef_ac = 1.0 + corr / (eta - eta1);
        (coef_ac, coef_b, coef_ac)
    };
    let constant_term = coef_b * 2.0 * c0 * omega_measure / eta * (eta * window).exp();
    Ok(BoundConstants {
        eta,
        eta1,
        coef_a,
        coef_b,
        coef_c,
        lambda1,
        l_bound,
        c_g,
        window,
        c0,
        omega_measure,
        delta: delta_scale * constant_term,
    })
}

/// Supremum of `eta1(eta)` over the admissible interval; the maximizer of
/// the concave map `eta - beta e^{eta k}` is `-ln(beta k)/k` clamped into
/// the interval.
fn sup_eta1(c_g: f64, window: f64, lambda1: f64, l_bound: f64) -> (f64, f64) {
    let eta_max = (1.0 + l_bound) * lambda1 / (1.0 + lambda1 * l_bound);
    let beta = c_g / (1.0 + lambda1 * l_bound);
    let interior = if beta > 0.0 && window > 0.0 {
        -(beta * window).ln() / window
    } else {
        eta_max
    };
    let at = interior.clamp(1e-12, eta_max * (1.0 - 1e-12));
    (eta1_of(at, c_g, window, lambda1, l_bound), at)
}

/// Derives the constants for an audited spec. With no explicit `eta` the
/// default is used; if the default leaves `eta1 <= 0` the maximizer of
/// `eta1` is tried before giving up.
pub fn derive_constants(
    spec: &ProblemSpec,
    eta_choice: Option<f64>,
) -> Result<BoundConstants, EnergyError> {
    let eigen = crate::spectral::eigenvalues(&spec.domain);
    let lambda1 = eigen.lambda1();
    let l_bound = spec.epsilon.bound;
    let c_g = spec.delay.lipschitz_bound;
    let k = spec.window();
    let c0 = spec.nonlinearity.c0;
    let omega = spec.domain.measure();
    let delta_scale = 1e-3;
    match eta_choice {
        Some(eta) => constants_from_parts(eta, c_g, k, lambda1, l_bound, c0, omega, delta_scale),
        None => {
            let eta = default_eta(lambda1, l_bound);
            constants_from_parts(eta, c_g, k, lambda1, l_bound, c0, omega, delta_scale).or_else(
                |_| {
                    let (_, at) = sup_eta1(c_g, k, lambda1, l_bound);
                    constants_from_parts(at, c_g, k, lambda1, l_bound, c0, omega, delta_scale)
                },
            )
        }
    }
}

/// Initial-segment norms entering the bound.
#[derive(Debug, Clone, Copy)]
pub struct PhiNorms {
    /// `||phi||^2_{C_L2}`
    pub c_l2_sq: f64,
    /// `eps_tau * ||grad phi||^2_{C_L2}`
    pub eps_tau_grad_sq: f64,
}

impl PhiNorms {
    pub fn total(&self) -> f64 {
        self.c_l2_sq + self.eps_tau_grad_sq
    }
}

/// Right-hand side of the pullback estimate at time `t`.
///
/// `h_hminus1_sq` supplies `||h(s)||_{-1}^2`; the forcing integral is
/// evaluated by composite Simpson on a grid fine enough for the decay rate.
pub fn pullback_bound_rhs(
    consts: &BoundConstants,
    tau: f64,
    t: f64,
    phi: &PhiNorms,
    h_hminus1_sq: &dyn Fn(f64) -> f64,
) -> f64 {
    let ek = (consts.eta * consts.window).exp();
    let constant = consts.coef_b * 2.0 * consts.c0 * consts.omega_measure / consts.eta * ek;
    let initial = consts.coef_a * ek * phi.total() * (-consts.eta1 * (t - tau)).exp();
    let forcing = consts.coef_c * ek * forcing_integral(consts.eta1, tau, t, h_hminus1_sq);
    constant + initial + forcing
}

/// `int_tau^t e^{-eta1 (t-s)} w(s) ds` by Simpson on a uniform grid.
fn forcing_integral(eta1: f64, tau: f64, t: f64, w: &dyn Fn(f64) -> f64) -> f64 {
    if t <= tau {
        return 0.0;
    }
    let span = t - tau;
    // resolve both the weight's decay scale and the integrand
    let n = ((span * 32.0).ceil() as usize).clamp(32, 16384);
    let dt = span / n as f64;
    let vals: Vec<f64> = (0..=n)
        .map(|i| {
            let s = tau + i as f64 * dt;
            (-eta1 * (t - s)).exp() * w(s)
        })
        .collect();
    simpson_uniform(&vals, dt)
}

/// Absorbing radius `rho^2(t)`: the phi-independent part of the pullback
/// estimate plus the margin `delta`. The improper forcing integral is
/// truncated adaptively once a block contributes below `1e-16` of the
/// running total.
pub fn absorbing_radius(
    consts: &BoundConstants,
    t: f64,
    h_hminus1_sq: &dyn Fn(f64) -> f64,
) -> Result<f64, EnergyError> {
    let ek = (consts.eta * consts.window).exp();
    let constant = consts.coef_b * 2.0 * consts.c0 * consts.omega_measure / consts.eta * ek;
    // integrate blocks of length 2/eta1 backward from t
    let block = 2.0 / consts.eta1;
    let mut total = 0.0;
    let mut start = t;
    let max_horizon = 64.0 * block;
    loop {
        let lo = start - block;
        let n = 128;
        let dt = block / n as f64;
        let vals: Vec<f64> = (0..=n)
            .map(|i| {
                let s = lo + i as f64 * dt;
                (-consts.eta1 * (t - s)).exp() * h_hminus1_sq(s)
            })
            .collect();
        let contribution = simpson_uniform(&vals, dt);
        total += contribution;
        start = lo;
        if contribution.abs() <= 1e-16 * total.abs() && t - start >= 2.0 * block {
            break;
        }
        if !contribution.is_finite() || t - start > max_horizon {
            return Err(EnergyError::ForcingNotTempered { horizon: t - start });
        }
    }
    Ok(constant + consts.coef_c * ek * total + consts.delta)
}

/// Numeric surrogate for the tempered-universe membership test: true iff
/// `e^{eta1 tau} r^2(tau)` falls below `tol` along the receding probes.
pub fn tempered_test(
    radius_sq: &dyn Fn(f64) -> f64,
    eta1: f64,
    probe_taus: &[f64],
    tol: f64,
) -> bool {
    assert!(
        probe_taus.windows(2).all(|w| w[1] < w[0]),
        "probes must decrease toward the horizon"
    );
    let weighted: Vec<f64> =
        probe_taus.iter().map(|tau| (eta1 * tau).exp() * radius_sq(*tau)).collect();
    match (weighted.first(), weighted.last()) {
        (Some(first), Some(last)) => *last <= tol * (1.0 + first.abs()) && last <= first,
        _ => false,
    }
}

/// The two-trajectory contraction functional
///
/// ```text
/// psi = 2 eta~ int ||du||^2 ds
///     + 4 C_g e^{-2 eta (t-k)} ( int e^{4 eta s} (||u1_s||^2_C + ||u2_s||^2_C) ds )^(1/2)
///                               ( int ||du||^2 ds )^(1/2),
/// ```
///
/// evaluated with the exponential factored into the integrand
/// (`e^{-4 eta (t-k-s)}`) to avoid overflow; Simpson quadrature on the
/// shared record grid.
pub fn contraction_functional(
    traj1: &TrajectoryRecord,
    traj2: &TrajectoryRecord,
    consts: &BoundConstants,
    spec: &ProblemSpec,
) -> Result<f64, EnergyError> {
    if traj1.nodes.len() != traj2.nodes.len() {
        return Err(EnergyError::TimestampMismatch);
    }
    let dt = traj1.dt_record();
    let t = traj1.t_end;
    let k = consts.window;
    let mut du_sq = Vec::with_capacity(traj1.nodes.len());
    let mut weighted_sum = Vec::with_capacity(traj1.nodes.len());
    for (a, b) in traj1.nodes.iter().zip(&traj2.nodes) {
        if (a.t - b.t).abs() > 1e-9 * (1.0 + a.t.abs()) {
            return Err(EnergyError::TimestampMismatch);
        }
        let d: f64 = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        du_sq.push(d);
        weighted_sum.push((-4.0 * consts.eta * (t - k - a.t)).exp() * (a.c_l2_sq + b.c_l2_sq));
    }
    let int_du = simpson_uniform(&du_sq, dt).max(0.0);
    let int_weighted = simpson_uniform(&weighted_sum, dt).max(0.0);
    Ok(2.0 * spec.nonlinearity.eta_tilde * int_du
        + 4.0 * consts.c_g * int_weighted.sqrt() * int_du.sqrt())
}

/// Per-time contraction functional: `psi` evaluated with integrals over
/// `[tau, t_i]` for every recorded `t_i`. Quadratic in the node count;
/// desk-scale records keep this cheap.
pub fn contraction_series(
    traj1: &TrajectoryRecord,
    traj2: &TrajectoryRecord,
    consts: &BoundConstants,
    spec: &ProblemSpec,
) -> Result<Vec<(f64, f64)>, EnergyError> {
    if traj1.nodes.len() != traj2.nodes.len() {
        return Err(EnergyError::TimestampMismatch);
    }
    let dt = traj1.dt_record();
    let k = consts.window;
    let n = traj1.nodes.len();
    let mut du_sq = Vec::with_capacity(n);
    let mut sums = Vec::with_capacity(n);
    for (a, b) in traj1.nodes.iter().zip(&traj2.nodes) {
        if (a.t - b.t).abs() > 1e-9 * (1.0 + a.t.abs()) {
            return Err(EnergyError::TimestampMismatch);
        }
        let d: f64 = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y) * (x - y)).sum();
        du_sq.push(d);
        sums.push(a.c_l2_sq + b.c_l2_sq);
    }
    let cum_du = crate::quad::cumulative_simpson(&du_sq, dt);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let ti = traj1.nodes[i].t;
        let weighted: Vec<f64> = (0..=i)
            .map(|j| (-4.0 * consts.eta * (ti - k - traj1.nodes[j].t)).exp() * sums[j])
            .collect();
        let int_w = simpson_uniform(&weighted, dt).max(0.0);
        let psi = 2.0 * spec.nonlinearity.eta_tilde * cum_du[i].max(0.0)
            + 4.0 * consts.c_g * int_w.sqrt() * cum_du[i].max(0.0).sqrt();
        out.push((ti, psi));
    }
    Ok(out)
}

/// One row of the bound-monitor report.
#[derive(Debug, Clone, Copy)]
pub struct BoundRow {
    pub t: f64,
    pub lhs_c_ht_sq: f64,
    pub rhs_lemma41: f64,
    pub rho_sq: f64,
    pub slack: f64,
}

/// Pullback-estimate monitor along a recorded trajectory: per recorded
/// time, the windowed energy norm against the explicit right-hand side.
pub fn bound_report(
    record: &TrajectoryRecord,
    spec: &ProblemSpec,
    consts: &BoundConstants,
) -> Result<Vec<BoundRow>, EnergyError> {
    let eigen = &record.eigen;
    let phi_seg = crate::history::HistorySegment::from_initial_history(
        &spec.initial_history,
        spec.n_modes(),
        record.tau,
        record.dt,
        spec.window(),
    );
    let phi = PhiNorms {
        c_l2_sq: phi_seg.c_l2_sq(eigen),
        eps_tau_grad_sq: phi_seg.c_ht_sq(eigen, &spec.epsilon) - phi_seg.c_l2_sq(eigen),
    };
    let h = |s: f64| spec.forcing.hminus1_sq(s, eigen);
    let mut rows = Vec::with_capacity(record.nodes.len());
    for node in &record.nodes {
        let rhs = pullback_bound_rhs(consts, record.tau, node.t, &phi, &h);
        let rho = absorbing_radius(consts, node.t, &h)?;
        rows.push(BoundRow {
            t: node.t,
            lhs_c_ht_sq: node.c_ht_sq,
            rhs_lemma41: rhs,
            rho_sq: rho,
            slack: rhs - node.c_ht_sq,
        });
    }
    Ok(rows)
}

/// Slack threshold of the monitors: violations below `-1e-9 (1 + rhs)`.
pub fn slack_ok(slack: f64, rhs: f64) -> bool {
    slack >= -1e-9 * (1.0 + rhs.abs())
}

/// Bound report CSV: `t,lhs_C_Ht_sq,rhs_lemma41,rho_sq,slack`.
pub fn write_bound_csv<W: std::io::Write>(rows: &[BoundRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,lhs_C_Ht_sq,rhs_lemma41,rho_sq,slack")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            g17(r.t),
            g17(r.lhs_c_ht_sq),
            g17(r.rhs_lemma41),
            g17(r.rho_sq),
            g17(r.slack)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{default_scenario, ScenarioName};
    use approx::assert_relative_eq;

    #[test]
    fn eta1_reference_value() {
        // eta = 0.2, k = 1, lambda1 = 1, L = 1, C_g = 0.1:
        // eta1 = 0.2 - 0.05 e^{0.2} = 0.13892986209199151
        let c = constants_from_parts(0.2, 0.1, 1.0, 1.0, 1.0, 1.0, 1.0, 1e-3).unwrap();
        let expect = 0.2 - 0.05 * (0.2f64).exp();
        assert_relative_eq!(c.eta1, expect, epsilon = 1e-15);
        assert_relative_eq!(c.eta1, 0.138_929_862_091_991_51, epsilon = 1e-15);
    }

    #[test]
    fn coef_c_is_two_with_delay_and_one_without() {
        let c = constants_from_parts(0.3, 0.05, 1.5, 1.0, 1.2, 1.0, 1.0, 1e-3).unwrap();
        assert_relative_eq!(c.coef_c, 2.0, max_relative = 1e-12);
        assert_relative_eq!(c.coef_a, 2.0, max_relative = 1e-12);
        let free = constants_from_parts(0.3, 0.0, 1.5, 1.0, 1.2, 1.0, 1.0, 1e-3).unwrap();
        assert_eq!(free.coef_a, 1.0);
        assert_eq!(free.coef_b, 1.0);
        assert_eq!(free.coef_c, 1.0);
        assert_eq!(free.eta1, 0.3);
    }

    #[test]
    fn eta_outside_interval_rejected() {
        // eta_max = (1+1)*1/(1+1) = 1 here
        assert!(matches!(
            constants_from_parts(1.2, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1e-3),
            Err(EnergyError::EtaOutOfRange { .. })
        ));
        assert!(matches!(
            constants_from_parts(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1e-3),
            Err(EnergyError::EtaOutOfRange { .. })
        ));
    }

    #[test]
    fn delay_too_strong_reports_supremum() {
        // C_g so large that eta1 < 0 everywhere
        let err = constants_from_parts(0.5, 10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1e-3).unwrap_err();
        match err {
            EnergyError::DelayTooStrong { sup_eta1, .. } => assert!(sup_eta1 <= 0.0),
            other => panic!("unexpected error {other}"),
        }
        // derive_constants falls back to the eta1 maximizer when the
        // default eta fails but the region is nonempty
        let mut spec = default_scenario(ScenarioName::CubicDelayed);
        spec.delay.lipschitz_bound = 0.8; // default eta 0.9 gives eta1 < 0
        let c = derive_constants(&spec, None).unwrap();
        assert!(c.eta1 > 0.0);
    }

    #[test]
    fn pullback_bound_rhs_terms() {
        let c = constants_from_parts(0.4, 0.1, 1.0, 1.0, 1.3, 1.0, 2.0, 1e-3).unwrap();
        let zero_phi = PhiNorms { c_l2_sq: 0.0, eps_tau_grad_sq: 0.0 };
        let no_h = |_: f64| 0.0;
        // phi = 0, h = 0: only the constant term
        let ek = (c.eta * c.window).exp();
        let constant = c.coef_b * 2.0 * c.c0 * c.omega_measure / c.eta * ek;
        assert_relative_eq!(
            pullback_bound_rhs(&c, 0.0, 5.0, &zero_phi, &no_h),
            constant,
            max_relative = 1e-14
        );
        // t = tau: constant + coef_a e^{eta k} * initial (the window factor
        // covers raw history until one delay has elapsed)
        let phi = PhiNorms { c_l2_sq: 3.0, eps_tau_grad_sq: 1.0 };
        assert_relative_eq!(
            pullback_bound_rhs(&c, 0.0, 0.0, &phi, &no_h),
            constant + c.coef_a * ek * 4.0,
            max_relative = 1e-14
        );
        // t - tau = ln(100)/eta1: the phi term decays by exactly 100
        let t = (100.0f64).ln() / c.eta1;
        assert_relative_eq!(
            pullback_bound_rhs(&c, 0.0, t, &phi, &no_h),
            constant + c.coef_a * ek * 4.0 / 100.0,
            max_relative = 1e-12
        );
        // monotone in phi, c0 and the forcing integral
        let bigger_phi = PhiNorms { c_l2_sq: 4.0, eps_tau_grad_sq: 2.0 };
        assert!(
            pullback_bound_rhs(&c, 0.0, 1.0, &bigger_phi, &no_h)
                > pullback_bound_rhs(&c, 0.0, 1.0, &phi, &no_h)
        );
        let with_h = |_: f64| 0.5;
        assert!(
            pullback_bound_rhs(&c, 0.0, 1.0, &phi, &with_h) > pullback_bound_rhs(&c, 0.0, 1.0, &phi, &no_h)
        );
    }

    #[test]
    fn absorbing_radius_closed_forms() {
        let c = constants_from_parts(0.4, 0.1, 1.0, 1.0, 1.3, 1.0, 2.0, 0.0).unwrap();
        let ek = (c.eta * c.window).exp();
        let constant = c.coef_b * 2.0 * c.c0 * c.omega_measure / c.eta * ek;
        // h = 0, delta = 0
        let r = absorbing_radius(&c, 0.0, &|_| 0.0).unwrap();
        assert_relative_eq!(r, constant, max_relative = 1e-12);
        // constant ||h||_{-1}^2 = H0: forcing term = coef_c e^{eta k} H0/eta1
        let h0 = 0.7;
        let r = absorbing_radius(&c, 3.0, &|_| h0).unwrap();
        assert_relative_eq!(r, constant + c.coef_c * ek * h0 / c.eta1, max_relative = 1e-8);
        // doubling C0 doubles the constant term exactly
        let c2 = constants_from_parts(0.4, 0.1, 1.0, 1.0, 1.3, 2.0, 2.0, 0.0).unwrap();
        let r2 = absorbing_radius(&c2, 0.0, &|_| 0.0).unwrap();
        assert_relative_eq!(r2, 2.0 * constant, max_relative = 1e-12);
    }

    #[test]
    fn absorbing_radius_rejects_untempered_forcing() {
        let c = constants_from_parts(0.4, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        // ||h(s)||^2 growing like e^{2 eta1 |s|} backward: divergent
        let err = absorbing_radius(&c, 0.0, &|s| (2.0 * c.eta1 * (-s)).exp()).unwrap_err();
        assert!(matches!(err, EnergyError::ForcingNotTempered { .. }));
    }

    #[test]
    fn tempered_examples() {
        let eta1 = 0.5;
        let probes: Vec<f64> = (0..=40).map(|i| -(i as f64)).collect();
        // constant radius: weighted by e^{eta1 tau} -> 0
        assert!(tempered_test(&|_| 3.0, eta1, &probes, 1e-6));
        // r^2 = e^{-2 eta1 tau}: product diverges
        assert!(!tempered_test(&|tau: f64| (-2.0 * eta1 * tau).exp(), eta1, &probes, 1e-6));
        // polynomial growth loses to the exponential
        assert!(tempered_test(&|tau: f64| tau.abs().max(1.0), eta1, &probes, 1e-6));
    }
}
