//! Independent verifiers: closed forms and a second spatial discretization.
//!
//! With one mode and constant coefficients the mode ODE decouples to
//! `u' = -a0 lambda1 u / (1 + eps0 lambda1)`, solved exactly by an
//! exponential. The finite-difference reference solves the same equation
//! on a centered second-order grid with the mass-modified system
//! `(I + eps(t) A) u' = -a(l(u)) A u + F`, `A` the discrete Dirichlet
//! Laplacian, and the same method-of-steps stepping. Cross-check grade
//! only; the spectral solver is the production path.

use crate::history::HistorySegment;
use crate::problem::{audit, ProblemSpec, ProbeGrid};
use crate::quad::cumulative_simpson_blocked;
use crate::solver::{SolverConfig, SolverError, TrajNode, TrajectoryRecord};
use crate::spectral::{eigenvalues, norms_of_coeffs, SineBasis};

/// Exact solution of the decoupled linear mode ODE:
/// `c * exp(-a0 lambda1 (t - tau) / (1 + eps0 lambda1))`.
pub fn single_mode_closed_form(
    a0: f64,
    eps0: f64,
    lambda1: f64,
    c: f64,
    tau: f64,
    t: f64,
) -> Result<f64, SolverError> {
    let mass = 1.0 + eps0 * lambda1;
    if mass <= 0.0 {
        return Err(SolverError::DegenerateMass { t: tau, mode: 1, value: mass });
    }
    Ok(c * (-a0 * lambda1 * (t - tau) / mass).exp())
}

/// Finite-difference reference output: the projected trajectory record
/// plus the raw endpoint grid values for grid-space comparisons.
#[derive(Debug, Clone)]
pub struct FdReference {
    pub record: TrajectoryRecord,
    /// Interior grid abscissae.
    pub x: Vec<f64>,
    pub dx: f64,
    /// Grid values of the final state.
    pub endpoint_values: Vec<f64>,
}

/// Prefactored tridiagonal solve for `I + eps * A`. The matrix changes
/// with `eps(t)`; the factorization is reused until `eps` moves by more
/// than `1e-12` relatively.
struct MassFactor {
    eps: f64,
    off: f64,
    diag: Vec<f64>,
    mult: Vec<f64>,
}

impl MassFactor {
    fn new(eps: f64, p: usize, dx: f64) -> Self {
        let off = -eps / (dx * dx);
        let d0 = 1.0 + 2.0 * eps / (dx * dx);
        let mut diag = vec![0.0; p];
        let mut mult = vec![0.0; p];
        diag[0] = d0;
        for i in 1..p {
            mult[i] = off / diag[i - 1];
            diag[i] = d0 - mult[i] * off;
        }
        Self { eps, off, diag, mult }
    }

    fn solve(&self, r: &[f64]) -> Vec<f64> {
        let p = r.len();
        let mut y = vec![0.0; p];
        y[0] = r[0];
        for i in 1..p {
            y[i] = r[i] - self.mult[i] * y[i - 1];
        }
        let mut x = vec![0.0; p];
        x[p - 1] = y[p - 1] / self.diag[p - 1];
        for i in (0..p - 1).rev() {
            x[i] = (y[i] - self.off * x[i + 1]) / self.diag[i];
        }
        x
    }
}

fn apply_laplacian(u: &[f64], dx: f64) -> Vec<f64> {
    let p = u.len();
    let inv = 1.0 / (dx * dx);
    (0..p)
        .map(|i| {
            let left = if i == 0 { 0.0 } else { u[i - 1] };
            let right = if i + 1 == p { 0.0 } else { u[i + 1] };
            (2.0 * u[i] - left - right) * inv
        })
        .collect()
}

fn grid_grad_sq(u: &[f64], dx: f64) -> f64 {
    let p = u.len();
    let mut s = 0.0;
    let mut prev = 0.0;
    for &v in u {
        let d = (v - prev) / dx;
        s += d * d;
        prev = v;
    }
    let d = (0.0 - u[p - 1]) / dx;
    s += d * d;
    s * dx
}

/// Solves the problem on `points` interior grid nodes with the given step
/// configuration. Returns the modal projection of the run (same record
/// schema as the spectral solver) plus the raw endpoint.
pub fn finite_difference_reference(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    points: usize,
    tau: f64,
    t_end: f64,
) -> Result<FdReference, SolverError> {
    audit(spec, &ProbeGrid::default()).into_result()?;
    cfg.validate(spec)?;
    let span = t_end - tau;
    let steps_f = span / cfg.dt;
    let n_steps = steps_f.round() as usize;
    if span < 0.0 || (steps_f - n_steps as f64).abs() > 1e-6 {
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
    let p = points;
    let len = spec.domain.length;
    let dx = len / (p + 1) as f64;
    let x: Vec<f64> = (1..=p).map(|i| i as f64 * dx).collect();
    let eigen = eigenvalues(&spec.domain);
    let scale = (2.0 / len).sqrt();
    // rows[i][j] = w_{j+1}(x_i)
    let rows: Vec<Vec<f64>> = x
        .iter()
        .map(|&xi| {
            (1..=n)
                .map(|j| scale * (j as f64 * std::f64::consts::PI * xi / len).sin())
                .collect()
        })
        .collect();
    // weight values of the averaging kernel on the grid
    let j_grid: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(&spec.nonlocal.weights).map(|(w, c)| w * c).sum())
        .collect();

    let l_of = |u: &[f64]| -> f64 { dx * u.iter().zip(&j_grid).map(|(a, b)| a * b).sum::<f64>() };
    let h_grid = |t: f64| -> Vec<f64> {
        let hm = spec.forcing.eval_vec(t, n);
        rows.iter()
            .map(|r| r.iter().zip(&hm).map(|(w, c)| w * c).sum())
            .collect()
    };
    let project = |u: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| dx * u.iter().zip(rows.iter().map(|r| r[j])).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    };

    let mut segment = HistorySegment::from_initial_history_projected(
        &spec.initial_history,
        n,
        rows.clone(),
        tau,
        cfg.dt,
        spec.window(),
    );

    let mut factor: Option<MassFactor> = None;
    let rhs = |t: f64,
                   u: &[f64],
                   seg: &HistorySegment,
                   factor: &mut Option<MassFactor>|
     -> Result<(Vec<f64>, f64, f64, Vec<f64>, Vec<f64>), SolverError> {
        let eps = spec.epsilon.eval(t);
        if 1.0 + eps * eigen.lambda[0] <= 1e-12 {
            return Err(SolverError::DegenerateMass { t, mode: 1, value: 1.0 + eps });
        }
        let refactor = match factor {
            None => true,
            Some(f) => (f.eps - eps).abs() > 1e-12 * f.eps.abs().max(1e-300),
        };
        if refactor {
            *factor = Some(MassFactor::new(eps, p, dx));
        }
        let l_val = l_of(u);
        let a_val = spec.diffusion.eval(l_val);
        let au = apply_laplacian(u, dx);
        let mut fg: Vec<f64> = u.iter().map(|&v| spec.nonlinearity.eval(v)).collect();
        if !spec.delay.is_none() {
            let g = spec.delay.eval(t, seg, p);
            for (a, b) in fg.iter_mut().zip(&g) {
                *a += b;
            }
        }
        let h = h_grid(t);
        let r: Vec<f64> = (0..p).map(|i| fg[i] + h[i] - a_val * au[i]).collect();
        let du = factor.as_ref().unwrap().solve(&r);
        Ok((du, a_val, l_val, fg, h))
    };

    let mut u: Vec<f64> = segment.latest_state().to_vec();
    let (d0, a0, l0, fg0, h0) = rhs(tau, &u, &segment, &mut factor)?;
    segment.set_latest_deriv(d0.clone());

    let mut nodes: Vec<TrajNode> = Vec::new();
    let mut proj_seg: Option<HistorySegment> = None;
    let push_node = |t: f64,
                         u: &[f64],
                         du: &[f64],
                         a_val: f64,
                         l_val: f64,
                         fg: &[f64],
                         h: &[f64],
                         nodes: &mut Vec<TrajNode>,
                         proj_seg: &mut Option<HistorySegment>| {
        let coeffs = project(u);
        let dcoeffs = project(du);
        let eps = spec.epsilon.eval(t);
        let eps_d = spec.epsilon.deriv(t);
        let norms = norms_of_coeffs(&coeffs, &eigen, eps);
        let seg = proj_seg.get_or_insert_with(|| {
            HistorySegment::from_initial_history(
                &spec.initial_history,
                n,
                tau,
                cfg.dt * cfg.record_every as f64,
                window_for_record(spec.window(), cfg),
            )
        });
        if t > tau {
            seg.push(t, coeffs.clone(), dcoeffs);
        }
        let l2_grid = dx * u.iter().map(|v| v * v).sum::<f64>();
        let grad_grid = grid_grad_sq(u, dx);
        let power = 2.0 * dx * u.iter().zip(fg.iter().zip(h)).map(|(v, (f, hh))| (f + hh) * v).sum::<f64>();
        nodes.push(TrajNode {
            t,
            coeffs,
            norms,
            c_l2_sq: seg.c_l2_sq(&eigen),
            c_ht_sq: seg.c_ht_sq(&eigen, &spec.epsilon),
            a_value: a_val,
            l_value: l_val,
            energy: l2_grid + eps * grad_grid,
            dissipation: (2.0 * a_val - eps_d) * grad_grid,
            power,
            energy_residual: 0.0,
        });
    };
    push_node(tau, &u, &d0, a0, l0, &fg0, &h0, &mut nodes, &mut proj_seg);

    let mut d_latest = d0;
    for step in 0..n_steps {
        let t0 = tau + step as f64 * cfg.dt;
        let t1 = tau + (step + 1) as f64 * cfg.dt;
        let th = t0 + 0.5 * cfg.dt;
        let dt = cfg.dt;

        let k1 = d_latest.clone();
        let y2: Vec<f64> = u.iter().zip(&k1).map(|(a, b)| a + 0.5 * dt * b).collect();
        let (k2, ..) = rhs(th, &y2, &segment, &mut factor)?;
        let y3: Vec<f64> = u.iter().zip(&k2).map(|(a, b)| a + 0.5 * dt * b).collect();
        let (k3, ..) = rhs(th, &y3, &segment, &mut factor)?;
        let y4: Vec<f64> = u.iter().zip(&k3).map(|(a, b)| a + dt * b).collect();
        let (k4, ..) = rhs(t1, &y4, &segment, &mut factor)?;
        for (i, ui) in u.iter_mut().enumerate() {
            *ui += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let l2: f64 = u.iter().map(|c| c * c).sum();
        if !l2.is_finite() || l2 * dx > crate::solver::BLOWUP_GUARD {
            return Err(SolverError::NonFinite { t: t1 });
        }
        let (d1, a1, l1, fg1, h1) = rhs(t1, &u, &segment, &mut factor)?;
        segment.push(t1, u.clone(), d1.clone());
        if (step + 1) % cfg.record_every == 0 {
            push_node(t1, &u, &d1, a1, l1, &fg1, &h1, &mut nodes, &mut proj_seg);
        }
        d_latest = d1;
    }

    let dt_rec = cfg.dt * cfg.record_every as f64;
    let diss: Vec<f64> = nodes.iter().map(|n| n.dissipation).collect();
    let power: Vec<f64> = nodes.iter().map(|n| n.power).collect();
    let block = crate::solver::breakpoint_block(spec.window(), dt_rec);
    let cd = cumulative_simpson_blocked(&diss, dt_rec, block);
    let cp = cumulative_simpson_blocked(&power, dt_rec, block);
    let e0 = nodes[0].energy;
    for (i, node) in nodes.iter_mut().enumerate() {
        node.energy_residual = (node.energy - e0) + cd[i] - cp[i];
    }

    let prelude: Vec<(f64, Vec<f64>)> = {
        let seg0 = HistorySegment::from_initial_history(
            &spec.initial_history,
            n,
            tau,
            cfg.dt,
            spec.window(),
        );
        (0..seg0.n_nodes() - 1)
            .map(|i| {
                let (t, c) = seg0.node(i);
                (t, c.to_vec())
            })
            .collect()
    };

    let record = TrajectoryRecord {
        tau,
        t_end,
        dt: cfg.dt,
        record_every: cfg.record_every,
        window: spec.window(),
        prelude,
        nodes,
        final_segment: proj_seg.expect("at least one node recorded"),
        eigen,
        stages: None,
    };
    Ok(FdReference { record, x, dx, endpoint_values: u })
}

/// The projected sup-norm segment advances at record resolution; its
/// window must still cover `k` (whole multiples of the record step).
fn window_for_record(window: f64, cfg: &SolverConfig) -> f64 {
    let dt_rec = cfg.dt * cfg.record_every as f64;
    let panels = (window / dt_rec).ceil();
    panels * dt_rec
}

/// `L^2(0, len)` distance between a spectral state and grid values,
/// evaluated on the grid.
pub fn grid_l2_difference(
    coeffs: &[f64],
    fd: &FdReference,
    spec: &ProblemSpec,
) -> Result<f64, SolverError> {
    let basis = SineBasis::new(&spec.domain, fd.x.len())?;
    let synth = basis.synth(coeffs);
    let sum: f64 = synth
        .iter()
        .zip(&fd.endpoint_values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((fd.dx * sum).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{default_scenario_with_config, InitialHistory, ScenarioName};
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_values() {
        // t = tau
        assert_eq!(single_mode_closed_form(3.0, 1.0, 1.0, 2.0, 0.5, 0.5).unwrap(), 2.0);
        // a0 = 0: constant in time
        assert_eq!(single_mode_closed_form(0.0, 1.0, 1.0, 2.0, 0.0, 9.0).unwrap(), 2.0);
        // a0 = 3, eps0 = 1, lambda1 = 1, c = 2, t - tau = 1: 2 e^{-1.5}
        let v = single_mode_closed_form(3.0, 1.0, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(v, 2.0 * (-1.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(v, 0.446_260_320_296_859_64, epsilon = 1e-15);
        // degenerate mass operator
        assert!(single_mode_closed_form(3.0, -2.0, 1.0, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn fd_zero_scenario_stays_zero() {
        let (mut spec, cfg) = default_scenario_with_config(ScenarioName::CubicDelayed);
        spec.forcing = Default::default();
        spec.initial_history = InitialHistory::default();
        let fd = finite_difference_reference(&spec, &cfg, 64, 0.0, 1.0).unwrap();
        assert!(fd.endpoint_values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fd_matches_closed_form_at_grid_order() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::LinearSingleMode);
        let cfg = cfg.with_dt(1.0 / 128.0);
        let err_at = |points: usize| {
            let fd = finite_difference_reference(&spec, &cfg, points, 0.0, 1.0).unwrap();
            let exact = single_mode_closed_form(3.0, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
            (fd.record.endpoint().coeffs[0] - exact).abs()
        };
        let e1 = err_at(64);
        let e2 = err_at(128);
        assert!(e1 < 1e-4, "coarse-grid error {e1}");
        // second-order spatial convergence: halving dx quarters the error
        let ratio = e1 / e2;
        assert!(ratio > 3.0 && ratio < 5.5, "grid-refinement ratio {ratio}");
    }

    #[test]
    fn fd_cross_checks_spectral_on_cubic() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::CubicDelayed);
        let cfg = cfg.with_dt(1.0 / 64.0);
        let spectral = crate::solver::integrate(&spec, &cfg, 0.0, 1.0).unwrap();
        let fd = finite_difference_reference(&spec, &cfg, 256, 0.0, 1.0).unwrap();
        let d = grid_l2_difference(&spectral.endpoint().coeffs, &fd, &spec).unwrap();
        assert!(d < 1e-4, "endpoint L2 difference {d}");
    }
}
