//! Pullback experiments and the regularity decomposition.
//!
//! Ensembles evolve seeded samples of the absorbing ball from receding
//! initial times to a fixed target time; the endpoint segments from a far
//! initial time approximate the attractor section, and the Hausdorff
//! semidistance measures one-sided set convergence.
//!
//! The regularity study splits the forcing into a resolved part and an
//! `H^{-1}`-small remainder, then decomposes the solution as `u = v + v1`:
//! `v` carries the initial data and the remainder forcing through a linear
//! equation whose diffusion coefficient `a(l(u))` is replayed from the
//! stored run, and `v1` starts from rest and carries `f(u) + g(t, u_t) +
//! h_resolved`. Replaying the exact per-stage coefficient samples of the
//! `u` run makes `v + v1` reproduce `u`'s Runge-Kutta arithmetic to
//! round-off, which is the superposition check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::energy::{absorbing_radius, derive_constants, BoundConstants, EnergyError};
use crate::history::{HistorySegment, SupNormKind};
use crate::problem::{
    audit, HistoryMode, HistoryShape, InitialHistory, ProblemSpec, ProbeGrid,
};
use crate::quad::simpson_uniform;
use crate::report::g17;
use crate::solver::{
    integrate_unaudited, trailing_window_max, SolverConfig, SolverError, StepStages,
};
use crate::spectral::EigenData;

#[derive(Debug, Error)]
pub enum AttractorError {
    #[error("semidistance needs nonempty sets")]
    EmptySet,
    #[error("cannot split forcing with tolerance theta = {theta}; it must be positive")]
    CannotSplit { theta: f64 },
    #[error("pullback gap {gap} too small for an attractor approximation (need >= {need})")]
    TooClose { gap: f64, need: f64 },
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// One evolved ensemble member.
#[derive(Debug, Clone)]
pub struct EnsembleEntry {
    pub tau: f64,
    pub sample_id: usize,
    /// `rho^2(tau)` the sample was drawn against.
    pub rho_sq_tau: f64,
    /// Prescribed initial `C_Ht` squared norm.
    pub initial_c_ht_sq: f64,
    pub endpoint: HistorySegment,
    pub endpoint_c_ht_sq: f64,
    /// Endpoint inside the absorbing ball at the target time.
    pub within_rho: bool,
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub target_t: f64,
    pub rho_sq_target: f64,
    pub entries: Vec<EnsembleEntry>,
}

impl EnsembleRun {
    /// Endpoint segments launched from one initial time.
    pub fn endpoints_from(&self, tau: f64) -> Vec<&HistorySegment> {
        self.entries
            .iter()
            .filter(|e| (e.tau - tau).abs() <= 1e-9 * (1.0 + tau.abs()))
            .map(|e| &e.endpoint)
            .collect()
    }

    /// Ensemble CSV: `tau,sample_id,endpoint_C_Ht_sq,within_rho`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,sample_id,endpoint_C_Ht_sq,within_rho")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{}",
                g17(e.tau),
                e.sample_id,
                g17(e.endpoint_c_ht_sq),
                e.within_rho as u8
            )?;
        }
        Ok(())
    }
}

/// Seeded sample of the absorbing ball: per-mode uniform coefficients with
/// a smooth delay-direction modulation, rescaled to the prescribed squared
/// norm. Even sample ids sit on the sphere, odd ones uniformly inside.
fn sample_history(
    rng: &mut ChaCha12Rng,
    spec: &ProblemSpec,
    dt: f64,
    tau: f64,
    rho_sq: f64,
    on_sphere: bool,
    max_modes: usize,
) -> (InitialHistory, f64) {
    let n = spec.n_modes().min(max_modes);
    let k = spec.window();
    let beta: f64 = rng.gen_range(0.0..0.3);
    let mut modes = Vec::with_capacity(2 * n);
    for j in 1..=n {
        let c: f64 = rng.gen_range(-1.0..1.0);
        modes.push(HistoryMode { mode: j, shape: HistoryShape::Constant { value: c } });
        modes.push(HistoryMode {
            mode: j,
            shape: HistoryShape::Cos {
                value: c * beta,
                frequency: std::f64::consts::PI / k,
                phase: 0.0,
            },
        });
    }
    let raw = InitialHistory { modes };
    let eigen = crate::spectral::eigenvalues(&spec.domain);
    let seg = HistorySegment::from_initial_history(&raw, spec.n_modes(), tau, dt, k);
    let current = seg.c_ht_sq(&eigen, &spec.epsilon);
    let target = if on_sphere { rho_sq } else { rng.gen_range(0.0..1.0) * rho_sq };
    if current <= 0.0 {
        return (raw, 0.0);
    }
    let phi = raw.scaled((target / current).sqrt());
    (phi, target)
}

/// Evolves seeded samples of `D1(tau) = ball(0, rho(tau))` from each
/// initial time to the target time `t`.
pub fn pullback_ensemble(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    t: f64,
    taus: &[f64],
    samples_per_tau: usize,
    seed: u64,
) -> Result<EnsembleRun, AttractorError> {
    assert!(
        taus.windows(2).all(|w| w[1] < w[0]),
        "initial times must be strictly decreasing"
    );
    for tau in taus {
        assert!(*tau < t - spec.window(), "initial times must precede t - k");
    }
    audit(spec, &ProbeGrid::default()).into_result().map_err(SolverError::Audit)?;
    let consts = derive_constants(spec, None)?;
    let eigen = crate::spectral::eigenvalues(&spec.domain);
    let h = |s: f64| spec.forcing.hminus1_sq(s, &eigen);
    let rho_sq_target = absorbing_radius(&consts, t, &h)?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    for &tau in taus {
        let rho_sq_tau = absorbing_radius(&consts, tau, &h)?;
        for sample_id in 0..samples_per_tau {
            let (phi, initial) = sample_history(
                &mut rng,
                spec,
                cfg.dt,
                tau,
                rho_sq_tau,
                sample_id % 2 == 0,
                8,
            );
            jobs.push((tau, sample_id, rho_sq_tau, initial, phi));
        }
    }

    let entries: Result<Vec<EnsembleEntry>, AttractorError> = jobs
        .into_par_iter()
        .map(|(tau, sample_id, rho_sq_tau, initial_c_ht_sq, phi)| {
            let run_spec = spec.with_history(phi);
            let record = integrate_unaudited(&run_spec, cfg, tau, t)?;
            let endpoint = record.final_segment;
            let endpoint_c_ht_sq = endpoint.c_ht_sq(&record.eigen, &spec.epsilon);
            Ok(EnsembleEntry {
                tau,
                sample_id,
                rho_sq_tau,
                initial_c_ht_sq,
                endpoint_c_ht_sq,
                within_rho: endpoint_c_ht_sq <= rho_sq_target,
                endpoint,
            })
        })
        .collect();

    Ok(EnsembleRun { target_t: t, rho_sq_target, entries: entries? })
}

/// Launches one seeded history of prescribed `C_Ht` squared size and
/// measures when the trajectory enters the absorbing ball
/// `rho^2(t) + delta`, against the predicted deadline
/// `T* = ln(coef_a ||phi||^2 / delta) / eta1`.
///
/// Large data makes the cubic reaction stiff, so the step is refined
/// automatically below the explicit stability limit (snapped to a divisor
/// of the delay window). Returns `(entry time, T*, ||phi||^2)`.
pub fn absorb_entry_time(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    tau: f64,
    target_phi_sq: f64,
    seed: u64,
) -> Result<(Option<f64>, f64, f64), AttractorError> {
    audit(spec, &ProbeGrid::default()).into_result().map_err(SolverError::Audit)?;
    let consts = derive_constants(spec, None)?;
    let eigen = crate::spectral::eigenvalues(&spec.domain);
    let h = |s: f64| spec.forcing.hminus1_sq(s, &eigen);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (phi, phi_sq) =
        sample_history(&mut rng, spec, cfg.dt, tau, target_phi_sq, true, 8);

    let t_star = if consts.coef_a * phi_sq > consts.delta {
        (consts.coef_a * phi_sq / consts.delta).ln() / consts.eta1
    } else {
        0.0
    };

    let dt = stable_dt(spec, &phi, tau, cfg.dt);
    let cfg = SolverConfig { dt, record_every: 1, ..cfg.clone() };
    let horizon = 1.25 * t_star + 1.0;
    let n_steps = (horizon / dt).ceil() as usize;
    let t_end = tau + n_steps as f64 * dt;

    let run_spec = spec.with_history(phi);
    let record = integrate_unaudited(&run_spec, &cfg, tau, t_end)?;
    for node in &record.nodes {
        let rho_sq = absorbing_radius(&consts, node.t, &h)?;
        if node.c_ht_sq <= rho_sq + consts.delta {
            return Ok((Some(node.t), t_star, phi_sq));
        }
    }
    Ok((None, t_star, phi_sq))
}

/// Explicit stability limit for the stiffest mode under the cubic
/// reaction, from the pointwise amplitude of the initial state. Mode
/// rates `(slope + M lambda_j)/(1 + eps lambda_j)` are capped by
/// `slope + M / min eps`.
fn stable_dt(spec: &ProblemSpec, phi: &InitialHistory, tau: f64, dt_max: f64) -> f64 {
    let n = spec.n_modes();
    let coeffs = phi.eval_vec(0.0, n);
    let basis = crate::spectral::SineBasis::new(&spec.domain, 2 * n + 1)
        .expect("minimal grid is valid");
    let umax = basis.synth(&coeffs).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let slope = match &spec.nonlinearity.form {
        crate::problem::NonlinearityForm::Zero => 0.0,
        crate::problem::NonlinearityForm::Cubic { linear, cubic } => {
            linear.abs() + 3.0 * cubic.abs() * umax * umax
        }
    };
    let eps_min = (0..=512)
        .map(|i| spec.epsilon.eval(tau - 1.0 + i as f64 * 0.1))
        .fold(f64::INFINITY, f64::min)
        .max(spec.epsilon.eps_min);
    let rate = slope + spec.diffusion.upper / eps_min;
    let dt_want = (1.5 / rate).min(dt_max);
    // snap to a power-of-two divisor of the delay window
    let k = spec.window();
    let m = (k / dt_want).log2().ceil().max(4.0) as i32;
    k / 2f64.powi(m)
}

/// Hausdorff semidistance `sup_{a in A} inf_{b in B} ||a - b||` over the
/// finite endpoint sets, in the requested segment norm.
pub fn semidistance(
    set_a: &[&HistorySegment],
    set_b: &[&HistorySegment],
    kind: SupNormKind,
    eigen: &EigenData,
    eps: &crate::problem::TimeProfile,
) -> Result<f64, AttractorError> {
    if set_a.is_empty() || set_b.is_empty() {
        return Err(AttractorError::EmptySet);
    }
    let dist = |a: &HistorySegment, b: &HistorySegment| -> f64 {
        let d = a.difference(b);
        match kind {
            SupNormKind::CL2 => d.c_l2_norm(eigen),
            SupNormKind::CHt => d.c_ht_sq(eigen, eps).sqrt(),
            SupNormKind::CHt1 => d.c_ht1_sq(eigen, eps).sqrt(),
        }
    };
    let mut sup = 0.0f64;
    for a in set_a {
        let mut inf = f64::INFINITY;
        for b in set_b {
            inf = inf.min(dist(a, b));
        }
        sup = sup.max(inf);
    }
    Ok(sup)
}

/// Numerical attractor section: endpoints pulled back from a far initial
/// time. An outer approximation up to the semidistance tolerance.
pub fn attractor_approximation(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    t: f64,
    tau_far: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<HistorySegment>, AttractorError> {
    let consts = derive_constants(spec, None)?;
    let need = 5.0 / consts.eta1;
    let gap = t - tau_far;
    if gap < need {
        return Err(AttractorError::TooClose { gap, need });
    }
    let run = pullback_ensemble(spec, cfg, t, &[tau_far], samples, seed)?;
    Ok(run.entries.into_iter().map(|e| e.endpoint).collect())
}

/// Forcing split: the resolved modes of `h` and the remainder with
/// `||h - h^theta||_{-1} < theta` at every probed time.
#[derive(Debug, Clone)]
pub struct SplitForcing {
    /// Modes `1..=kept_modes` stay in the resolved part.
    pub kept_modes: usize,
    pub theta: f64,
}

impl SplitForcing {
    pub fn resolved_vec(&self, spec: &ProblemSpec, t: f64, n: usize) -> Vec<f64> {
        let mut v = spec.forcing.eval_vec(t, n);
        for x in v.iter_mut().skip(self.kept_modes) {
            *x = 0.0;
        }
        v
    }

    pub fn remainder_vec(&self, spec: &ProblemSpec, t: f64, n: usize) -> Vec<f64> {
        let mut v = spec.forcing.eval_vec(t, n);
        for x in v.iter_mut().take(self.kept_modes) {
            *x = 0.0;
        }
        v
    }

    pub fn resolved_hminus1_sq(&self, spec: &ProblemSpec, t: f64, eigen: &EigenData) -> f64 {
        let v = self.resolved_vec(spec, t, eigen.len());
        v.iter().zip(&eigen.lambda).map(|(c, l)| c * c / l).sum()
    }

    pub fn remainder_hminus1_sq(&self, spec: &ProblemSpec, t: f64, eigen: &EigenData) -> f64 {
        let v = self.remainder_vec(spec, t, eigen.len());
        v.iter().zip(&eigen.lambda).map(|(c, l)| c * c / l).sum()
    }
}

/// Truncates `h` to the fewest leading modes leaving the remainder below
/// `theta` in `H^{-1}` at every probed time.
pub fn split_forcing(
    spec: &ProblemSpec,
    eigen: &EigenData,
    theta: f64,
    probe_times: &[f64],
) -> Result<SplitForcing, AttractorError> {
    if !(theta > 0.0) {
        return Err(AttractorError::CannotSplit { theta });
    }
    let n = eigen.len();
    for kept in 0..=n {
        let split = SplitForcing { kept_modes: kept, theta };
        let worst = probe_times
            .iter()
            .map(|t| split.remainder_hminus1_sq(spec, *t, eigen))
            .fold(0.0, f64::max);
        if worst.sqrt() < theta {
            return Ok(split);
        }
    }
    // unreachable for finite mode counts: the full truncation leaves zero
    Err(AttractorError::CannotSplit { theta })
}

/// Default split tolerance: 1% of the peak forcing size.
pub fn default_theta(spec: &ProblemSpec, eigen: &EigenData, probe_times: &[f64]) -> f64 {
    let sup = probe_times
        .iter()
        .map(|t| spec.forcing.hminus1_sq(*t, eigen))
        .fold(0.0, f64::max)
        .sqrt();
    1e-2 * sup
}

/// One monitored instant of the decomposition.
#[derive(Debug, Clone, Copy)]
pub struct RegularityRow {
    pub t: f64,
    pub i1: f64,
    pub i1_bound: f64,
    pub i2: f64,
    pub i2_bound: f64,
    pub superposition_err: f64,
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub theta: f64,
    pub kept_modes: usize,
    pub rho1: f64,
    pub rho2: f64,
    /// `R1 = rho^2(t)` at the target time.
    pub r1: f64,
    /// `R2`: the `I2` bound evaluated at the target time; the attractor
    /// section is expected inside the `C_Ht1` ball of this squared radius.
    pub r2: f64,
    /// `||phi||^2` in the higher-order windowed norm at the initial time.
    pub phi_ht1_sq: f64,
    pub rows: Vec<RegularityRow>,
    /// `max_t ||v + v1 - u||_2 / max_t ||u||_2`.
    pub superposition_rel: f64,
}

impl RegularityReport {
    /// Regularity CSV: `t,I1,I1_bound,I2,I2_bound,superposition_err`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,I1,I1_bound,I2,I2_bound,superposition_err")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                g17(r.t),
                g17(r.i1),
                g17(r.i1_bound),
                g17(r.i2),
                g17(r.i2_bound),
                g17(r.superposition_err)
            )?;
        }
        Ok(())
    }

    pub fn bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| {
            crate::energy::slack_ok(r.i1_bound - r.i1, r.i1_bound)
                && crate::energy::slack_ok(r.i2_bound - r.i2, r.i2_bound)
        })
    }
}

/// Linear replay of one decomposed component: mode ODEs with the stored
/// per-stage diffusion coefficient and a per-stage forcing closure.
fn replay_component(
    spec: &ProblemSpec,
    eigen: &EigenData,
    stages: &[StepStages],
    dt: f64,
    v0: Vec<f64>,
    forcing: impl Fn(usize, usize) -> Vec<f64>,
) -> Vec<Vec<f64>> {
    let n = eigen.len();
    let mut v = v0;
    let mut out = Vec::with_capacity(stages.len() + 1);
    out.push(v.clone());
    let stage_rhs = |t: f64, a: f64, f: &[f64], x: &[f64]| -> Vec<f64> {
        let eps = spec.epsilon.eval(t);
        (0..n)
            .map(|j| (f[j] - a * eigen.lambda[j] * x[j]) / (1.0 + eps * eigen.lambda[j]))
            .collect()
    };
    for (step, st) in stages.iter().enumerate() {
        let f: Vec<Vec<f64>> = (0..4).map(|s| forcing(step, s)).collect();
        let k1 = stage_rhs(st.t[0], st.a_value[0], &f[0], &v);
        let y2: Vec<f64> = v.iter().zip(&k1).map(|(a, b)| a + 0.5 * dt * b).collect();
        let k2 = stage_rhs(st.t[1], st.a_value[1], &f[1], &y2);
        let y3: Vec<f64> = v.iter().zip(&k2).map(|(a, b)| a + 0.5 * dt * b).collect();
        let k3 = stage_rhs(st.t[2], st.a_value[2], &f[2], &y3);
        let y4: Vec<f64> = v.iter().zip(&k3).map(|(a, b)| a + dt * b).collect();
        let k4 = stage_rhs(st.t[3], st.a_value[3], &f[3], &y4);
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(v.clone());
    }
    out
}

/// Windowed `C_Ht1` composite per node index (>= prelude length), from a
/// uniform series of states.
fn ht1_window_series(
    times: &[f64],
    states: &[Vec<f64>],
    eigen: &EigenData,
    eps: &crate::problem::TimeProfile,
    w: usize,
    skip: usize,
) -> Vec<f64> {
    let grad: Vec<f64> = states
        .iter()
        .map(|c| c.iter().zip(&eigen.lambda).map(|(x, l)| l * x * x).sum())
        .collect();
    let lap: Vec<f64> = states
        .iter()
        .map(|c| c.iter().zip(&eigen.lambda).map(|(x, l)| l * l * x * x).sum())
        .collect();
    let gmax = trailing_window_max(&grad, w);
    let lmax = trailing_window_max(&lap, w);
    (skip..times.len())
        .map(|i| {
            let (g, _) = gmax[i];
            let (l, li) = lmax[i];
            g + eps.eval(times[li]).abs() * l
        })
        .collect()
}

/// Integrates `u`, splits the forcing at `theta`, replays the two linear
/// component systems from the stored stage samples, and monitors the
/// higher-order decay and boundedness estimates.
pub fn solve_decomposed(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    tau: f64,
    t: f64,
    phi: &InitialHistory,
    theta: f64,
) -> Result<RegularityReport, AttractorError> {
    let run_spec = spec.with_history(phi.clone());
    audit(&run_spec, &ProbeGrid::default()).into_result().map_err(SolverError::Audit)?;
    let cfg = SolverConfig { record_every: 1, capture_stages: true, ..cfg.clone() };
    let record = integrate_unaudited(&run_spec, &cfg, tau, t)?;
    let eigen = record.eigen.clone();
    let n = spec.n_modes();
    let stages = record.stages.as_ref().expect("stage capture requested");

    let probe_times: Vec<f64> = record.nodes.iter().map(|n| n.t).collect();
    let split = split_forcing(spec, &eigen, theta, &probe_times)?;

    // v: initial data phi, forcing = remainder of the split
    let v_states = replay_component(
        spec,
        &eigen,
        stages,
        cfg.dt,
        phi.eval_vec(0.0, n),
        |step, s| split.remainder_vec(spec, stages[step].t[s], n),
    );
    // v1: zero initial data, forcing = f(u) + g(t, u_t) + resolved h
    let v1_states = replay_component(
        spec,
        &eigen,
        stages,
        cfg.dt,
        vec![0.0; n],
        |step, s| {
            let mut f = split.resolved_vec(spec, stages[step].t[s], n);
            for (a, b) in f.iter_mut().zip(&stages[step].fg[s]) {
                *a += b;
            }
            f
        },
    );

    // uniform series with the initial window in front
    let w = crate::history::steps_in_window(spec.window(), cfg.dt);
    let mut times: Vec<f64> = record.prelude.iter().map(|(t, _)| *t).collect();
    times.extend(record.nodes.iter().map(|n| n.t));
    let skip = record.prelude.len();
    let mut v_series: Vec<Vec<f64>> =
        (0..skip).map(|i| phi.eval_vec(times[i] - tau, n)).collect();
    v_series.extend(v_states.iter().cloned());
    let mut v1_series: Vec<Vec<f64>> = (0..skip).map(|_| vec![0.0; n]).collect();
    v1_series.extend(v1_states.iter().cloned());

    let i1 = ht1_window_series(&times, &v_series, &eigen, &spec.epsilon, w, skip);
    let i2 = ht1_window_series(&times, &v1_series, &eigen, &spec.epsilon, w, skip);

    // rates: conservative constant forms with sup |eps| over the run window
    let sup_eps = times.iter().map(|t| spec.epsilon.eval(*t).abs()).fold(0.0, f64::max);
    let lambda1 = eigen.lambda1();
    let l_bound = spec.epsilon.bound;
    let rho1 = (2.0 + l_bound) / (1.0 / lambda1 + sup_eps);
    let rho2 = 0.9 * (1.0 + l_bound) / (1.0 / lambda1 + sup_eps);

    let phi_seg =
        HistorySegment::from_initial_history(phi, n, tau, cfg.dt, spec.window());
    let phi_ht1_sq = phi_seg.c_ht1_sq(&eigen, &spec.epsilon);

    let consts: BoundConstants = derive_constants(spec, None)?;
    let h = |s: f64| spec.forcing.hminus1_sq(s, &eigen);
    let r1 = absorbing_radius(&consts, t, &h)?;

    // I2 bound: exp(-rho2 (t - s)) integral of the constant source
    let source: Vec<f64> = record
        .nodes
        .iter()
        .map(|nd| {
            (2.0 * spec.nonlinearity.eta_tilde + consts.c_g) * r1
                + 2.0 * split.resolved_hminus1_sq(spec, nd.t, &eigen)
        })
        .collect();
    let i2_bound_at = |i: usize| -> f64 {
        let ti = record.nodes[i].t;
        let vals: Vec<f64> = (0..=i)
            .map(|j| (-rho2 * (ti - record.nodes[j].t)).exp() * source[j])
            .collect();
        simpson_uniform(&vals, cfg.dt)
    };

    let mut rows = Vec::with_capacity(record.nodes.len());
    let mut sup_err = 0.0f64;
    let mut sup_u = 0.0f64;
    for (i, node) in record.nodes.iter().enumerate() {
        let vi = &v_states[i];
        let v1i = &v1_states[i];
        let err_sq: f64 = node
            .coeffs
            .iter()
            .zip(vi.iter().zip(v1i))
            .map(|(u, (a, b))| {
                let d = a + b - u;
                d * d
            })
            .sum();
        sup_err = sup_err.max(err_sq.sqrt());
        sup_u = sup_u.max(node.norms.l2_sq.sqrt());
        // decay of the initial-data component: the window trails the
        // pointwise Gronwall decay by one delay length
        let i1_bound = (-rho1 * (node.t - spec.window() - tau)).exp() * phi_ht1_sq
            + theta * theta / rho1;
        rows.push(RegularityRow {
            t: node.t,
            i1: i1[i],
            i1_bound,
            i2: i2[i],
            i2_bound: i2_bound_at(i),
            superposition_err: err_sq.sqrt(),
        });
    }
    let r2 = rows.last().map(|r| r.i2_bound).unwrap_or(0.0);
    let superposition_rel = if sup_u > 0.0 { sup_err / sup_u } else { sup_err };

    Ok(RegularityReport {
        theta,
        kept_modes: split.kept_modes,
        rho1,
        rho2,
        r1,
        r2,
        phi_ht1_sq,
        rows,
        superposition_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{default_scenario_with_config, ScenarioName};
    use crate::spectral::eigenvalues;
    use approx::assert_relative_eq;

    #[test]
    fn semidistance_basics() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::LinearSingleMode);
        let eigen = eigenvalues(&spec.domain);
        let mk = |value: f64| {
            let phi = InitialHistory {
                modes: vec![HistoryMode { mode: 1, shape: HistoryShape::Constant { value } }],
            };
            HistorySegment::from_initial_history(&phi, 1, 0.0, cfg.dt, 1.0)
        };
        let a = mk(0.0);
        let b = mk(1.0);
        // identical sets
        let d = semidistance(&[&a], &[&a], SupNormKind::CL2, &eigen, &spec.epsilon).unwrap();
        assert_eq!(d, 0.0);
        // {0} vs {w_1 constant}: distance 1 by orthonormality
        let d = semidistance(&[&b], &[&a], SupNormKind::CL2, &eigen, &spec.epsilon).unwrap();
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
        // subset: inf attained inside the larger set
        let d = semidistance(&[&a], &[&a, &b], SupNormKind::CL2, &eigen, &spec.epsilon).unwrap();
        assert_eq!(d, 0.0);
        // empty set rejected
        assert!(matches!(
            semidistance(&[], &[&a], SupNormKind::CL2, &eigen, &spec.epsilon),
            Err(AttractorError::EmptySet)
        ));
    }

    #[test]
    fn split_forcing_tail_accounting() {
        // two driven modes with H^{-1} norms 0.3 and 0.05: theta = 0.1
        // keeps mode 1 only
        let (mut spec, _) = default_scenario_with_config(ScenarioName::CubicDelayed);
        spec.forcing = crate::problem::Forcing {
            modes: vec![
                crate::problem::ForcingMode {
                    mode: 1,
                    shape: crate::problem::ForcingShape::Constant { amplitude: 0.3 },
                },
                crate::problem::ForcingMode {
                    mode: 2,
                    shape: crate::problem::ForcingShape::Constant { amplitude: 0.1 },
                },
            ],
            tail: None,
        };
        let eigen = eigenvalues(&spec.domain);
        // mode-2 contribution to the H^{-1} norm: 0.1/2 = 0.05
        let split = split_forcing(&spec, &eigen, 0.1, &[0.0]).unwrap();
        assert_eq!(split.kept_modes, 1);
        // theta above the whole norm: nothing kept
        let split = split_forcing(&spec, &eigen, 10.0, &[0.0]).unwrap();
        assert_eq!(split.kept_modes, 0);
        // single-mode forcing with theta below its norm: everything kept
        spec.forcing.modes.truncate(1);
        let split = split_forcing(&spec, &eigen, 0.05, &[0.0]).unwrap();
        assert_eq!(split.kept_modes, 1);
        let rem = split.remainder_vec(&spec, 0.0, eigen.len());
        assert!(rem.iter().all(|x| *x == 0.0));
        // nonpositive tolerance guarded
        assert!(matches!(
            split_forcing(&spec, &eigen, 0.0, &[0.0]),
            Err(AttractorError::CannotSplit { .. })
        ));
    }

    #[test]
    fn decomposition_superposes_and_degenerates() {
        let (spec, cfg) = default_scenario_with_config(ScenarioName::CubicDelayed);
        let cfg = cfg.with_dt(1.0 / 32.0);
        let phi = spec.initial_history.clone();
        // huge theta: nothing resolved, v carries all of h
        let rep = solve_decomposed(&spec, &cfg, 0.0, 1.0, &phi, 1e6).unwrap();
        assert_eq!(rep.kept_modes, 0);
        assert!(rep.superposition_rel < 1e-10, "superposition {}", rep.superposition_rel);
        // zero scenario: v = v1 = 0
        let mut zspec = spec.clone();
        zspec.forcing = Default::default();
        let rep =
            solve_decomposed(&zspec, &cfg, 0.0, 1.0, &InitialHistory::default(), 1e-3).unwrap();
        for r in &rep.rows {
            assert_eq!(r.i1, 0.0);
            assert_eq!(r.i2, 0.0);
            assert_eq!(r.superposition_err, 0.0);
        }
    }

    #[test]
    fn ensemble_zero_scenario_endpoint_zero() {
        let (mut spec, cfg) = default_scenario_with_config(ScenarioName::LinearSingleMode);
        spec.forcing = Default::default();
        let run = pullback_ensemble(&spec, &cfg, 0.0, &[-3.0], 2, 42).unwrap();
        // samples have rho-scale size but the linear dynamics contract
        for e in &run.entries {
            let rate = 3.0 / 2.0;
            let bound = e.initial_c_ht_sq * (-2.0 * rate * (0.0 - e.tau - 1.0)).exp() * 1.01
                + 1e-12;
            assert!(
                e.endpoint_c_ht_sq <= bound,
                "endpoint {} exceeds contraction bound {bound}",
                e.endpoint_c_ht_sq
            );
        }
        // determinism across calls
        let run2 = pullback_ensemble(&spec, &cfg, 0.0, &[-3.0], 2, 42).unwrap();
        for (a, b) in run.entries.iter().zip(&run2.entries) {
            assert_eq!(a.endpoint_c_ht_sq.to_bits(), b.endpoint_c_ht_sq.to_bits());
        }
    }
}
