//! Command-line front end: loads scenarios, runs experiments, writes CSV
//! reports, and returns pass/fail exit codes for the bound suites.
//!
//! Exit codes: 0 = all monitored inequalities hold, 2 = usage error,
//! 3 = hypothesis violation, 4 = bound violation, 1 = other failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pullback_lab::attractor::{
    absorb_entry_time, attractor_approximation, default_theta, pullback_ensemble, semidistance,
    solve_decomposed,
};
use pullback_lab::energy::{
    absorbing_radius, bound_report, derive_constants, slack_ok, write_bound_csv,
};
use pullback_lab::history::{HistorySegment, SupNormKind};
use pullback_lab::oracle::{finite_difference_reference, grid_l2_difference, single_mode_closed_form};
use pullback_lab::problem::{audit, load_scenario, ProblemError, ProblemSpec, ProbeGrid, SCENARIO_NAMES};
use pullback_lab::solver::{integrate, SolverConfig, SolverError, TrajectoryRecord};
use pullback_lab::spectral::eigenvalues;

const EXIT_HYPOTHESIS: i32 = 3;
const EXIT_BOUND: i32 = 4;

#[derive(Parser)]
#[command(
    name = "pullback-lab",
    version,
    about = "Spectral method-of-steps laboratory for a delayed nonlocal diffusion equation",
    after_help = format!("Scenarios: a JSON file path or default:<name> with name one of: {}.", SCENARIO_NAMES.join(", "))
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RunWindow {
    /// Initial time.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau: f64,
    /// Final time.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t_end: f64,
    /// Step size (defaults to the scenario's).
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every structural hypothesis of a scenario
    Audit {
        scenario: String,
        /// Emit the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Integrate and write the trajectory CSV
    Simulate {
        scenario: String,
        #[command(flatten)]
        window: RunWindow,
        /// Trajectory CSV path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also dump the final history segment (long form t,j,coef)
        #[arg(long)]
        history_out: Option<PathBuf>,
    },
    /// Energy-equality residual study over halved steps
    VerifyEnergy {
        scenario: String,
        #[command(flatten)]
        window: RunWindow,
        /// Number of step halvings
        #[arg(long, default_value_t = 2)]
        halvings: usize,
        /// Required residual decrease per halving
        #[arg(long, default_value_t = 8.0)]
        min_ratio: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monitor the pullback energy estimate along a trajectory
    VerifyBound {
        scenario: String,
        #[command(flatten)]
        window: RunWindow,
        /// Decay-rate parameter eta (defaults to the admissible default)
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Absorbing-ball entry times against the predicted deadline
    Absorb {
        scenario: String,
        /// Initial times (comma separated, strictly decreasing)
        #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
        taus: Vec<f64>,
        /// Initial size as a multiple of rho^2(tau)
        #[arg(long, default_value_t = 100.0)]
        scale: f64,
        /// Number of seeded initial histories per tau
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Pullback ensemble and semidistance table
    Pullback {
        scenario: String,
        /// Target time
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        /// Initial times (comma separated, strictly decreasing)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        taus: Vec<f64>,
        /// Far initial time for the attractor section
        #[arg(long, allow_hyphen_values = true)]
        tau_far: Option<f64>,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forcing-split regularity decomposition report
    Regularity {
        scenario: String,
        #[command(flatten)]
        window: RunWindow,
        /// Split tolerance (defaults to 1% of the peak forcing size)
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-checks against the independent verifiers
    Oracle {
        scenario: String,
        #[command(flatten)]
        window: RunWindow,
        /// Finite-difference grid points
        #[arg(long, default_value_t = 256)]
        fd_points: usize,
        /// Acceptable endpoint L2 difference
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Write the finite-difference run (trajectory CSV schema)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print default tolerances and thresholds
    PrintConfig,
}

fn main() {
    if let Ok(threads) = std::env::var("PULLBACK_LAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<ProblemError>()
                .map(|p| matches!(p, ProblemError::UnknownScenario(_)))
                .unwrap_or(false);
            std::process::exit(if usage { 2 } else { 1 });
        }
    }
}

fn writer_for(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Integrations surface hypothesis violations as exit code 3.
fn integrate_or_exit(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    tau: f64,
    t_end: f64,
) -> Result<Result<TrajectoryRecord, i32>> {
    match integrate(spec, cfg, tau, t_end) {
        Ok(r) => Ok(Ok(r)),
        Err(SolverError::Audit(e @ ProblemError::HypothesisViolation { .. })) => {
            eprintln!("{e}");
            Ok(Err(EXIT_HYPOTHESIS))
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Audit { scenario, json } => {
            let (spec, _) = load_scenario(&scenario)?;
            let report = audit(&spec, &ProbeGrid::default());
            if json {
                let rows: Vec<serde_json::Value> = report
                    .checks
                    .iter()
                    .map(|c| {
                        serde_json::json!({
                            "name": c.name,
                            "passed": c.passed,
                            "witness": c.witness.0,
                            "margin": c.witness.1,
                            "detail": c.detail,
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "checks": rows,
                        "derived": {
                            "c_tilde0": report.derived.c_tilde0,
                            "c_tilde1": report.derived.c_tilde1,
                            "c_tilde2": report.derived.c_tilde2,
                            "sup_eps_sum": report.derived.sup_eps_sum,
                        }
                    }))?
                );
            } else {
                for c in &report.checks {
                    println!(
                        "{} {:32} worst at {:+.6e} margin {:+.6e}  {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.witness.0,
                        c.witness.1,
                        c.detail
                    );
                }
            }
            if let Some(v) = report.first_violation() {
                eprintln!("hypothesis violated: {} ({})", v.name, v.detail);
                return Ok(EXIT_HYPOTHESIS);
            }
            Ok(0)
        }

        Cmd::Simulate { scenario, window, out, history_out } => {
            let (spec, mut cfg) = load_scenario(&scenario)?;
            apply_dt(&mut cfg, window.dt);
            let record = match integrate_or_exit(&spec, &cfg, window.tau, window.t_end)? {
                Ok(r) => r,
                Err(code) => return Ok(code),
            };
            record.write_csv(writer_for(&out)?)?;
            if let Some(p) = history_out {
                record.final_segment.write_csv(BufWriter::new(File::create(p)?))?;
            }
            Ok(0)
        }

        Cmd::VerifyEnergy { scenario, window, halvings, min_ratio, out } => {
            let (spec, mut cfg) = load_scenario(&scenario)?;
            apply_dt(&mut cfg, window.dt);
            let mut w = writer_for(&out)?;
            writeln!(w, "dt,max_energy_residual")?;
            let mut dt = cfg.dt;
            let mut residuals = Vec::new();
            for _ in 0..=halvings {
                let record = match integrate_or_exit(&spec, &cfg.with_dt(dt), window.tau, window.t_end)? {
                    Ok(r) => r,
                    Err(code) => return Ok(code),
                };
                let r = record.max_energy_residual();
                writeln!(w, "{},{}", pullback_lab::report::g17(dt), pullback_lab::report::g17(r))?;
                residuals.push(r);
                dt /= 2.0;
            }
            let mut ok = true;
            for pair in residuals.windows(2) {
                let ratio = pair[0] / pair[1].max(f64::MIN_POSITIVE);
                println!("halving ratio: {ratio:.3}");
                ok &= ratio >= min_ratio;
            }
            println!(
                "energy-equality residual study: {}",
                if ok { "PASS" } else { "FAIL" }
            );
            Ok(if ok { 0 } else { EXIT_BOUND })
        }

        Cmd::VerifyBound { scenario, window, eta, out } => {
            let (spec, mut cfg) = load_scenario(&scenario)?;
            apply_dt(&mut cfg, window.dt);
            let consts = derive_constants(&spec, eta)?;
            let record = match integrate_or_exit(&spec, &cfg, window.tau, window.t_end)? {
                Ok(r) => r,
                Err(code) => return Ok(code),
            };
            let rows = bound_report(&record, &spec, &consts)?;
            write_bound_csv(&rows, writer_for(&out)?)?;
            let violations = rows
                .iter()
                .filter(|r| !slack_ok(r.slack, r.rhs_lemma41))
                .count();
            println!(
                "pullback bound monitor: {} rows, {} violations",
                rows.len(),
                violations
            );
            Ok(if violations == 0 { 0 } else { EXIT_BOUND })
        }

        Cmd::Absorb { scenario, taus, scale, seeds, dt } => {
            let (spec, mut cfg) = load_scenario(&scenario)?;
            apply_dt(&mut cfg, dt);
            if let Some(v) = audit(&spec, &ProbeGrid::default()).first_violation() {
                eprintln!("hypothesis violated: {} ({})", v.name, v.detail);
                return Ok(EXIT_HYPOTHESIS);
            }
            let consts = derive_constants(&spec, None)?;
            let eigen = eigenvalues(&spec.domain);
            let h = |s: f64| spec.forcing.hminus1_sq(s, &eigen);
            let mut ok = true;
            println!("tau,seed,initial_C_Ht_sq,T_star,entry_time,deadline_met");
            for &tau in &taus {
                let rho_tau = absorbing_radius(&consts, tau, &h)?;
                for seed in 0..seeds {
                    let (entry, t_star, phi_sq) =
                        absorb_entry_time(&spec, &cfg, tau, scale * rho_tau, seed)?;
                    let met = entry.map(|e| e <= tau + t_star).unwrap_or(false);
                    ok &= met;
                    println!(
                        "{tau},{seed},{phi_sq:.6e},{t_star:.6},{},{}",
                        entry.map(|e| format!("{e:.6}")).unwrap_or_else(|| "never".into()),
                        met as u8
                    );
                }
            }
            Ok(if ok { 0 } else { EXIT_BOUND })
        }

        Cmd::Pullback { scenario, t, taus, tau_far, samples, seed, dt, out } => {
            let (spec, mut cfg) = load_scenario(&scenario)?;
            apply_dt(&mut cfg, dt);
            anyhow::ensure!(!taus.is_empty(), "at least one --taus value required");
            let run = pullback_ensemble(&spec, &cfg, t, &taus, samples, seed)?;
            run.write_csv(writer_for(&out)?)?;
            let eigen = eigenvalues(&spec.domain);
            let mut ok = run.entries.iter().all(|e| e.within_rho);
            if let Some(far) = tau_far {
                let section = attractor_approximation(&spec, &cfg, t, far, samples, seed ^ 1)?;
                let section_refs: Vec<&HistorySegment> = section.iter().collect();
                println!("tau,semidistance_to_section");
                let mut last = f64::INFINITY;
                for &tau in &taus {
                    let endpoints = run.endpoints_from(tau);
                    let d = semidistance(
                        &endpoints,
                        &section_refs,
                        SupNormKind::CHt,
                        &eigen,
                        &spec.epsilon,
                    )?;
                    println!("{tau},{d:.6e}");
                    ok &= d <= last + 1e-6;
                    last = d;
                }
            }
            println!("pullback experiment: {}", if ok { "PASS" } else { "FAIL" });
            Ok(if ok { 0 } else { EXIT_BOUND })
        }

        Cmd::Regularity { scenario, window, theta, out } => {
            let (spec, mut cfg) = load_scenario(&scenario)?;
            apply_dt(&mut cfg, window.dt);
            let eigen = eigenvalues(&spec.domain);
            let probes: Vec<f64> = (0..=64)
                .map(|i| window.tau + (window.t_end - window.tau) * i as f64 / 64.0)
                .collect();
            let theta = theta.unwrap_or_else(|| default_theta(&spec, &eigen, &probes));
            let report = solve_decomposed(
                &spec,
                &cfg,
                window.tau,
                window.t_end,
                &spec.initial_history,
                theta,
            )?;
            report.write_csv(writer_for(&out)?)?;
            let ok = report.bounds_hold() && report.superposition_rel < 1e-8;
            println!(
                "regularity: theta = {theta:.3e}, kept modes = {}, superposition = {:.3e}, bounds {}",
                report.kept_modes,
                report.superposition_rel,
                if ok { "PASS" } else { "FAIL" }
            );
            Ok(if ok { 0 } else { EXIT_BOUND })
        }

        Cmd::Oracle { scenario, window, fd_points, tol, out } => {
            let (spec, mut cfg) = load_scenario(&scenario)?;
            apply_dt(&mut cfg, window.dt);
            let spectral = match integrate_or_exit(&spec, &cfg, window.tau, window.t_end)? {
                Ok(r) => r,
                Err(code) => return Ok(code),
            };
            let fd = finite_difference_reference(&spec, &cfg, fd_points, window.tau, window.t_end)?;
            if let Some(p) = &out {
                fd.record.write_csv(BufWriter::new(File::create(p)?))?;
            }
            let diff = grid_l2_difference(&spectral.endpoint().coeffs, &fd, &spec)?;
            println!("spectral vs finite-difference endpoint L2 difference: {diff:.6e}");
            let mut ok = diff < tol;
            // the decoupled single-mode case also has a closed form
            if spec.n_modes() == 1
                && spec.nonlinearity.is_zero()
                && spec.delay.is_none()
                && spec.forcing.is_zero()
            {
                let a0 = spec.diffusion.eval(0.0);
                let eps0 = spec.epsilon.eval(window.tau);
                let lambda1 = eigenvalues(&spec.domain).lambda1();
                let c = spec.initial_history.coeff(1, 0.0);
                let exact =
                    single_mode_closed_form(a0, eps0, lambda1, c, window.tau, window.t_end)?;
                let got = spectral.endpoint().coeffs[0];
                let rel = ((got - exact) / exact.abs().max(1e-300)).abs();
                println!("closed-form endpoint relative error: {rel:.6e}");
                ok &= rel < 1e-6;
            }
            println!("oracle cross-checks: {}", if ok { "PASS" } else { "FAIL" });
            Ok(if ok { 0 } else { EXIT_BOUND })
        }

        Cmd::PrintConfig => {
            let g = ProbeGrid::default();
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "probe_grid": {
                        "u_max": g.u_max, "u_points": g.u_points,
                        "t_min": g.t_min, "t_max": g.t_max, "t_points": g.t_points,
                        "s_max": g.s_max, "s_points": g.s_points,
                        "theta_points": g.theta_points,
                        "pair_samples": g.pair_samples,
                        "seed": g.seed,
                        "eps_limit_tol": g.eps_limit_tol,
                        "history_jump_tol": g.history_jump_tol,
                    },
                    "monitor_slack": "1e-9 * (1 + rhs)",
                    "blowup_guard_l2_sq": pullback_lab::solver::BLOWUP_GUARD,
                    "absorbing_delta": "1e-3 * constant term of the pullback bound",
                    "improper_integral_tail_tol": 1e-16,
                    "theta_default": "1e-2 * sup_t ||h(t)||_{-1}",
                    "default_eta": "0.9 * (1+L) lambda1 / (1 + lambda1 L)",
                    "dt_max": "k/16",
                    "grid_min": "2N+1",
                    "exit_codes": {"usage": 2, "hypothesis": EXIT_HYPOTHESIS, "bound": EXIT_BOUND},
                }))?
            );
            Ok(0)
        }
    }
}

fn apply_dt(cfg: &mut SolverConfig, dt: Option<f64>) {
    if let Some(dt) = dt {
        *cfg = cfg.with_dt(dt);
    }
}
