//! Numerical laboratory for a non-autonomous nonlocal diffusion equation
//! with delay,
//!
//! ```text
//! u_t - eps(t) * (Delta u)_t - a(l(u)) * Delta u = f(u) + g(t, u_t) + h(t)
//! ```
//!
//! on a 1-D interval with Dirichlet boundary conditions, discretised by a
//! spectral Faedo-Galerkin projection onto the sine eigenbasis of the
//! Laplacian and integrated by method-of-steps Runge-Kutta.
//!
//! Beyond plain simulation, the crate evaluates and monitors the explicit
//! energy machinery of the underlying dissipative theory along computed
//! trajectories: exponential pullback bounds with fully explicit constants,
//! absorbing radii, a contraction functional for pairs of trajectories,
//! pullback ensemble experiments, and a two-part regularity decomposition
//! of the solution.
//!
//! Module map:
//!
//! - [`problem`]: validated configuration model (coefficients, structural
//!   constants, hypothesis audit, built-in scenarios, JSON scenario files).
//! - [`spectral`]: Dirichlet sine eigenbasis, pseudo-spectral evaluation,
//!   and every norm used by the estimates.
//! - [`history`]: the delayed trajectory segment with dense Hermite
//!   interpolation and sup-in-delay norms.
//! - [`solver`]: the Galerkin mode ODEs and the method-of-steps RK4
//!   integrator with energy-equality monitoring.
//! - [`energy`]: explicit bound constants, the pullback estimate, the
//!   absorbing radius, the tempered-universe test, and the contraction
//!   functional.
//! - [`attractor`]: pullback ensembles, Hausdorff semidistance, attractor
//!   section approximation, and the forcing-split regularity decomposition.
//! - [`oracle`]: independent verifiers (closed forms, finite differences).

pub mod attractor;
pub mod energy;
pub mod history;
pub mod oracle;
pub mod problem;
pub mod quad;
pub mod report;
pub mod solver;
pub mod spectral;

pub use problem::{default_scenario, load_scenario, ProblemSpec, ScenarioName};
pub use solver::{SolverConfig, TrajectoryRecord};
