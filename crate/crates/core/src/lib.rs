//! Distributed shortest-distance optimization (SDOP) over switching graphs.
//!
//! A network of `n` agents, each holding a private bounded closed convex set
//! `X_i`, runs the continuous-time dynamics
//!
//! ```text
//! x_i'(t) = sum_{j in N_i(t)} (x_j(t) - x_i(t)) + alpha_t (Pa_{X_i}(x_i(t)) - x_i(t))
//! ```
//!
//! where `Pa` is an approximate projection: a visible boundary point of `X_i`
//! whose direction from `x_i` deviates from the exact-projection direction by
//! at most a scheduled angle. The agents jointly minimize
//! `f(x) = sum_i |x|^2_{X_i}`, the sum of squared set distances, which reduces
//! to the convex intersection problem when the sets overlap.
//!
//! Crate layout:
//! - [`geometry`]: exact projection, distance, ray-boundary intersection and
//!   hull-diameter primitives for balls, axis boxes and bounded half-spaces.
//! - [`approx`]: the approximate projection operator and its geometric
//!   decomposition (tangent-plane point `Ph`, stepsize inflation `gamma`).
//! - [`graph`]: switching directed-graph schedules, dwell times, Laplacians
//!   and the uniform joint strong connectivity check.
//! - [`schedule`]: scalar stepsize / angle schedules.
//! - [`sim`]: the fixed-step RK4 integrator, switch-aligned.
//! - [`diagnostics`]: the centralized oracle (optimal solution, projection
//!   onto the intersection, per-time Lyapunov diagnostics).

pub mod approx;
pub mod diagnostics;
mod error;
pub mod geometry;
pub mod graph;
pub mod schedule;
pub mod sim;
pub(crate) mod vecmath;

pub use error::{Error, Result};

pub use approx::{approx_project, ApproxMode, ApproxResult, CallKey};
pub use diagnostics::{CharacterizationReport, DiagnosticsRecord, OptimalSolution};
pub use geometry::{ConvexSet, HullDiameter, SetFamily};
pub use graph::{DirectedGraph, GraphSchedule};
pub use schedule::{Schedule, SchedulePiece};
pub use sim::{
    integrate, step_rhs, validate_conditions, ConditionCheck, ConditionReport, ConditionStatus,
    SimConfig, SimState, TheoremTag, Trajectory, TrajectorySample,
};
