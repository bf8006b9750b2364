//! Fixed-step RK4 integration of the consensus + approximate-projection
//! dynamics, with the step grid aligned to the graph switching instants so
//! no step straddles a switch.

use crate::approx::{approx_project, ApproxMode, CallKey};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::geometry::SetFamily;
use crate::graph::{DirectedGraph, GraphSchedule};
use crate::schedule::Schedule;
use crate::vecmath::is_finite;
use crate::{Error, Result};

/// Full description of one simulation run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub family: SetFamily,
    pub graph: GraphSchedule,
    pub stepsize: Schedule,
    pub angle: Schedule,
    pub mode: ApproxMode,
    /// Initial state of each agent.
    pub x0: Vec<Vec<f64>>,
    /// Integrator step; must satisfy `dt <= dwell_time / 10`.
    pub dt: f64,
    pub t_end: f64,
    /// Record every `stride`-th step (plus t = 0 and t_end).
    pub stride: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let m = self.family.dim();
        let n = self.family.len();
        if self.graph.node_count() != n {
            return Err(Error::InvalidConfig(format!(
                "graph has {} nodes but the family has {} sets",
                self.graph.node_count(),
                n
            )));
        }
        if self.x0.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{} initial states for {} agents",
                self.x0.len(),
                n
            )));
        }
        for x in &self.x0 {
            if x.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: x.len(),
                });
            }
            if !is_finite(x) {
                return Err(Error::InvalidConfig("initial state must be finite".into()));
            }
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        let tau = self.graph.dwell_time();
        if self.dt > tau / 10.0 + 1e-15 {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be at most dwell time / 10 = {}",
                self.dt,
                tau / 10.0
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidConfig("t_end must be positive".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("record stride must be >= 1".into()));
        }
        self.stepsize.validate()?;
        self.angle.validate()?;
        if self.angle.max_value() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidConfig(
                "angle schedule must stay below pi/2".into(),
            ));
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical debug rendering, recorded in trajectory
    /// metadata so emitted files can be tied to the producing config.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in format!("{self:?}").bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

/// Stacked agent states at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Concatenation of the `n` agent vectors, each of dimension `m`.
    pub x: Vec<f64>,
}

impl SimState {
    pub fn agent<'a>(&'a self, i: usize, dim: usize) -> &'a [f64] {
        &self.x[i * dim..(i + 1) * dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub states: Vec<Vec<f64>>,
    pub record: DiagnosticsRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub config_hash: u64,
    pub clamp_events: u64,
    /// Whether the diagnostics treat the intersection as nonempty.
    pub intersection_nonempty: bool,
}

impl Trajectory {
    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has samples")
    }
}

/// Right-hand side of the dynamics at time `t` with the graph frozen to
/// `graph`. Returns the stacked velocity and the number of clamp events.
fn rhs_frozen(
    x: &[f64],
    t: f64,
    config: &SimConfig,
    graph: &DirectedGraph,
    step: u64,
) -> Result<(Vec<f64>, u64)> {
    let m = config.family.dim();
    let n = config.family.len();
    let alpha = config.stepsize.value(t);
    let theta = config.angle.value(t);
    let mut v = vec![0.0; n * m];
    let mut clamps = 0;
    for i in 0..n {
        let xi = &x[i * m..(i + 1) * m];
        for j in graph.neighbors_in(i) {
            let xj = &x[j * m..(j + 1) * m];
            for k in 0..m {
                v[i * m + k] += xj[k] - xi[k];
            }
        }
        let ap = approx_project(
            config.family.get(i),
            xi,
            theta,
            &config.mode,
            CallKey { agent: i, step },
        )?;
        if ap.clamped {
            clamps += 1;
        }
        for k in 0..m {
            v[i * m + k] += alpha * (ap.pa[k] - xi[k]);
        }
    }
    Ok((v, clamps))
}

/// Right-hand side of the dynamics with the graph looked up at `t`.
pub fn step_rhs(state: &SimState, config: &SimConfig) -> Result<Vec<f64>> {
    let graph = config.graph.graph_at(state.t)?;
    Ok(rhs_frozen(&state.x, state.t, config, graph, 0)?.0)
}

/// Classical RK4 over a switch-aligned grid. Deterministic for a fixed
/// config; aborts with [`Error::Diverged`] when any agent norm exceeds
/// `1e6 * (1 + xi)` with `xi` the hull diameter.
pub fn integrate(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let m = config.family.dim();
    let n = config.family.len();
    let guard = 1e6 * (1.0 + config.family.hull_diameter().value);
    let nonempty = diagnostics::intersection_nonempty(&config.family);

    let mut x: Vec<f64> = config.x0.iter().flatten().copied().collect();
    let mut clamp_events = 0u64;
    let mut step: u64 = 0;
    let mut samples = Vec::new();

    let check_guard = |x: &[f64], t: f64| -> Result<()> {
        for i in 0..n {
            let norm = x[i * m..(i + 1) * m]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if !norm.is_finite() || norm > guard {
                return Err(Error::Diverged { t, norm });
            }
        }
        Ok(())
    };
    check_guard(&x, 0.0)?;

    let record =
        |t: f64, x: &[f64], step: u64, samples: &mut Vec<TrajectorySample>| -> Result<()> {
            let states: Vec<Vec<f64>> =
                (0..n).map(|i| x[i * m..(i + 1) * m].to_vec()).collect();
            let alpha = config.stepsize.value(t);
            let theta = config.angle.value(t);
            let mut gamma = Vec::with_capacity(n);
            let mut alpha_virtual = Vec::with_capacity(n);
            let mut realized = Vec::with_capacity(n);
            for (i, s) in states.iter().enumerate() {
                let ap = approx_project(
                    config.family.get(i),
                    s,
                    theta,
                    &config.mode,
                    CallKey { agent: i, step },
                )?;
                gamma.push(ap.gamma);
                alpha_virtual.push(ap.gamma * alpha);
                realized.push(ap.realized_angle);
            }
            let rec = diagnostics::diagnostics_for(
                t,
                &states,
                &config.family,
                &gamma,
                &alpha_virtual,
                &realized,
                nonempty,
            )?;
            samples.push(TrajectorySample {
                t,
                states,
                record: rec,
            });
            Ok(())
        };

    record(0.0, &x, 0, &mut samples)?;

    // Segment boundaries: 0, the switching instants, t_end.
    let mut boundaries = vec![0.0];
    boundaries.extend(
        config
            .graph
            .switching_instants(config.t_end)
            .into_iter()
            .filter(|t| *t < config.t_end - 1e-12),
    );
    boundaries.push(config.t_end);

    let scratch = |x: &[f64], s: f64, k: &[f64]| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };

    let mut last_recorded = 0.0;
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        let steps = ((b - a) / config.dt).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        let graph = config.graph.graph_at(a)?.clone();
        let mut t = a;
        for s in 0..steps {
            let (k1, c1) = rhs_frozen(&x, t, config, &graph, step)?;
            let (k2, c2) = rhs_frozen(&scratch(&x, h / 2.0, &k1), t + h / 2.0, config, &graph, step)?;
            let (k3, c3) = rhs_frozen(&scratch(&x, h / 2.0, &k2), t + h / 2.0, config, &graph, step)?;
            let (k4, c4) = rhs_frozen(&scratch(&x, h, &k3), t + h, config, &graph, step)?;
            clamp_events += c1 + c2 + c3 + c4;
            for idx in 0..x.len() {
                x[idx] += h / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]);
            }
            step += 1;
            t = if s + 1 == steps { b } else { a + (s + 1) as f64 * h };
            check_guard(&x, t)?;
            if step % config.stride as u64 == 0 {
                record(t, &x, step, &mut samples)?;
                last_recorded = t;
            }
        }
    }
    if last_recorded < config.t_end {
        record(config.t_end, &x, step, &mut samples)?;
    }

    Ok(Trajectory {
        samples,
        config_hash: config.hash(),
        clamp_events,
        intersection_nonempty: nonempty,
    })
}

/// Which set of sufficient conditions to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremTag {
    /// Nonempty intersection: `∫α = ∞` and `∫α·tanθ⁺ < ∞`.
    T3,
    /// Empty intersection: T3's conditions plus `∫α² < ∞` and undirected
    /// graphs.
    T4,
    /// Constant stepsize and angle residual analysis.
    T6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionStatus {
    Satisfied,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: String,
    pub status: ConditionStatus,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub theorem: TheoremTag,
    pub checks: Vec<ConditionCheck>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn all_satisfied(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.status == ConditionStatus::Satisfied)
    }
}

fn check(name: &str, status: ConditionStatus, reason: &str) -> ConditionCheck {
    ConditionCheck {
        name: name.into(),
        status,
        reason: reason.into(),
    }
}

/// Analytic (tail-based) classification of the stepsize/angle integrability
/// conditions. Informational: the report never blocks a run.
pub fn validate_conditions(config: &SimConfig, theorem: TheoremTag) -> ConditionReport {
    use crate::schedule::SchedulePiece as P;
    use ConditionStatus::*;

    let alpha = &config.stepsize;
    let theta = &config.angle;
    let piecewise = |s: &Schedule| matches!(s, Schedule::Piecewise(_));
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    // ∫ alpha dt = ∞
    let persist = if piecewise(alpha) {
        check("integral_alpha_diverges", Unknown, "piecewise tail not classified")
    } else if alpha.integral_diverges() {
        match alpha.tail() {
            P::Constant(c) => check(
                "integral_alpha_diverges",
                Satisfied,
                &format!("constant {c} > 0: integral diverges"),
            ),
            P::RationalDecay { a, b } => check(
                "integral_alpha_diverges",
                Satisfied,
                &format!("{a}/(t+{b}): harmonic tail diverges"),
            ),
        }
    } else {
        check("integral_alpha_diverges", Violated, "stepsize integral converges")
    };

    // ∫ alpha tan(theta+) dt < ∞
    let cross = if piecewise(alpha) || piecewise(theta) {
        check("integral_alpha_tan_theta_finite", Unknown, "piecewise tail not classified")
    } else {
        match (alpha.tail(), theta.tail()) {
            (_, P::Constant(c)) if c == 0.0 => check(
                "integral_alpha_tan_theta_finite",
                Satisfied,
                "tan 0 = 0: integrand vanishes",
            ),
            (P::Constant(a), _) if a == 0.0 => check(
                "integral_alpha_tan_theta_finite",
                Satisfied,
                "zero stepsize: integrand vanishes",
            ),
            (P::RationalDecay { a, b }, P::RationalDecay { a: c, b: d }) => check(
                "integral_alpha_tan_theta_finite",
                Satisfied,
                &format!("{a}/(t+{b}) * tan({c}/(t+{d})) ~ {}/t^2: converges", a * c),
            ),
            (P::Constant(_), P::RationalDecay { .. }) => check(
                "integral_alpha_tan_theta_finite",
                Violated,
                "constant stepsize times ~1/t angle: harmonic tail diverges",
            ),
            (P::RationalDecay { .. }, P::Constant(_)) => check(
                "integral_alpha_tan_theta_finite",
                Violated,
                "constant angle reduces the condition to ∫alpha < ∞, which fails",
            ),
            (P::Constant(_), P::Constant(_)) => check(
                "integral_alpha_tan_theta_finite",
                Violated,
                "constant stepsize and angle: integrand has a positive limit",
            ),
        }
    };

    match theorem {
        TheoremTag::T3 => {
            checks.push(persist);
            checks.push(cross);
        }
        TheoremTag::T4 => {
            checks.push(persist);
            let square = if piecewise(alpha) {
                check("integral_alpha_squared_finite", Unknown, "piecewise tail not classified")
            } else if alpha.square_integrable() {
                check(
                    "integral_alpha_squared_finite",
                    Satisfied,
                    "squared tail ~1/t^2 (or zero): converges",
                )
            } else {
                check(
                    "integral_alpha_squared_finite",
                    Violated,
                    "constant stepsize: squared integral diverges",
                )
            };
            checks.push(square);
            checks.push(cross);
            checks.push(if config.graph.is_undirected() {
                check("graphs_undirected", Satisfied, "every segment is undirected")
            } else {
                check("graphs_undirected", Violated, "a segment has a one-way arc")
            });
            if !piecewise(alpha) && !alpha.vanishes() {
                notes.push(
                    "a vanishing stepsize (lim alpha_t = 0) is necessary in the \
                     empty-intersection case"
                        .into(),
                );
            }
        }
        TheoremTag::T6 => {
            checks.push(match alpha {
                Schedule::Constant(c) if *c > 0.0 => {
                    check("alpha_constant_positive", Satisfied, &format!("alpha = {c}"))
                }
                Schedule::Constant(_) => {
                    check("alpha_constant_positive", Violated, "alpha = 0")
                }
                _ => check("alpha_constant_positive", Violated, "stepsize is not constant"),
            });
            checks.push(if theta.is_constant() {
                check("theta_constant", Satisfied, "angle schedule is constant")
            } else {
                check("theta_constant", Violated, "angle schedule varies with time")
            });
            checks.push(if config.graph.is_undirected() {
                check("graphs_undirected", Satisfied, "every segment is undirected")
            } else {
                check("graphs_undirected", Violated, "a segment has a one-way arc")
            });
        }
    }

    ConditionReport {
        theorem,
        checks,
        notes,
    }
}
