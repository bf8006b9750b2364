//! Scenario files: TOML with sections [sets], [agents], [graph], [stepsize],
//! [angle], [approx], [integrator], [output]. Sets and agents are keyed by
//! 1-based index; graph edges are 1-based `[j, i]` pairs meaning agent `i`
//! receives from agent `j`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sdop_core::{
    ApproxMode, ConvexSet, DirectedGraph, GraphSchedule, Schedule, SetFamily, SimConfig,
};

/// Errors before a simulation exists, mapped to exit codes by the caller.
#[derive(Debug)]
pub enum ConfigError {
    /// Unreadable or syntactically invalid scenario file (exit 4).
    Parse(String),
    /// Structurally valid file describing an invalid scenario (exit 2).
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid scenario: {m}"),
        }
    }
}

fn invalid(m: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(m.into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub sets: BTreeMap<String, SetCfg>,
    pub agents: BTreeMap<String, AgentCfg>,
    pub graph: GraphCfg,
    pub stepsize: ScheduleCfg,
    pub angle: ScheduleCfg,
    #[serde(default)]
    pub approx: ApproxCfg,
    pub integrator: IntegratorCfg,
    #[serde(default)]
    pub output: OutputCfg,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetCfg {
    pub kind: String,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub normal: Option<Vec<f64>>,
    pub offset: Option<f64>,
    pub bound_center: Option<Vec<f64>>,
    pub bound_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentCfg {
    pub x0: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphCfg {
    pub segments: Vec<SegmentCfg>,
    #[serde(default = "default_true")]
    pub periodic: bool,
    #[serde(default)]
    pub undirected: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentCfg {
    pub edges: Vec<[usize; 2]>,
    pub duration: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleCfg {
    pub kind: String,
    pub value: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxCfg {
    pub mode: Option<String>,
    pub axis: Option<Vec<f64>>,
    pub sign: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorCfg {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    pub stride: Option<usize>,
    pub dir: Option<String>,
}

/// Loads a scenario file, applies `key=value` overrides by dotted path, and
/// deserializes. Override values are parsed as TOML scalars/arrays, falling
/// back to plain strings.
pub fn load(path: &Path, overrides: &[String]) -> Result<ScenarioFile, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
    let mut value: toml::Value = text
        .parse()
        .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;

    for ov in overrides {
        let (key, raw) = ov
            .split_once('=')
            .ok_or_else(|| invalid(format!("override `{ov}` is not of the form key=value")))?;
        let parsed: toml::Value = match format!("x = {raw}").parse::<toml::Table>() {
            Ok(t) => t["x"].clone(),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts.pop().unwrap();
        let mut node = &mut value;
        for part in parts {
            let table = node
                .as_table_mut()
                .ok_or_else(|| invalid(format!("override `{key}`: `{part}` is not a table")))?;
            node = table
                .entry(part.to_string())
                .or_insert(toml::Value::Table(toml::Table::new()));
        }
        node.as_table_mut()
            .ok_or_else(|| invalid(format!("override `{key}`: parent is not a table")))?
            .insert(last.to_string(), parsed);
    }

    ScenarioFile::deserialize(value).map_err(|e| invalid(e.to_string()))
}

fn indexed<'a, T>(
    section: &'a BTreeMap<String, T>,
    what: &str,
) -> Result<Vec<&'a T>, ConfigError> {
    let mut entries: Vec<(usize, &T)> = Vec::new();
    for (k, v) in section {
        let idx: usize = k
            .parse()
            .map_err(|_| invalid(format!("{what} key `{k}` is not an index")))?;
        entries.push((idx, v));
    }
    entries.sort_by_key(|(i, _)| *i);
    for (pos, (idx, _)) in entries.iter().enumerate() {
        if *idx != pos + 1 {
            return Err(invalid(format!("{what} indices must be 1..=n contiguous")));
        }
    }
    Ok(entries.into_iter().map(|(_, v)| v).collect())
}

fn build_set(cfg: &SetCfg, idx: usize) -> Result<ConvexSet, ConfigError> {
    let need = |o: &Option<Vec<f64>>, name: &str| {
        o.clone()
            .ok_or_else(|| invalid(format!("set {idx}: `{name}` required for kind {}", cfg.kind)))
    };
    let need_f = |o: &Option<f64>, name: &str| {
        o.ok_or_else(|| invalid(format!("set {idx}: `{name}` required for kind {}", cfg.kind)))
    };
    let set = match cfg.kind.as_str() {
        "ball" => ConvexSet::ball(need(&cfg.center, "center")?, need_f(&cfg.radius, "radius")?),
        "box" => ConvexSet::axis_box(need(&cfg.lower, "lower")?, need(&cfg.upper, "upper")?),
        "halfspace" => ConvexSet::half_space(
            need(&cfg.normal, "normal")?,
            need_f(&cfg.offset, "offset")?,
            need(&cfg.bound_center, "bound_center")?,
            need_f(&cfg.bound_radius, "bound_radius")?,
        ),
        other => return Err(invalid(format!("set {idx}: unknown kind `{other}`"))),
    };
    set.map_err(|e| invalid(format!("set {idx}: {e}")))
}

fn build_schedule(cfg: &ScheduleCfg, what: &str) -> Result<Schedule, ConfigError> {
    match cfg.kind.as_str() {
        "constant" => Ok(Schedule::Constant(cfg.value.ok_or_else(|| {
            invalid(format!("{what}: `value` required for kind constant"))
        })?)),
        "rational" => Ok(Schedule::RationalDecay {
            a: cfg
                .a
                .ok_or_else(|| invalid(format!("{what}: `a` required for kind rational")))?,
            b: cfg
                .b
                .ok_or_else(|| invalid(format!("{what}: `b` required for kind rational")))?,
        }),
        other => Err(invalid(format!("{what}: unknown kind `{other}`"))),
    }
}

fn build_graph(cfg: &GraphCfg, n: usize) -> Result<GraphSchedule, ConfigError> {
    let mut segments = Vec::new();
    for (k, seg) in cfg.segments.iter().enumerate() {
        let mut arcs: Vec<(usize, usize)> = Vec::new();
        for &[j, i] in &seg.edges {
            if j == 0 || i == 0 || j > n || i > n {
                return Err(invalid(format!(
                    "graph segment {}: edge [{j}, {i}] out of 1..={n}",
                    k + 1
                )));
            }
            arcs.push((j - 1, i - 1));
            if cfg.undirected {
                arcs.push((i - 1, j - 1));
            }
        }
        let g = DirectedGraph::new(n, arcs)
            .map_err(|e| invalid(format!("graph segment {}: {e}", k + 1)))?;
        segments.push((g, seg.duration));
    }
    GraphSchedule::new(segments, cfg.periodic).map_err(|e| invalid(e.to_string()))
}

fn build_mode(cfg: &ApproxCfg) -> Result<ApproxMode, ConfigError> {
    match cfg.mode.as_deref().unwrap_or("exact") {
        "exact" => Ok(ApproxMode::Exact),
        "planar" => Ok(ApproxMode::PlanarRotation {
            axis: cfg
                .axis
                .clone()
                .ok_or_else(|| invalid("approx: `axis` required for mode planar"))?,
            sign: cfg.sign.unwrap_or(1.0),
        }),
        "random" => Ok(ApproxMode::RandomCone {
            seed: cfg.seed.unwrap_or(0),
        }),
        other => Err(invalid(format!("approx: unknown mode `{other}`"))),
    }
}

impl ScenarioFile {
    pub fn to_sim_config(&self) -> Result<SimConfig, ConfigError> {
        let set_cfgs = indexed(&self.sets, "sets")?;
        let agent_cfgs = indexed(&self.agents, "agents")?;
        if set_cfgs.len() != agent_cfgs.len() {
            return Err(invalid(format!(
                "{} sets but {} agents",
                set_cfgs.len(),
                agent_cfgs.len()
            )));
        }
        let sets = set_cfgs
            .iter()
            .enumerate()
            .map(|(i, c)| build_set(c, i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        let family = SetFamily::new(sets).map_err(|e| invalid(e.to_string()))?;
        let graph = build_graph(&self.graph, family.len())?;
        let cfg = SimConfig {
            family,
            graph,
            stepsize: build_schedule(&self.stepsize, "stepsize")?,
            angle: build_schedule(&self.angle, "angle")?,
            mode: build_mode(&self.approx)?,
            x0: agent_cfgs.iter().map(|a| a.x0.clone()).collect(),
            dt: self.integrator.dt,
            t_end: self.integrator.t_end,
            stride: self.output.stride.unwrap_or(1),
        };
        cfg.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(cfg)
    }
}
