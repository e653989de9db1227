//! Scenario files: a JSON description of a complete simulation setup, plus
//! the built-in scenarios the tool ships with.
//!
//! The on-disk format uses 1-based agent and input numbering, which matches
//! how small networks are usually drawn; everything internal stays 0-based.
//! A minimal file looks like
//!
//! ```json
//! {
//!   "graph": { "n": 2, "edges": [[1, 2]] },
//!   "gains": { "alpha": 2.0, "gamma": 4.0, "sigma": 0.0 },
//!   "inputs": [ { "kind": "constant", "value": 1.0 } ],
//!   "weights": [
//!     { "agent": 1, "input": 1, "signal": { "kind": "constant", "value": 1.0 } }
//!   ],
//!   "sim": { "duration": 10.0 }
//! }
//! ```
//!
//! `init` (initial states, default zero), `dt` (default 1e-3), and
//! `record_stride` (default 1) are optional.

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

use crate::graph::Graph;
use crate::network::{Gains, WeightConfig, WeightEntry};
use crate::signal::{Accuracy, InputSignal, RangeProfile, TargetPath, WeightSignal};
use crate::sim::{Scenario, DEFAULT_DT};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioFile {
    graph: GraphSection,
    gains: GainsSection,
    inputs: Vec<InputSignal>,
    weights: Vec<WeightRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init: Option<InitSection>,
    sim: SimSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphSection {
    n: usize,
    /// Undirected edges as 1-based `[a, b]` pairs.
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GainsSection {
    alpha: f64,
    gamma: f64,
    sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WeightRow {
    /// 1-based agent number.
    agent: usize,
    /// 1-based input number.
    input: usize,
    signal: WeightSignal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InitSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SimSection {
    duration: f64,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_stride")]
    record_stride: usize,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_stride() -> usize {
    1
}

/// Parses a scenario from JSON text.
pub fn from_json_str(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(file)
}

/// Loads a scenario from a JSON file.
pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json_str(&text)
}

/// Serializes a scenario to pretty-printed JSON.
pub fn to_json_string(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        graph: GraphSection {
            n: scenario.graph.node_count(),
            edges: scenario
                .graph
                .edges()
                .iter()
                .map(|&(a, b)| [a + 1, b + 1])
                .collect(),
        },
        gains: GainsSection {
            alpha: scenario.gains.alpha,
            gamma: scenario.gains.gamma,
            sigma: scenario.gains.sigma,
        },
        inputs: scenario.inputs.clone(),
        weights: scenario
            .weights
            .entries()
            .iter()
            .map(|e| WeightRow {
                agent: e.agent + 1,
                input: e.input + 1,
                signal: e.signal.clone(),
            })
            .collect(),
        init: Some(InitSection {
            x0: Some(scenario.x0.to_vec()),
            xi0: Some(scenario.xi0.to_vec()),
        }),
        sim: SimSection {
            duration: scenario.duration,
            dt: scenario.dt,
            record_stride: scenario.record_stride,
        },
    };
    serde_json::to_string_pretty(&file).expect("scenario serialization cannot fail")
}

/// Writes a scenario to a JSON file.
pub fn save(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(scenario)).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn build(file: ScenarioFile) -> Result<Scenario> {
    let n = file.graph.n;
    let mut edges = Vec::with_capacity(file.graph.edges.len());
    for (i, &[a, b]) in file.graph.edges.iter().enumerate() {
        let path = || format!("graph.edges[{i}]");
        if a == 0 || b == 0 {
            return Err(invalid(path(), "node numbers are 1-based"));
        }
        if a > n || b > n {
            return Err(invalid(path(), format!("node out of range for n = {n}")));
        }
        edges.push((a - 1, b - 1));
    }
    let graph = Graph::new(n, &edges).map_err(|e| invalid("graph", e))?;
    if !graph.is_connected() {
        return Err(invalid(
            "graph",
            "graph is disconnected; scenarios need a connected network",
        ));
    }

    let gains = Gains::new(file.gains.alpha, file.gains.gamma, file.gains.sigma)
        .map_err(|e| invalid("gains", e))?;

    for (h, input) in file.inputs.iter().enumerate() {
        input
            .validate()
            .map_err(|e| invalid(format!("inputs[{h}]"), e))?;
    }
    let m = file.inputs.len();

    let mut entries = Vec::with_capacity(file.weights.len());
    for (i, row) in file.weights.iter().enumerate() {
        let path = || format!("weights[{i}]");
        if row.agent == 0 || row.input == 0 {
            return Err(invalid(path(), "agent and input numbers are 1-based"));
        }
        if row.agent > n {
            return Err(invalid(
                path(),
                format!("agent {} out of range for n = {n}", row.agent),
            ));
        }
        if row.input > m {
            return Err(invalid(
                path(),
                format!("input {} out of range for {m} inputs", row.input),
            ));
        }
        row.signal.validate().map_err(|e| invalid(path(), e))?;
        entries.push(WeightEntry {
            agent: row.agent - 1,
            input: row.input - 1,
            signal: row.signal.clone(),
        });
    }
    let weights = WeightConfig::new(n, m, entries).map_err(|e| invalid("weights", e))?;

    let (x0, xi0) = match &file.init {
        None => (Array1::zeros(n), Array1::zeros(n)),
        Some(init) => {
            let take = |field: &Option<Vec<f64>>, path: &str| -> Result<Array1<f64>> {
                match field {
                    None => Ok(Array1::zeros(n)),
                    Some(v) if v.len() == n => Ok(Array1::from_vec(v.clone())),
                    Some(v) => Err(invalid(
                        format!("init.{path}"),
                        format!("expected {n} values, got {}", v.len()),
                    )),
                }
            };
            (take(&init.x0, "x0")?, take(&init.xi0, "xi0")?)
        }
    };

    let scenario = Scenario {
        graph,
        gains,
        inputs: file.inputs,
        weights,
        x0,
        xi0,
        duration: file.sim.duration,
        dt: file.sim.dt,
        record_stride: file.sim.record_stride,
    };
    scenario.validate().map_err(|e| invalid("sim", e))?;
    Ok(scenario)
}

/// Names of the scenarios available through [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = [
    "fig2-identical",
    "fig2-heterogeneous",
    "fig4-identical",
    "fig4-heterogeneous",
];

/// Returns a built-in scenario by name, or `None` for an unknown name.
///
/// The `fig2-*` pair is a four-agent line network sensing two stationary
/// targets, with either identical or heterogeneous value-of-information
/// weights. The `fig4-*` pair is a nine-agent grid tracking a target that
/// circles the grid center, weighting measurements either by an in-range
/// indicator or by sensing quality.
pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "fig2-identical" => Some(fig2(false)),
        "fig2-heterogeneous" => Some(fig2(true)),
        "fig4-identical" => Some(fig4(RangeProfile::Indicator)),
        "fig4-heterogeneous" => Some(fig4(RangeProfile::Linear)),
        _ => None,
    }
}

/// Four agents in a line; agents 1 and 2 each sense two stationary targets
/// with different accuracies, agents 3 and 4 are passive. The heterogeneous
/// variant downweights the half-accuracy measurements.
fn fig2(heterogeneous: bool) -> Scenario {
    let graph = Graph::path(4).expect("line graph is valid");
    let gains = Gains::new(5.0, 10.0, 0.0).expect("gains are valid");
    let track = |quantity: f64, accuracy: f64| InputSignal::TargetTrack {
        target: TargetPath::Fixed {
            quantity,
            position: [0.0, 0.0],
        },
        accuracy: Accuracy::Constant { value: accuracy },
    };
    // Measured values: 1*1, 0.5*2, 0.5*1, 1*2 = (1, 1, 0.5, 2).
    let inputs = vec![
        track(1.0, 1.0),
        track(2.0, 0.5),
        track(1.0, 0.5),
        track(2.0, 1.0),
    ];
    let low = if heterogeneous { 0.1 } else { 1.0 };
    let weight = |agent: usize, input: usize, value: f64| WeightEntry {
        agent,
        input,
        signal: WeightSignal::Constant { value },
    };
    let entries = vec![
        weight(0, 0, 1.0),
        weight(0, 1, low),
        weight(1, 2, low),
        weight(1, 3, 1.0),
    ];
    let weights = WeightConfig::new(4, 4, entries).expect("weight table is valid");
    let mut sc = Scenario::new(graph, gains, inputs, weights, 10.0);
    sc.record_stride = 10;
    sc
}

/// Nine agents on a 3x3 grid over [0, 3]^2, sensing radius 1.2; the target
/// circles the grid center at radius 1 with period 20 and the sensed
/// quantity is its x-coordinate. Every agent takes its own distance-degraded
/// measurement; the weight profile distinguishes the two variants.
fn fig4(profile: RangeProfile) -> Scenario {
    let n = 9;
    let spacing = 1.5;
    let radius = 1.2;
    let positions: Vec<[f64; 2]> = (0..n)
        .map(|k| [spacing * (k % 3) as f64, spacing * (k / 3) as f64])
        .collect();
    let mut edges = Vec::new();
    for k in 0..n {
        let (col, row) = (k % 3, k / 3);
        if col + 1 < 3 {
            edges.push((k, k + 1));
        }
        if row + 1 < 3 {
            edges.push((k, k + 3));
        }
    }
    let graph = Graph::new(n, &edges).expect("grid graph is valid");
    let gains = Gains::new(20.0, 150.0, 0.1).expect("gains are valid");
    let target = TargetPath::Circle {
        center: [1.5, 1.5],
        radius: 1.0,
        period: 20.0,
        phase: 0.0,
    };

    let inputs: Vec<InputSignal> = positions
        .iter()
        .map(|&position| InputSignal::TargetTrack {
            target: target.clone(),
            accuracy: Accuracy::DistanceBased { position, radius },
        })
        .collect();
    let entries: Vec<WeightEntry> = positions
        .iter()
        .enumerate()
        .map(|(k, &position)| WeightEntry {
            agent: k,
            input: k,
            signal: WeightSignal::DistanceBased {
                position,
                target: target.clone(),
                radius,
                profile,
            },
        })
        .collect();
    let weights = WeightConfig::new(n, n, entries).expect("weight table is valid");
    let mut sc = Scenario::new(graph, gains, inputs, weights, 40.0);
    sc.record_stride = 10;
    sc
}
