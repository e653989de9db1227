//! The weighted active-passive consensus dynamics.
//!
//! A network of `n` agents exchanges a state `x` and an integral-action state
//! `xi` over an undirected connected graph. Agents that sense one of the `m`
//! exogenous inputs (`m <= n`) are active and pull their state toward the
//! sensed values with time-varying value-of-information weights in `[0, 1]`;
//! the rest are passive and only participate in the consensus coupling.
//!
//! Stacked over the network, with `L` the graph Laplacian, `K2(t)` the
//! `n x n` weight matrix (inputs zero-padded to width `n`), and
//! `K1(t) = diag(K2(t) 1)`:
//!
//! ```text
//! x'  = -alpha L x + L xi - alpha K1 x + alpha K2 c
//! xi' = -gamma L x - gamma sigma xi
//! ```
//!
//! [`derivative_agent_form`] evaluates the same rule by iterating neighbor
//! sums per agent. The two forms agree to machine precision and are kept as
//! independent routes so each can check the other.

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::graph::Graph;
use crate::signal::{InputSignal, SignalError, WeightSignal};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("gain {name} must be positive, got {value}")]
    NonPositiveGain { name: &'static str, value: f64 },
    #[error("leakage sigma must be nonnegative and finite, got {value}")]
    InvalidSigma { value: f64 },
    #[error("a weight configuration needs at least one entry")]
    NoEntries,
    #[error("{m} inputs exceed the {n} available agents")]
    TooManyInputs { m: usize, n: usize },
    #[error("weight entry references agent {agent} but the network has {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },
    #[error("weight entry references input {input} but the scenario has {m} inputs")]
    InputOutOfRange { input: usize, m: usize },
    #[error("duplicate weight entry for agent {agent}, input {input}")]
    DuplicateEntry { agent: usize, input: usize },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, NetworkError>;

/// The three scalar gains of the dynamics: consensus gain `alpha`, integral
/// gain `gamma`, and integral leakage `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub alpha: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl Gains {
    /// `alpha > 0`, `gamma > 0`, `sigma >= 0`, all finite.
    pub fn new(alpha: f64, gamma: f64, sigma: f64) -> Result<Self> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(NetworkError::NonPositiveGain {
                name: "alpha",
                value: alpha,
            });
        }
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(NetworkError::NonPositiveGain {
                name: "gamma",
                value: gamma,
            });
        }
        if sigma < 0.0 || !sigma.is_finite() {
            return Err(NetworkError::InvalidSigma { value: sigma });
        }
        Ok(Gains {
            alpha,
            gamma,
            sigma,
        })
    }
}

/// Network state at a point in time.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub x: Array1<f64>,
    pub xi: Array1<f64>,
    pub t: f64,
}

impl NetworkState {
    pub fn zeros(n: usize) -> Self {
        NetworkState {
            x: Array1::zeros(n),
            xi: Array1::zeros(n),
            t: 0.0,
        }
    }
}

/// One sensing relation: `agent` weighs `input` by `signal`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightEntry {
    pub agent: usize,
    pub input: usize,
    pub signal: WeightSignal,
}

/// The sparse set of value-of-information weights of a scenario, together
/// with the network and input dimensions it is valid for.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig {
    n: usize,
    m: usize,
    entries: Vec<WeightEntry>,
}

impl WeightConfig {
    pub fn new(n: usize, m: usize, entries: Vec<WeightEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(NetworkError::NoEntries);
        }
        if m == 0 || m > n {
            return Err(NetworkError::TooManyInputs { m, n });
        }
        let mut seen = std::collections::HashSet::new();
        for entry in &entries {
            if entry.agent >= n {
                return Err(NetworkError::AgentOutOfRange {
                    agent: entry.agent,
                    n,
                });
            }
            if entry.input >= m {
                return Err(NetworkError::InputOutOfRange {
                    input: entry.input,
                    m,
                });
            }
            if !seen.insert((entry.agent, entry.input)) {
                return Err(NetworkError::DuplicateEntry {
                    agent: entry.agent,
                    input: entry.input,
                });
            }
            entry.signal.validate()?;
        }
        Ok(WeightConfig { n, m, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of exogenous inputs (before zero-padding to width `n`).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[WeightEntry] {
        &self.entries
    }

    /// True when `agent` holds at least one weight entry, i.e. is active.
    pub fn is_active(&self, agent: usize) -> bool {
        self.entries.iter().any(|e| e.agent == agent)
    }

    /// The `n x n` weight matrix `K2(t)`: entry `(i, h)` is `w_ih(t)` for a
    /// sensing pair, zero elsewhere. Columns `m..n` are structurally zero.
    pub fn eval_k2(&self, t: f64) -> Array2<f64> {
        let mut k2 = Array2::zeros((self.n, self.n));
        for entry in &self.entries {
            k2[[entry.agent, entry.input]] = entry.signal.value(t);
        }
        k2
    }

    /// The diagonal of `K1(t) = diag(K2(t) 1)`: per-agent total sensing
    /// weight.
    pub fn eval_k1_diag(&self, t: f64) -> Array1<f64> {
        let mut k1 = Array1::zeros(self.n);
        for entry in &self.entries {
            k1[entry.agent] += entry.signal.value(t);
        }
        k1
    }
}

/// Evaluates every input signal at `t` and zero-pads to length `n`.
pub fn input_vector(inputs: &[InputSignal], n: usize, t: f64) -> Array1<f64> {
    let mut c = Array1::zeros(n);
    for (h, signal) in inputs.iter().enumerate() {
        c[h] = signal.value(t);
    }
    c
}

/// The stacked right-hand side given the pieces already evaluated at one
/// stage time. This is the hot path shared by the integrator and the public
/// compact-form wrapper.
pub fn compact_derivative(
    laplacian: &Array2<f64>,
    gains: &Gains,
    k1_diag: &Array1<f64>,
    k2: &Array2<f64>,
    c: &Array1<f64>,
    x: &Array1<f64>,
    xi: &Array1<f64>,
) -> (Array1<f64>, Array1<f64>) {
    let lx = laplacian.dot(x);
    let mut x_dot = laplacian.dot(xi);
    x_dot.scaled_add(-gains.alpha, &lx);
    x_dot.scaled_add(gains.alpha, &k2.dot(c));
    for i in 0..x.len() {
        x_dot[i] -= gains.alpha * k1_diag[i] * x[i];
    }
    let mut xi_dot = lx;
    xi_dot.iter_mut().zip(xi.iter()).for_each(|(d, &v)| {
        *d = -gains.gamma * *d - gains.gamma * gains.sigma * v;
    });
    (x_dot, xi_dot)
}

/// Compact (matrix) form of the dynamics at state `s`, with the padded input
/// vector `c` supplied by the caller.
pub fn derivative_compact_form(
    graph: &Graph,
    gains: &Gains,
    weights: &WeightConfig,
    c: &Array1<f64>,
    s: &NetworkState,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let n = graph.node_count();
    check_dims(n, weights, s)?;
    if c.len() != n {
        return Err(NetworkError::DimensionMismatch {
            expected: n,
            got: c.len(),
        });
    }
    let k2 = weights.eval_k2(s.t);
    let k1 = weights.eval_k1_diag(s.t);
    Ok(compact_derivative(
        &graph.laplacian(),
        gains,
        &k1,
        &k2,
        c,
        &s.x,
        &s.xi,
    ))
}

/// Per-agent (neighbor-sum) form of the dynamics at state `s`, evaluating the
/// input signals internally:
///
/// ```text
/// x_i'  = -alpha sum_j (x_i - x_j) + sum_j (xi_i - xi_j)
///         - alpha sum_h w_ih(t) (x_i - c_h(t))
/// xi_i' = -gamma [ sum_j (x_i - x_j) + sigma xi_i ]
/// ```
pub fn derivative_agent_form(
    graph: &Graph,
    gains: &Gains,
    weights: &WeightConfig,
    inputs: &[InputSignal],
    s: &NetworkState,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let n = graph.node_count();
    check_dims(n, weights, s)?;
    if inputs.len() != weights.m() {
        return Err(NetworkError::DimensionMismatch {
            expected: weights.m(),
            got: inputs.len(),
        });
    }
    let c: Vec<f64> = inputs.iter().map(|sig| sig.value(s.t)).collect();
    let mut x_dot = Array1::zeros(n);
    let mut xi_dot = Array1::zeros(n);
    for i in 0..n {
        let mut x_coupling = 0.0;
        let mut xi_coupling = 0.0;
        for &j in graph.neighbors(i) {
            x_coupling += s.x[i] - s.x[j];
            xi_coupling += s.xi[i] - s.xi[j];
        }
        x_dot[i] = -gains.alpha * x_coupling + xi_coupling;
        xi_dot[i] = -gains.gamma * (x_coupling + gains.sigma * s.xi[i]);
    }
    for entry in weights.entries() {
        let w = entry.signal.value(s.t);
        x_dot[entry.agent] -= gains.alpha * w * (s.x[entry.agent] - c[entry.input]);
    }
    Ok((x_dot, xi_dot))
}

fn check_dims(n: usize, weights: &WeightConfig, s: &NetworkState) -> Result<()> {
    if weights.n() != n {
        return Err(NetworkError::DimensionMismatch {
            expected: n,
            got: weights.n(),
        });
    }
    if s.x.len() != n {
        return Err(NetworkError::DimensionMismatch {
            expected: n,
            got: s.x.len(),
        });
    }
    if s.xi.len() != n {
        return Err(NetworkError::DimensionMismatch {
            expected: n,
            got: s.xi.len(),
        });
    }
    Ok(())
}
