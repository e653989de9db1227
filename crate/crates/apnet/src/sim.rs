//! Fixed-step RK4 integration of the closed-loop network.
//!
//! A [`Scenario`] bundles everything one run needs: topology, gains,
//! input signals, weight schedules, initial conditions, duration, and step
//! size. [`integrate`] produces a [`Trajectory`] of recorded samples with
//! the error coordinates evaluated alongside the raw states, so downstream
//! code never has to re-derive them.
//!
//! The integrator is deliberately plain: classical Runge-Kutta with a fixed
//! step, exogenous signals sampled at the stage times. [`halve_step_audit`]
//! re-runs a scenario at `dt`, `dt/2`, and `dt/4` and reports the ratio of
//! successive state differences, which sits near 16 for a fourth-order
//! method on a smooth problem.

use ndarray::Array1;
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::graph::{Graph, GraphError};
use crate::network::{compact_derivative, input_vector, Gains, NetworkError, WeightConfig};
use crate::signal::InputSignal;

/// Default integration step.
pub const DEFAULT_DT: f64 = 1e-3;

/// States beyond this magnitude abort the run as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("state diverged at t = {t:.6}")]
    Diverged { t: f64 },
    #[error("duration must be positive and finite, got {duration}")]
    InvalidDuration { duration: f64 },
    #[error("dt must be positive and finite, got {dt}")]
    InvalidDt { dt: f64 },
    #[error("record stride must be at least 1")]
    InvalidStride,
    #[error("initial state has length {got}, expected {expected}")]
    InitialStateMismatch { expected: usize, got: usize },
    #[error("weight table is sized for {weights} agents but the graph has {graph}")]
    WeightGraphMismatch { weights: usize, graph: usize },
    #[error("weight table expects {weights} inputs but {given} signals were supplied")]
    InputCountMismatch { weights: usize, given: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// A complete, self-contained simulation setup.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: Graph,
    pub gains: Gains,
    pub inputs: Vec<InputSignal>,
    pub weights: WeightConfig,
    pub x0: Array1<f64>,
    pub xi0: Array1<f64>,
    pub duration: f64,
    pub dt: f64,
    /// Record every `record_stride`-th step (the final state is always
    /// recorded).
    pub record_stride: usize,
}

impl Scenario {
    /// A scenario starting from the zero state with the default step and a
    /// stride of 1.
    pub fn new(
        graph: Graph,
        gains: Gains,
        inputs: Vec<InputSignal>,
        weights: WeightConfig,
        duration: f64,
    ) -> Self {
        let n = graph.node_count();
        Scenario {
            graph,
            gains,
            inputs,
            weights,
            x0: Array1::zeros(n),
            xi0: Array1::zeros(n),
            duration,
            dt: DEFAULT_DT,
            record_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(SimError::InvalidDuration {
                duration: self.duration,
            });
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::InvalidDt { dt: self.dt });
        }
        if self.record_stride == 0 {
            return Err(SimError::InvalidStride);
        }
        if self.x0.len() != n {
            return Err(SimError::InitialStateMismatch {
                expected: n,
                got: self.x0.len(),
            });
        }
        if self.xi0.len() != n {
            return Err(SimError::InitialStateMismatch {
                expected: n,
                got: self.xi0.len(),
            });
        }
        if self.weights.n() != n {
            return Err(SimError::WeightGraphMismatch {
                weights: self.weights.n(),
                graph: n,
            });
        }
        if self.weights.m() != self.inputs.len() {
            return Err(SimError::InputCountMismatch {
                weights: self.weights.m(),
                given: self.inputs.len(),
            });
        }
        Ok(())
    }
}

/// Recorded samples of one run, raw states plus error coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<Array1<f64>>,
    pub xi: Vec<Array1<f64>>,
    /// Weighted average of the inputs; holds its last valid value while the
    /// total weight vanishes.
    pub epsilon: Vec<f64>,
    /// False on samples where the weighted average was undefined.
    pub epsilon_valid: Vec<bool>,
    pub delta_norm: Vec<f64>,
    pub lyapunov: Vec<f64>,
    /// Ultimate bound on `||delta||^2`, if one was attached.
    pub bound: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.x.first().map_or(0, |row| row.len())
    }

    pub fn set_bound(&mut self, bound: f64) {
        self.bound = Some(bound);
    }

    /// First recorded time after which `||delta||^2` never exceeds
    /// `threshold_sq` again. Samples with an invalid weighted average are
    /// skipped. Returns the first recorded time when nothing exceeds the
    /// threshold, and `None` when the final sample still does.
    pub fn settling_time(&self, threshold_sq: f64) -> Option<f64> {
        let mut last_exceeding = None;
        for (k, (&d, &valid)) in self.delta_norm.iter().zip(&self.epsilon_valid).enumerate() {
            if valid && d * d > threshold_sq {
                last_exceeding = Some(k);
            }
        }
        match last_exceeding {
            None => self.times.first().copied(),
            Some(k) if k + 1 < self.times.len() => Some(self.times[k + 1]),
            Some(_) => None,
        }
    }

    /// True when the recorded Lyapunov values never rise by more than
    /// `slack` from one sample to the next.
    pub fn lyapunov_nonincreasing(&self, slack: f64) -> bool {
        self.lyapunov.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// Integrates a scenario with its own `dt` and stride.
pub fn integrate(scenario: &Scenario) -> Result<Trajectory> {
    let steps = ((scenario.duration / scenario.dt).round() as usize).max(1);
    integrate_with_steps(scenario, scenario.dt, steps, scenario.record_stride)
}

/// Integrates with an explicit step count, so refined runs can share the
/// exact recording grid of a coarse run (`2 * steps` at `dt / 2` with twice
/// the stride lands on the same times).
pub fn integrate_with_steps(
    scenario: &Scenario,
    dt: f64,
    steps: usize,
    record_stride: usize,
) -> Result<Trajectory> {
    scenario.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::InvalidDt { dt });
    }
    if record_stride == 0 {
        return Err(SimError::InvalidStride);
    }
    let n = scenario.graph.node_count();
    log::debug!("integrating {n} agents for {steps} steps of {dt} s");
    let laplacian = scenario.graph.laplacian();
    let l_pinv = scenario.graph.laplacian_pseudoinverse()?;
    let gains = &scenario.gains;

    let mut x = scenario.x0.clone();
    let mut xi = scenario.xi0.clone();
    let capacity = steps / record_stride + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        x: Vec::with_capacity(capacity),
        xi: Vec::with_capacity(capacity),
        epsilon: Vec::with_capacity(capacity),
        epsilon_valid: Vec::with_capacity(capacity),
        delta_norm: Vec::with_capacity(capacity),
        lyapunov: Vec::with_capacity(capacity),
        bound: None,
    };
    let mut held_epsilon = 0.0;

    for k in 0..=steps {
        let t = k as f64 * dt;
        if k % record_stride == 0 || k == steps {
            let k1_diag = scenario.weights.eval_k1_diag(t);
            let k2 = scenario.weights.eval_k2(t);
            let c = input_vector(&scenario.inputs, n, t);
            let (epsilon, valid) = match analysis::weighted_average(&k2, &c) {
                Ok(value) => {
                    held_epsilon = value;
                    (value, true)
                }
                Err(AnalysisError::NoActiveSensing { .. }) => (held_epsilon, false),
                Err(other) => return Err(other.into()),
            };
            let delta = analysis::delta(&x, epsilon);
            let e = if valid {
                let k_c = analysis::k_c(&k1_diag, &k2)?;
                analysis::integral_error(&xi, gains.alpha, &l_pinv, &k_c, &c)
            } else {
                xi.clone()
            };
            traj.times.push(t);
            traj.x.push(x.clone());
            traj.xi.push(xi.clone());
            traj.epsilon.push(epsilon);
            traj.epsilon_valid.push(valid);
            traj.delta_norm
                .push(delta.iter().map(|v| v * v).sum::<f64>().sqrt());
            traj.lyapunov.push(analysis::lyapunov(&delta, &e, gains));
        }
        if k == steps {
            break;
        }

        let t_half = t + 0.5 * dt;
        let t_full = t + dt;
        let stage = |tt: f64| {
            (
                scenario.weights.eval_k1_diag(tt),
                scenario.weights.eval_k2(tt),
                input_vector(&scenario.inputs, n, tt),
            )
        };
        let (k1d_a, k2_a, c_a) = stage(t);
        let (k1d_b, k2_b, c_b) = stage(t_half);
        let (k1d_c, k2_c, c_c) = stage(t_full);

        let (dx1, dxi1) = compact_derivative(&laplacian, gains, &k1d_a, &k2_a, &c_a, &x, &xi);
        let mut x2 = x.clone();
        x2.scaled_add(0.5 * dt, &dx1);
        let mut xi2 = xi.clone();
        xi2.scaled_add(0.5 * dt, &dxi1);
        let (dx2, dxi2) = compact_derivative(&laplacian, gains, &k1d_b, &k2_b, &c_b, &x2, &xi2);
        let mut x3 = x.clone();
        x3.scaled_add(0.5 * dt, &dx2);
        let mut xi3 = xi.clone();
        xi3.scaled_add(0.5 * dt, &dxi2);
        let (dx3, dxi3) = compact_derivative(&laplacian, gains, &k1d_b, &k2_b, &c_b, &x3, &xi3);
        let mut x4 = x.clone();
        x4.scaled_add(dt, &dx3);
        let mut xi4 = xi.clone();
        xi4.scaled_add(dt, &dxi3);
        let (dx4, dxi4) = compact_derivative(&laplacian, gains, &k1d_c, &k2_c, &c_c, &x4, &xi4);

        let sixth = dt / 6.0;
        for i in 0..n {
            x[i] += sixth * (dx1[i] + 2.0 * dx2[i] + 2.0 * dx3[i] + dx4[i]);
            xi[i] += sixth * (dxi1[i] + 2.0 * dxi2[i] + 2.0 * dxi3[i] + dxi4[i]);
        }
        let finite = x
            .iter()
            .chain(xi.iter())
            .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT);
        if !finite {
            return Err(SimError::Diverged { t: t_full });
        }
    }
    Ok(traj)
}

/// Outcome of [`convergence_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Every recorded sample in the trailing window kept all agents within
    /// tolerance of the target.
    pub converged: bool,
    /// First recorded time from which the tolerance holds through the end
    /// of the run; `None` when the final sample still violates it.
    pub first_time: Option<f64>,
}

/// Checks whether all agents stay within `tol` of `target` over the trailing
/// `window` of the run, and reports when they first got there for good.
pub fn convergence_check(
    traj: &Trajectory,
    target: f64,
    tol: f64,
    window: f64,
) -> ConvergenceReport {
    let Some(&t_end) = traj.times.last() else {
        return ConvergenceReport {
            converged: false,
            first_time: None,
        };
    };
    let within = |row: &Array1<f64>| row.iter().all(|v| (v - target).abs() <= tol);
    let cutoff = t_end - window;
    let converged = traj
        .times
        .iter()
        .zip(&traj.x)
        .filter(|(&t, _)| t >= cutoff)
        .all(|(_, row)| within(row));
    let mut last_violation = None;
    for (k, row) in traj.x.iter().enumerate() {
        if !within(row) {
            last_violation = Some(k);
        }
    }
    let first_time = match last_violation {
        None => traj.times.first().copied(),
        Some(k) if k + 1 < traj.times.len() => Some(traj.times[k + 1]),
        Some(_) => None,
    };
    ConvergenceReport {
        converged,
        first_time,
    }
}

/// Result of a step-halving audit.
#[derive(Debug, Clone, Copy)]
pub struct StepAudit {
    /// Max state difference between the `dt` and `dt/2` runs.
    pub coarse_diff: f64,
    /// Max state difference between the `dt/2` and `dt/4` runs.
    pub fine_diff: f64,
    /// `coarse_diff / fine_diff`; near 16 for a fourth-order method.
    pub ratio: f64,
}

/// Runs a scenario at `dt`, `dt/2`, and `dt/4` on aligned recording grids
/// and compares successive state differences.
pub fn halve_step_audit(scenario: &Scenario, dt: f64) -> Result<StepAudit> {
    let steps = ((scenario.duration / dt).round() as usize).max(1);
    let coarse = integrate_with_steps(scenario, dt, steps, 1)?;
    let halved = integrate_with_steps(scenario, dt / 2.0, 2 * steps, 2)?;
    let quartered = integrate_with_steps(scenario, dt / 4.0, 4 * steps, 4)?;
    let coarse_diff = max_state_diff(&coarse, &halved);
    let fine_diff = max_state_diff(&halved, &quartered);
    let ratio = if fine_diff > 0.0 {
        coarse_diff / fine_diff
    } else {
        f64::INFINITY
    };
    Ok(StepAudit {
        coarse_diff,
        fine_diff,
        ratio,
    })
}

fn max_state_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut max = 0.0f64;
    for k in 0..a.len().min(b.len()) {
        for (u, v) in a.x[k].iter().zip(b.x[k].iter()) {
            max = max.max((u - v).abs());
        }
        for (u, v) in a.xi[k].iter().zip(b.xi[k].iter()) {
            max = max.max((u - v).abs());
        }
    }
    max
}

/// Residuals of the closed-loop error dynamics along a recorded trajectory.
///
/// At sampled instants the derivative of `(delta, e)` is estimated by short
/// RK4 steps of length `h` forward and backward from the recorded state and
/// compared against the model right-hand sides
/// `delta' = -alpha (L + K1) delta + L e + s1` and
/// `e' = -gamma L delta - gamma sigma e + s2`.
#[derive(Debug, Clone, Copy)]
pub struct ErrorDynamicsReport {
    pub max_delta_residual: f64,
    pub max_e_residual: f64,
}

pub fn error_dynamics_residuals(
    scenario: &Scenario,
    traj: &Trajectory,
    sample_stride: usize,
    h: f64,
) -> Result<ErrorDynamicsReport> {
    scenario.validate()?;
    if sample_stride == 0 {
        return Err(SimError::InvalidStride);
    }
    let n = scenario.graph.node_count();
    let laplacian = scenario.graph.laplacian();
    let l_pinv = scenario.graph.laplacian_pseudoinverse()?;
    let gains = scenario.gains;
    let ctx = analysis::SignalContext {
        l_pinv: &l_pinv,
        gains,
        weights: &scenario.weights,
        inputs: &scenario.inputs,
        horizon: scenario.duration,
        h_fd: h,
    };

    let coords =
        |x: &Array1<f64>, xi: &Array1<f64>, t: f64| -> Result<analysis::ErrorCoordinates> {
            let k1_diag = scenario.weights.eval_k1_diag(t);
            let k2 = scenario.weights.eval_k2(t);
            let c = input_vector(&scenario.inputs, n, t);
            Ok(analysis::error_coordinates(
                x,
                xi,
                gains.alpha,
                &l_pinv,
                &k1_diag,
                &k2,
                &c,
            )?)
        };
    let rk4 = |x: &Array1<f64>, xi: &Array1<f64>, t: f64, step: f64| {
        let stage = |tt: f64| {
            (
                scenario.weights.eval_k1_diag(tt),
                scenario.weights.eval_k2(tt),
                input_vector(&scenario.inputs, n, tt),
            )
        };
        let (k1d_a, k2_a, c_a) = stage(t);
        let (k1d_b, k2_b, c_b) = stage(t + 0.5 * step);
        let (k1d_c, k2_c, c_c) = stage(t + step);
        let (dx1, dxi1) = compact_derivative(&laplacian, &gains, &k1d_a, &k2_a, &c_a, x, xi);
        let mut x2 = x.clone();
        x2.scaled_add(0.5 * step, &dx1);
        let mut xi2 = xi.clone();
        xi2.scaled_add(0.5 * step, &dxi1);
        let (dx2, dxi2) = compact_derivative(&laplacian, &gains, &k1d_b, &k2_b, &c_b, &x2, &xi2);
        let mut x3 = x.clone();
        x3.scaled_add(0.5 * step, &dx2);
        let mut xi3 = xi.clone();
        xi3.scaled_add(0.5 * step, &dxi2);
        let (dx3, dxi3) = compact_derivative(&laplacian, &gains, &k1d_b, &k2_b, &c_b, &x3, &xi3);
        let mut x4 = x.clone();
        x4.scaled_add(step, &dx3);
        let mut xi4 = xi.clone();
        xi4.scaled_add(step, &dxi3);
        let (dx4, dxi4) = compact_derivative(&laplacian, &gains, &k1d_c, &k2_c, &c_c, &x4, &xi4);
        let sixth = step / 6.0;
        let mut xn = x.clone();
        let mut xin = xi.clone();
        for i in 0..n {
            xn[i] += sixth * (dx1[i] + 2.0 * dx2[i] + 2.0 * dx3[i] + dx4[i]);
            xin[i] += sixth * (dxi1[i] + 2.0 * dxi2[i] + 2.0 * dxi3[i] + dxi4[i]);
        }
        (xn, xin)
    };

    let mut report = ErrorDynamicsReport {
        max_delta_residual: 0.0,
        max_e_residual: 0.0,
    };
    for k in (0..traj.len()).step_by(sample_stride) {
        let t = traj.times[k];
        if t - h < 0.0 || t + h > scenario.duration || !traj.epsilon_valid[k] {
            continue;
        }
        let x = &traj.x[k];
        let xi = &traj.xi[k];
        let here = coords(x, xi, t)?;
        let (x_fwd, xi_fwd) = rk4(x, xi, t, h);
        let (x_bwd, xi_bwd) = rk4(x, xi, t, -h);
        let fwd = coords(&x_fwd, &xi_fwd, t + h)?;
        let bwd = coords(&x_bwd, &xi_bwd, t - h)?;

        let (s1, s2) = ctx.perturbations(t)?;
        let k1_diag = scenario.weights.eval_k1_diag(t);
        let mut delta_rhs = laplacian.dot(&here.delta);
        delta_rhs += &(&k1_diag * &here.delta);
        delta_rhs *= -gains.alpha;
        delta_rhs += &laplacian.dot(&here.e);
        delta_rhs += &s1;
        let mut e_rhs = laplacian.dot(&here.delta);
        e_rhs *= -gains.gamma;
        e_rhs.scaled_add(-gains.gamma * gains.sigma, &here.e);
        e_rhs += &s2;

        for i in 0..n {
            let delta_fd = (fwd.delta[i] - bwd.delta[i]) / (2.0 * h);
            let e_fd = (fwd.e[i] - bwd.e[i]) / (2.0 * h);
            report.max_delta_residual = report
                .max_delta_residual
                .max((delta_fd - delta_rhs[i]).abs());
            report.max_e_residual = report.max_e_residual.max((e_fd - e_rhs[i]).abs());
        }
    }
    Ok(report)
}
