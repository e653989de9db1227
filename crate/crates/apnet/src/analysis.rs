//! Error coordinates and the ultimate-bound machinery.
//!
//! The network tracks the weighted average of the sensed inputs,
//!
//! ```text
//! eps(t) = 1^T K2(t) c(t) / (1^T K2(t) 1),
//! ```
//!
//! so the quantities of interest are the tracking error `delta = x - eps 1`,
//! the integral-state error `e = xi - alpha L^+ K_c c` with
//! `K_c = L_c K2` and `L_c = K1 1 1^T / (1^T K2 1) - I`, and the Lyapunov
//! function `V = delta^T delta / (2 alpha) + e^T e / (2 alpha gamma)`.
//!
//! In these coordinates the closed loop is a damped linear system driven by
//! two perturbations: `s1 = -eps' 1` and
//! `s2 = -alpha gamma sigma L^+ K_c c - alpha L^+ K_c' c - alpha L^+ K_c c'`.
//! Bounding the perturbations by `|eps'| <= eps_dot_star`,
//! `||L^+ K_c c|| <= p1_star`, and `||L^+ (K_c' c + K_c c')|| <= p2_star`
//! yields the ultimate bound
//!
//! ```text
//! ||delta||^2 <= n^2 eps_dot_star^2 / (alpha^2 lambda_min^2(F))
//!              + (alpha^2 / gamma) [ p1*^2 + 2 p1* p2* / (gamma sigma)
//!                                    + p2*^2 / (gamma^2 sigma^2) ]
//! ```
//!
//! with `F = L + K0` from the positive-infimum decomposition
//! `K1(t) = K0 + K_tilde(t)`. Derivatives of the exogenous signals are taken
//! with second-order finite differences, falling back to one-sided stencils
//! at the ends of the horizon.

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::graph::{self, Graph, GraphError};
use crate::network::{input_vector, Gains, WeightConfig};
use crate::signal::InputSignal;

/// Below this total weight the network has effectively no active sensing and
/// the weighted average is undefined.
pub const EPSILON_DENOM_TOL: f64 = 1e-12;

/// Sampled time variation below this level is treated as exactly constant
/// when deciding whether a sigma = 0 scenario admits the asymptotic bound.
pub const SIGMA_ZERO_TOL: f64 = 1e-9;

/// Tolerance for the constancy preconditions of the two corollary cases.
pub const CONSTANCY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no active sensing: total weight {denominator:.3e} below {EPSILON_DENOM_TOL:.0e}")]
    NoActiveSensing { denominator: f64 },
    #[error("decomposition infeasible: no agent keeps a positive total weight over the horizon")]
    DecompositionInfeasible,
    #[error(
        "bound undefined for sigma = 0 with persistent perturbations \
         (eps_dot* = {eps_dot_star:.3e}, p1* = {p1_star:.3e}, p2* = {p2_star:.3e})"
    )]
    BoundUndefined {
        eps_dot_star: f64,
        p1_star: f64,
        p2_star: f64,
    },
    #[error("{what} must be constant for this corollary case (max drift {drift:.3e})")]
    ConstancyViolated { what: &'static str, drift: f64 },
    #[error("lambda_min(F) = {lambda:.3e} is not positive")]
    NotPositiveDefinite { lambda: f64 },
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("decomposition needs at least one sample")]
    NoSamples,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// The instantaneous weighted average of the sensed inputs,
/// `1^T K2 c / (1^T K2 1)`.
pub fn weighted_average(k2: &Array2<f64>, c: &Array1<f64>) -> Result<f64> {
    let n = k2.nrows();
    if c.len() != n {
        return Err(AnalysisError::DimensionMismatch {
            expected: n,
            got: c.len(),
        });
    }
    let denominator: f64 = k2.iter().sum();
    if denominator < EPSILON_DENOM_TOL {
        return Err(AnalysisError::NoActiveSensing { denominator });
    }
    let numerator = k2.dot(c).sum();
    Ok(numerator / denominator)
}

/// Consensus error `delta = x - eps 1`.
pub fn delta(x: &Array1<f64>, epsilon: f64) -> Array1<f64> {
    x.mapv(|v| v - epsilon)
}

/// The averaging operator `L_c = K1 1 1^T / (1^T K2 1) - I`; its columns sum
/// to zero because the diagonal of `K1` holds the row sums of `K2`.
pub fn l_c(k1_diag: &Array1<f64>, k2: &Array2<f64>) -> Result<Array2<f64>> {
    let n = k1_diag.len();
    if k2.nrows() != n || k2.ncols() != n {
        return Err(AnalysisError::DimensionMismatch {
            expected: n,
            got: k2.nrows(),
        });
    }
    let denominator: f64 = k2.iter().sum();
    if denominator < EPSILON_DENOM_TOL {
        return Err(AnalysisError::NoActiveSensing { denominator });
    }
    let mut m = Array2::from_shape_fn((n, n), |(i, _)| k1_diag[i] / denominator);
    for i in 0..n {
        m[[i, i]] -= 1.0;
    }
    Ok(m)
}

/// The input-to-error coupling `K_c = L_c K2`.
pub fn k_c(k1_diag: &Array1<f64>, k2: &Array2<f64>) -> Result<Array2<f64>> {
    Ok(l_c(k1_diag, k2)?.dot(k2))
}

/// Integral-state error `e = xi - alpha L^+ K_c c`.
pub fn integral_error(
    xi: &Array1<f64>,
    alpha: f64,
    l_pinv: &Array2<f64>,
    k_c: &Array2<f64>,
    c: &Array1<f64>,
) -> Array1<f64> {
    let mut e = xi.clone();
    e.scaled_add(-alpha, &l_pinv.dot(&k_c.dot(c)));
    e
}

/// The full error-coordinate triple at one instant.
#[derive(Debug, Clone)]
pub struct ErrorCoordinates {
    pub epsilon: f64,
    pub delta: Array1<f64>,
    pub e: Array1<f64>,
}

/// Assembles `eps`, `delta`, and `e` from raw states and the evaluated
/// weight/input data.
pub fn error_coordinates(
    x: &Array1<f64>,
    xi: &Array1<f64>,
    alpha: f64,
    l_pinv: &Array2<f64>,
    k1_diag: &Array1<f64>,
    k2: &Array2<f64>,
    c: &Array1<f64>,
) -> Result<ErrorCoordinates> {
    let epsilon = weighted_average(k2, c)?;
    let kc = k_c(k1_diag, k2)?;
    Ok(ErrorCoordinates {
        epsilon,
        delta: delta(x, epsilon),
        e: integral_error(xi, alpha, l_pinv, &kc, c),
    })
}

/// `V = delta^T delta / (2 alpha) + e^T e / (2 alpha gamma)`.
pub fn lyapunov(delta: &Array1<f64>, e: &Array1<f64>, gains: &Gains) -> f64 {
    let d2: f64 = delta.iter().map(|v| v * v).sum();
    let e2: f64 = e.iter().map(|v| v * v).sum();
    d2 / (2.0 * gains.alpha) + e2 / (2.0 * gains.alpha * gains.gamma)
}

/// The constant part of the splitting `K1(t) = K0 + K_tilde(t)`: a single
/// diagonal entry `phi` at `index`, chosen so that `K_tilde(t)` stays
/// entrywise nonnegative over the sampled horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub k0: Array1<f64>,
    pub phi: f64,
    pub index: usize,
}

impl Decomposition {
    /// The time-varying remainder at one sample.
    pub fn k_tilde(&self, k1_diag: &Array1<f64>) -> Array1<f64> {
        let mut k = k1_diag.clone();
        k[self.index] -= self.phi;
        k
    }
}

/// Picks the agent whose total weight keeps the largest positive infimum
/// over the sampled horizon (ties broken toward the lowest index) and splits
/// `K1` there.
pub fn decompose_k1(k1_samples: &[Array1<f64>]) -> Result<Decomposition> {
    let first = k1_samples.first().ok_or(AnalysisError::NoSamples)?;
    let n = first.len();
    let mut infima = first.clone();
    for sample in &k1_samples[1..] {
        if sample.len() != n {
            return Err(AnalysisError::DimensionMismatch {
                expected: n,
                got: sample.len(),
            });
        }
        for i in 0..n {
            if sample[i] < infima[i] {
                infima[i] = sample[i];
            }
        }
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, &inf) in infima.iter().enumerate() {
        if inf > 0.0 && best.is_none_or(|(_, phi)| inf > phi) {
            best = Some((i, inf));
        }
    }
    let (index, phi) = best.ok_or(AnalysisError::DecompositionInfeasible)?;
    let mut k0 = Array1::zeros(n);
    k0[index] = phi;
    Ok(Decomposition { k0, phi, index })
}

/// Supremum magnitudes of the perturbation ingredients over a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerturbationSuprema {
    /// `sup |eps'(t)|`.
    pub eps_dot_star: f64,
    /// `sup ||L^+ K_c(t) c(t)||_2`.
    pub p1_star: f64,
    /// `sup ||L^+ (K_c'(t) c(t) + K_c(t) c'(t))||_2`.
    pub p2_star: f64,
}

/// The evaluated ultimate bound together with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEstimate {
    pub eps_dot_star: f64,
    pub p1_star: f64,
    pub p2_star: f64,
    /// `lambda_min(L + K0)`, positive whenever the decomposition succeeded.
    pub lambda_min_f: f64,
    /// `sup ||s1|| = sqrt(n) eps_dot_star`.
    pub s1_star: f64,
    /// `sup ||s2|| <= alpha gamma sigma p1* + alpha p2*`.
    pub s2_star: f64,
    /// The ultimate bound on `||delta||^2`.
    pub bound: f64,
}

/// Evaluates the ultimate bound for the given graph, gains, decomposition,
/// and perturbation suprema.
///
/// With `sigma = 0` the second bracket divides by zero, so the bound exists
/// only when the perturbations vanish; nonzero `p1*`/`p2*` then produce
/// [`AnalysisError::BoundUndefined`].
pub fn ultimate_bound(
    graph: &Graph,
    gains: &Gains,
    decomposition: &Decomposition,
    suprema: &PerturbationSuprema,
) -> Result<BoundEstimate> {
    let n = graph.node_count();
    if decomposition.k0.len() != n {
        return Err(AnalysisError::DimensionMismatch {
            expected: n,
            got: decomposition.k0.len(),
        });
    }
    let lambda_min_f = graph::f_matrix_min_eig(&graph.laplacian(), &decomposition.k0)?;
    if lambda_min_f <= 0.0 {
        return Err(AnalysisError::NotPositiveDefinite {
            lambda: lambda_min_f,
        });
    }
    let PerturbationSuprema {
        eps_dot_star,
        p1_star,
        p2_star,
    } = *suprema;
    let nf = n as f64;
    let first = nf * nf * eps_dot_star * eps_dot_star
        / (gains.alpha * gains.alpha * lambda_min_f * lambda_min_f);
    let second = if gains.sigma > 0.0 {
        let gs = gains.gamma * gains.sigma;
        (gains.alpha * gains.alpha / gains.gamma)
            * (p1_star * p1_star + 2.0 * p1_star * p2_star / gs + p2_star * p2_star / (gs * gs))
    } else if p1_star > 0.0 || p2_star > 0.0 {
        return Err(AnalysisError::BoundUndefined {
            eps_dot_star,
            p1_star,
            p2_star,
        });
    } else {
        0.0
    };
    Ok(BoundEstimate {
        eps_dot_star,
        p1_star,
        p2_star,
        lambda_min_f,
        s1_star: nf.sqrt() * eps_dot_star,
        s2_star: gains.alpha * gains.gamma * gains.sigma * p1_star + gains.alpha * p2_star,
        bound: first + second,
    })
}

/// Read-only view of the exogenous data of a scenario (weights, inputs,
/// Laplacian pseudoinverse) with finite-difference derivatives over a fixed
/// horizon. All quantities here depend only on time, never on the network
/// state.
#[derive(Debug, Clone, Copy)]
pub struct SignalContext<'a> {
    pub l_pinv: &'a Array2<f64>,
    pub gains: Gains,
    pub weights: &'a WeightConfig,
    pub inputs: &'a [InputSignal],
    /// End of the time horizon; stencils never sample outside `[0, horizon]`.
    pub horizon: f64,
    /// Finite-difference step.
    pub h_fd: f64,
}

impl<'a> SignalContext<'a> {
    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn c(&self, t: f64) -> Array1<f64> {
        input_vector(self.inputs, self.n(), t)
    }

    pub fn k2(&self, t: f64) -> Array2<f64> {
        self.weights.eval_k2(t)
    }

    pub fn k1_diag(&self, t: f64) -> Array1<f64> {
        self.weights.eval_k1_diag(t)
    }

    pub fn epsilon(&self, t: f64) -> Result<f64> {
        weighted_average(&self.k2(t), &self.c(t))
    }

    pub fn k_c(&self, t: f64) -> Result<Array2<f64>> {
        k_c(&self.k1_diag(t), &self.k2(t))
    }

    /// `eps'(t)` by finite differences.
    pub fn eps_dot(&self, t: f64) -> Result<f64> {
        let (offsets, coefs) = self.stencil(t);
        let mut acc = 0.0;
        for (&dt, &w) in offsets.iter().zip(&coefs) {
            if w != 0.0 {
                acc += w * self.epsilon(t + dt)?;
            }
        }
        Ok(acc)
    }

    /// `c'(t)` by finite differences.
    pub fn c_dot(&self, t: f64) -> Array1<f64> {
        let (offsets, coefs) = self.stencil(t);
        let mut acc = Array1::zeros(self.n());
        for (&dt, &w) in offsets.iter().zip(&coefs) {
            if w != 0.0 {
                acc.scaled_add(w, &self.c(t + dt));
            }
        }
        acc
    }

    /// `K2'(t)` by finite differences.
    pub fn k2_dot(&self, t: f64) -> Array2<f64> {
        let n = self.n();
        let (offsets, coefs) = self.stencil(t);
        let mut acc = Array2::zeros((n, n));
        for (&dt, &w) in offsets.iter().zip(&coefs) {
            if w != 0.0 {
                acc.scaled_add(w, &self.k2(t + dt));
            }
        }
        acc
    }

    /// `K_c'(t)` by finite differences.
    pub fn k_c_dot(&self, t: f64) -> Result<Array2<f64>> {
        let n = self.n();
        let (offsets, coefs) = self.stencil(t);
        let mut acc = Array2::zeros((n, n));
        for (&dt, &w) in offsets.iter().zip(&coefs) {
            if w != 0.0 {
                acc.scaled_add(w, &self.k_c(t + dt)?);
            }
        }
        Ok(acc)
    }

    /// The consensus-error perturbation `s1(t) = -eps'(t) 1`.
    pub fn s1(&self, t: f64) -> Result<Array1<f64>> {
        let rate = self.eps_dot(t)?;
        Ok(Array1::from_elem(self.n(), -rate))
    }

    /// The integral-error perturbation
    /// `s2 = -alpha gamma sigma L^+ K_c c - alpha L^+ (K_c' c + K_c c')`.
    pub fn s2(&self, t: f64) -> Result<Array1<f64>> {
        let kc = self.k_c(t)?;
        let c = self.c(t);
        let mut inner = self.k_c_dot(t)?.dot(&c);
        inner += &kc.dot(&self.c_dot(t));
        let mut s2 = self.l_pinv.dot(&kc.dot(&c));
        s2 *= -self.gains.alpha * self.gains.gamma * self.gains.sigma;
        s2.scaled_add(-self.gains.alpha, &self.l_pinv.dot(&inner));
        Ok(s2)
    }

    /// Both perturbations at `t`.
    pub fn perturbations(&self, t: f64) -> Result<(Array1<f64>, Array1<f64>)> {
        Ok((self.s1(t)?, self.s2(t)?))
    }

    /// Central stencil in the interior, second-order one-sided stencils at
    /// the ends of the horizon.
    fn stencil(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        let h = self.h_fd;
        if t - h < 0.0 {
            ([0.0, h, 2.0 * h], [-1.5 / h, 2.0 / h, -0.5 / h])
        } else if t + h > self.horizon {
            ([0.0, -h, -2.0 * h], [1.5 / h, -2.0 / h, 0.5 / h])
        } else {
            ([-h, h, 0.0], [-0.5 / h, 0.5 / h, 0.0])
        }
    }
}

/// Which constancy assumption a corollary-style closed form relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorollaryCase {
    /// Constant weights, time-varying inputs.
    ConstantWeights,
    /// Constant inputs, time-varying weights.
    ConstantInputs,
}

/// Closed-form perturbation suprema for the two corollary regimes, with the
/// supremum norms estimated by dense sampling at `sample_dt`.
pub fn corollary_suprema(
    case: CorollaryCase,
    ctx: &SignalContext,
    sample_dt: f64,
) -> Result<PerturbationSuprema> {
    let times = sample_grid(ctx.horizon, sample_dt);
    match case {
        CorollaryCase::ConstantWeights => {
            let k2_0 = ctx.k2(0.0);
            let mut drift = 0.0f64;
            for &t in &times {
                let k2 = ctx.k2(t);
                for (a, b) in k2.iter().zip(k2_0.iter()) {
                    drift = drift.max((a - b).abs());
                }
            }
            if drift > CONSTANCY_TOL {
                return Err(AnalysisError::ConstancyViolated {
                    what: "weights",
                    drift,
                });
            }
            let denominator: f64 = k2_0.iter().sum();
            if denominator < EPSILON_DENOM_TOL {
                return Err(AnalysisError::NoActiveSensing { denominator });
            }
            let column_sums = k2_0.sum_axis(ndarray::Axis(0));
            let row_norm = column_sums.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut c_star = 0.0f64;
            let mut c_dot_star = 0.0f64;
            for &t in &times {
                c_star = c_star.max(norm2(&ctx.c(t)));
                c_dot_star = c_dot_star.max(norm2(&ctx.c_dot(t)));
            }
            let lk = ctx.l_pinv.dot(&ctx.k_c(0.0)?);
            let lk_fro = frobenius(&lk);
            Ok(PerturbationSuprema {
                eps_dot_star: c_dot_star * row_norm / denominator,
                p1_star: c_star * lk_fro,
                p2_star: c_dot_star * lk_fro,
            })
        }
        CorollaryCase::ConstantInputs => {
            let c0 = ctx.c(0.0);
            let mut drift = 0.0f64;
            for &t in &times {
                let c = ctx.c(t);
                for (a, b) in c.iter().zip(c0.iter()) {
                    drift = drift.max((a - b).abs());
                }
            }
            if drift > CONSTANCY_TOL {
                return Err(AnalysisError::ConstancyViolated {
                    what: "inputs",
                    drift,
                });
            }
            let c_norm = norm2(&c0);
            let mut eps_dot_star = 0.0f64;
            let mut k_c_star = 0.0f64;
            let mut k_c_dot_star = 0.0f64;
            for &t in &times {
                let k2 = ctx.k2(t);
                let k2_dot = ctx.k2_dot(t);
                let denominator: f64 = k2.iter().sum();
                if denominator < EPSILON_DENOM_TOL {
                    return Err(AnalysisError::NoActiveSensing { denominator });
                }
                // Quotient rule for eps = (1^T K2 c) / (1^T K2 1).
                let num_dot: f64 = k2_dot.dot(&c0).sum();
                let num: f64 = k2.dot(&c0).sum();
                let den_dot: f64 = k2_dot.iter().sum();
                let rate = (num_dot * denominator - num * den_dot) / (denominator * denominator);
                eps_dot_star = eps_dot_star.max(rate.abs());
                k_c_star = k_c_star.max(frobenius(&k2));
                k_c_dot_star = k_c_dot_star.max(frobenius(&k2_dot));
            }
            let l_fro = frobenius(ctx.l_pinv);
            Ok(PerturbationSuprema {
                eps_dot_star,
                p1_star: l_fro * c_norm * k_c_star,
                p2_star: l_fro * c_norm * k_c_dot_star,
            })
        }
    }
}

/// Generic perturbation suprema by dense sampling, with no constancy
/// assumptions. This is what the bound pipeline uses for arbitrary
/// scenarios.
pub fn sampled_suprema(ctx: &SignalContext, sample_dt: f64) -> Result<PerturbationSuprema> {
    let mut sup = PerturbationSuprema::default();
    for &t in &sample_grid(ctx.horizon, sample_dt) {
        sup.eps_dot_star = sup.eps_dot_star.max(ctx.eps_dot(t)?.abs());
        let kc = ctx.k_c(t)?;
        let c = ctx.c(t);
        sup.p1_star = sup.p1_star.max(norm2(&ctx.l_pinv.dot(&kc.dot(&c))));
        let mut inner = ctx.k_c_dot(t)?.dot(&c);
        inner += &kc.dot(&ctx.c_dot(t));
        sup.p2_star = sup.p2_star.max(norm2(&ctx.l_pinv.dot(&inner)));
    }
    Ok(sup)
}

/// Per-sample smallest eigenvalue of `L + K1(t)`.
///
/// When no constant decomposition of `K1` exists this profile is the useful
/// diagnostic: it shows how much regularization the time-varying weights
/// actually provide at each instant.
pub fn min_eig_profile(graph: &Graph, weights: &WeightConfig, times: &[f64]) -> Result<Vec<f64>> {
    let laplacian = graph.laplacian();
    times
        .iter()
        .map(|&t| {
            Ok(graph::f_matrix_min_eig(
                &laplacian,
                &weights.eval_k1_diag(t),
            )?)
        })
        .collect()
}

/// End-to-end bound evaluation for a scenario: sample the weight schedule,
/// decompose `K1`, take the sampled perturbation suprema, and evaluate the
/// bound.
///
/// With `sigma = 0` the bound only exists in the asymptotic regime, so the
/// sampled suprema are checked against [`SIGMA_ZERO_TOL`]: effectively
/// constant data snaps to the exact zero bound, anything else is an error.
pub fn scenario_bound(scenario: &crate::sim::Scenario) -> Result<BoundEstimate> {
    let l_pinv = scenario.graph.laplacian_pseudoinverse()?;
    let ctx = SignalContext {
        l_pinv: &l_pinv,
        gains: scenario.gains,
        weights: &scenario.weights,
        inputs: &scenario.inputs,
        horizon: scenario.duration,
        h_fd: scenario.dt / 10.0,
    };
    let k1_samples: Vec<Array1<f64>> = sample_grid(scenario.duration, scenario.dt)
        .iter()
        .map(|&t| ctx.k1_diag(t))
        .collect();
    let decomposition = decompose_k1(&k1_samples)?;
    let mut suprema = sampled_suprema(&ctx, scenario.dt)?;
    if scenario.gains.sigma == 0.0 {
        if suprema.eps_dot_star <= SIGMA_ZERO_TOL && suprema.p2_star <= SIGMA_ZERO_TOL {
            suprema = PerturbationSuprema::default();
        } else {
            return Err(AnalysisError::BoundUndefined {
                eps_dot_star: suprema.eps_dot_star,
                p1_star: suprema.p1_star,
                p2_star: suprema.p2_star,
            });
        }
    }
    ultimate_bound(&scenario.graph, &scenario.gains, &decomposition, &suprema)
}

fn sample_grid(horizon: f64, dt: f64) -> Vec<f64> {
    let steps = (horizon / dt).round().max(1.0) as usize;
    (0..=steps).map(|k| (k as f64 * dt).min(horizon)).collect()
}

fn norm2(v: &Array1<f64>) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}
