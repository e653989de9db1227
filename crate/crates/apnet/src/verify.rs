//! Randomized property checks over random connected graphs and weight
//! configurations.
//!
//! Each property draws its own deterministic random stream from the caller's
//! seed, so a report is exactly reproducible from `(trials, seed)`. The
//! checks cover the spectral facts the analysis relies on (the Laplacian's
//! structural zero, the pseudoinverse projector identity, positivity of the
//! regularized Laplacian), agreement of the two derivative forms, the
//! consistency of the weight matrices, and the range of weight signals.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{self, Graph};
use crate::network::{
    derivative_agent_form, derivative_compact_form, input_vector, Gains, NetworkState,
    WeightConfig, WeightEntry,
};
use crate::signal::{InputSignal, RangeProfile, TargetPath, WeightSignal};

/// Outcome of one property over all trials.
#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Description of the first failure, when any occurred.
    pub first_failure: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Results of a full verification run.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub trials: usize,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed())
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "verify: {} trials, seed {}", self.trials, self.seed)?;
        for p in &self.properties {
            if p.passed() {
                writeln!(f, "  PASS  {} ({} trials)", p.name, p.trials)?;
            } else {
                writeln!(
                    f,
                    "  FAIL  {} ({}/{} trials failed)",
                    p.name, p.failures, p.trials
                )?;
                if let Some(detail) = &p.first_failure {
                    writeln!(f, "        first failure: {detail}")?;
                }
            }
        }
        Ok(())
    }
}

/// Runs every property for `trials` trials with a deterministic stream per
/// property.
pub fn run(trials: usize, seed: u64) -> VerifyReport {
    let properties = vec![
        check_property("laplacian-spectrum", trials, seed, 1, laplacian_spectrum),
        check_property(
            "pseudoinverse-projector",
            trials,
            seed,
            2,
            pseudoinverse_projector,
        ),
        check_property(
            "regularized-positivity",
            trials,
            seed,
            3,
            regularized_positivity,
        ),
        check_property("form-equivalence", trials, seed, 4, form_equivalence),
        check_property("weight-consistency", trials, seed, 5, weight_consistency),
        check_property("weight-range", trials, seed, 6, weight_range),
    ];
    VerifyReport {
        trials,
        seed,
        properties,
    }
}

fn check_property(
    name: &'static str,
    trials: usize,
    seed: u64,
    stream: u64,
    check: fn(&mut ChaCha8Rng) -> Result<(), String>,
) -> PropertyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut failures = 0;
    let mut first_failure = None;
    for trial in 0..trials {
        if let Err(message) = check(&mut rng) {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(format!("trial {trial}: {message}"));
            }
        }
    }
    PropertyResult {
        name,
        trials,
        failures,
        first_failure,
    }
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(2..=12);
    let p = rng.gen_range(0.0..0.5);
    Graph::random_connected(n, p, rng).expect("random connected graph")
}

fn random_weight_signal(rng: &mut ChaCha8Rng) -> WeightSignal {
    match rng.gen_range(0..3) {
        0 => WeightSignal::Constant {
            value: rng.gen_range(0.0..=1.0),
        },
        1 => {
            let count = rng.gen_range(2..=5);
            let mut t = 0.0;
            let points = (0..count)
                .map(|_| {
                    t += rng.gen_range(0.1..2.0);
                    [t, rng.gen_range(0.0..=1.0)]
                })
                .collect();
            WeightSignal::PiecewiseLinear { points }
        }
        _ => WeightSignal::DistanceBased {
            position: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            target: TargetPath::Circle {
                center: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                radius: rng.gen_range(0.5..2.0),
                period: rng.gen_range(5.0..30.0),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            },
            radius: rng.gen_range(0.5..3.0),
            profile: if rng.gen_bool(0.5) {
                RangeProfile::Linear
            } else {
                RangeProfile::Indicator
            },
        },
    }
}

fn random_input_signal(rng: &mut ChaCha8Rng) -> InputSignal {
    match rng.gen_range(0..3) {
        0 => InputSignal::Constant {
            value: rng.gen_range(-3.0..3.0),
        },
        1 => InputSignal::Sinusoid {
            amplitude: rng.gen_range(0.1..2.0),
            frequency: rng.gen_range(0.2..3.0),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
            offset: rng.gen_range(-1.0..1.0),
        },
        _ => {
            let count = rng.gen_range(2..=5);
            let mut t = 0.0;
            let points = (0..count)
                .map(|_| {
                    t += rng.gen_range(0.1..2.0);
                    [t, rng.gen_range(-2.0..2.0)]
                })
                .collect();
            InputSignal::PiecewiseLinear { points }
        }
    }
}

fn random_weight_config(rng: &mut ChaCha8Rng, n: usize) -> WeightConfig {
    let m = rng.gen_range(1..=n);
    let mut entries = Vec::new();
    for agent in 0..n {
        for input in 0..m {
            if rng.gen_bool(0.4) {
                entries.push(WeightEntry {
                    agent,
                    input,
                    signal: random_weight_signal(rng),
                });
            }
        }
    }
    if entries.is_empty() {
        entries.push(WeightEntry {
            agent: rng.gen_range(0..n),
            input: rng.gen_range(0..m),
            signal: WeightSignal::Constant {
                value: rng.gen_range(0.1..=1.0),
            },
        });
    }
    WeightConfig::new(n, m, entries).expect("generated weight config is valid")
}

fn laplacian_spectrum(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = random_graph(rng);
    let l = g.laplacian();
    let spectral = graph::spectrum(&l).map_err(|e| e.to_string())?;
    let lambda1 = spectral.eigenvalues[0];
    if lambda1.abs() > 1e-10 {
        return Err(format!("lambda_1 = {lambda1:.3e} not zero"));
    }
    let lambda2 = spectral.eigenvalues[1];
    if lambda2 <= 1e-10 {
        return Err(format!(
            "lambda_2 = {lambda2:.3e} not positive on a connected graph"
        ));
    }
    let ones = Array1::ones(g.node_count());
    let residual = l.dot(&ones).iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    if residual > 1e-12 {
        return Err(format!("L 1 has residual {residual:.3e}"));
    }
    Ok(())
}

fn pseudoinverse_projector(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = random_graph(rng);
    let n = g.node_count();
    let l = g.laplacian();
    let l_pinv = g.laplacian_pseudoinverse().map_err(|e| e.to_string())?;
    let product = l.dot(&l_pinv);
    let nf = n as f64;
    let mut max_err = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { 1.0 - 1.0 / nf } else { -1.0 / nf };
            max_err = max_err.max((product[[i, j]] - expected).abs());
        }
    }
    if max_err > 1e-8 {
        return Err(format!("projector residual {max_err:.3e}"));
    }
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (l_pinv[[i, j]] - l_pinv[[j, i]]).abs())
        .fold(0.0f64, f64::max);
    if asym > 1e-10 {
        return Err(format!("pseudoinverse asymmetry {asym:.3e}"));
    }
    Ok(())
}

fn regularized_positivity(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = random_graph(rng);
    let n = g.node_count();
    let mut k = Array1::zeros(n);
    for v in k.iter_mut() {
        if rng.gen_bool(0.5) {
            *v = rng.gen_range(0.0..2.0);
        }
    }
    k[rng.gen_range(0..n)] = rng.gen_range(0.05..2.0);
    let lambda = graph::f_matrix_min_eig(&g.laplacian(), &k).map_err(|e| e.to_string())?;
    if lambda <= 0.0 {
        return Err(format!("lambda_min(L + K) = {lambda:.3e} not positive"));
    }
    Ok(())
}

fn form_equivalence(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = random_graph(rng);
    let n = g.node_count();
    let gains = Gains::new(
        rng.gen_range(0.5..10.0),
        rng.gen_range(0.5..10.0),
        if rng.gen_bool(0.5) {
            0.0
        } else {
            rng.gen_range(0.01..1.0)
        },
    )
    .expect("generated gains are valid");
    let weights = random_weight_config(rng, n);
    let inputs: Vec<InputSignal> = (0..weights.m()).map(|_| random_input_signal(rng)).collect();
    let state = NetworkState {
        x: Array1::from_shape_fn(n, |_| rng.gen_range(-5.0..5.0)),
        xi: Array1::from_shape_fn(n, |_| rng.gen_range(-5.0..5.0)),
        t: rng.gen_range(0.0..20.0),
    };
    let c = input_vector(&inputs, n, state.t);
    let (ax, axi) =
        derivative_agent_form(&g, &gains, &weights, &inputs, &state).map_err(|e| e.to_string())?;
    let (cx, cxi) =
        derivative_compact_form(&g, &gains, &weights, &c, &state).map_err(|e| e.to_string())?;
    let mut max_err = 0.0f64;
    for i in 0..n {
        max_err = max_err.max((ax[i] - cx[i]).abs());
        max_err = max_err.max((axi[i] - cxi[i]).abs());
    }
    if max_err > 1e-12 {
        return Err(format!("forms disagree by {max_err:.3e}"));
    }
    Ok(())
}

fn weight_consistency(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = random_graph(rng);
    let n = g.node_count();
    let weights = random_weight_config(rng, n);
    let t = rng.gen_range(0.0..20.0);
    let k2 = weights.eval_k2(t);
    let k1 = weights.eval_k1_diag(t);
    for i in 0..n {
        let row_sum: f64 = (0..n).map(|h| k2[[i, h]]).sum();
        if (k1[i] - row_sum).abs() > 1e-14 {
            return Err(format!("K1[{i}] = {} but row sum is {row_sum}", k1[i]));
        }
    }
    let total: f64 = k2.iter().sum();
    if total > crate::analysis::EPSILON_DENOM_TOL {
        let lc = crate::analysis::l_c(&k1, &k2).map_err(|e| e.to_string())?;
        for j in 0..n {
            let col_sum: f64 = (0..n).map(|i| lc[[i, j]]).sum();
            if col_sum.abs() > 1e-12 {
                return Err(format!("L_c column {j} sums to {col_sum:.3e}"));
            }
        }
    }
    Ok(())
}

fn weight_range(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let signal = random_weight_signal(rng);
    signal.validate().map_err(|e| e.to_string())?;
    for _ in 0..50 {
        let t = rng.gen_range(0.0..40.0);
        let w = signal.value(t);
        if !(0.0..=1.0).contains(&w) {
            return Err(format!("weight {w} at t = {t} outside [0, 1]"));
        }
    }
    Ok(())
}
