//! Implementations behind the `apnet` binary: resolve a scenario source,
//! run a command, and hand back a printable report. Exit codes are part of
//! the contract: 0 success, 1 failed property or analysis, 2 usage or parse
//! error, 3 numerical divergence.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::output::{self, OutputError};
use crate::scenario::{self, ScenarioError, BUILTIN_NAMES};
use crate::sim::{self, Scenario, SimError, Trajectory};
use crate::verify;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{0}")]
    Usage(String),
    #[error("{report}verification failed: {failed} of {total} properties")]
    VerifyFailed {
        report: String,
        failed: usize,
        total: usize,
    },
    #[error("bound not computable: {reason}\n{diagnostic}")]
    BoundNotComputable { reason: String, diagnostic: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(SimError::Diverged { .. }) => 3,
            CliError::VerifyFailed { .. } => 1,
            CliError::BoundNotComputable { .. } => 1,
            CliError::Analysis(
                AnalysisError::BoundUndefined { .. } | AnalysisError::DecompositionInfeasible,
            ) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Where a command gets its scenario from.
#[derive(Debug, Clone)]
pub enum ScenarioSource {
    Builtin(String),
    File(PathBuf),
}

/// Command-line overrides applied after loading.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
}

fn resolve(source: &ScenarioSource, overrides: Overrides) -> Result<(Scenario, String)> {
    let (mut sc, label) = match source {
        ScenarioSource::Builtin(name) => {
            let sc = scenario::builtin(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown builtin '{name}' (available: {})",
                    BUILTIN_NAMES.join(", ")
                ))
            })?;
            (sc, name.clone())
        }
        ScenarioSource::File(path) => (scenario::load(path)?, path.display().to_string()),
    };
    if let Some(dt) = overrides.dt {
        sc.dt = dt;
    }
    if let Some(duration) = overrides.duration {
        sc.duration = duration;
    }
    log::info!(
        "loaded scenario {label}: {} agents, {} inputs, duration {} s",
        sc.graph.node_count(),
        sc.inputs.len(),
        sc.duration
    );
    Ok((sc, label))
}

/// Threshold used for the empirical settling time: the bound when it is
/// meaningfully positive, otherwise a floor just above integrator noise.
fn settling_threshold(bound: f64) -> f64 {
    bound.max(1e-12)
}

fn settling_line(traj: &Trajectory, bound: f64) -> String {
    match traj.settling_time(settling_threshold(bound)) {
        Some(t) => format!("empirical T (||delta||^2 stays below threshold): {t:.3} s"),
        None => "empirical T: not reached within the horizon".to_string(),
    }
}

/// Integrates a scenario, optionally writes the trajectory as CSV, and
/// returns a human-readable summary.
pub fn cmd_simulate(
    source: &ScenarioSource,
    output_path: Option<&PathBuf>,
    overrides: Overrides,
) -> Result<String> {
    let (sc, label) = resolve(source, overrides)?;
    let mut traj = sim::integrate(&sc)?;
    let bound = analysis::scenario_bound(&sc);
    if let Ok(est) = &bound {
        traj.set_bound(est.bound);
    }
    if let Some(path) = output_path {
        output::save_csv(&traj, path)?;
    }

    let n = traj.node_count();
    let last = traj.len() - 1;
    let final_dev = traj.x[last]
        .iter()
        .map(|v| (v - traj.epsilon[last]).abs())
        .fold(0.0f64, f64::max);
    let mut report = String::new();
    let _ = writeln!(
        report,
        "simulate {label}: {n} agents, {} samples over {} s",
        traj.len(),
        sc.duration
    );
    let _ = writeln!(report, "final max |x_i - epsilon|: {final_dev:.6e}");
    match &bound {
        Ok(est) => {
            let _ = writeln!(report, "bound on ||delta||^2: {:.6e}", est.bound);
            let _ = writeln!(report, "{}", settling_line(&traj, est.bound));
        }
        Err(e) => {
            let _ = writeln!(report, "bound unavailable: {e}");
        }
    }
    if let Some(path) = output_path {
        let _ = writeln!(report, "wrote {}", path.display());
    }
    Ok(report)
}

/// Evaluates the ultimate bound for a scenario, integrates it for the
/// empirical comparison, and optionally writes the trajectory (with the
/// bound column filled) as CSV.
pub fn cmd_bound(
    source: &ScenarioSource,
    output_path: Option<&PathBuf>,
    overrides: Overrides,
) -> Result<String> {
    let (sc, label) = resolve(source, overrides)?;
    let est = match analysis::scenario_bound(&sc) {
        Ok(est) => est,
        Err(AnalysisError::DecompositionInfeasible) => {
            let samples = 101;
            let times: Vec<f64> = (0..samples)
                .map(|k| sc.duration * k as f64 / (samples - 1) as f64)
                .collect();
            let profile = analysis::min_eig_profile(&sc.graph, &sc.weights, &times)?;
            let min = profile.iter().copied().fold(f64::INFINITY, f64::min);
            let max = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return Err(CliError::BoundNotComputable {
                reason: AnalysisError::DecompositionInfeasible.to_string(),
                diagnostic: format!(
                    "lambda_min(L + K1(t)) sampled over the horizon: min {min:.6e}, max {max:.6e}"
                ),
            });
        }
        Err(e) => return Err(e.into()),
    };

    let mut traj = sim::integrate(&sc)?;
    traj.set_bound(est.bound);
    if let Some(path) = output_path {
        output::save_csv(&traj, path)?;
    }

    let threshold = settling_threshold(est.bound);
    let settle = traj.settling_time(threshold);
    let sup_after: Option<f64> = settle.map(|t_settle| {
        traj.times
            .iter()
            .zip(&traj.delta_norm)
            .filter(|(&t, _)| t >= t_settle)
            .map(|(_, d)| d * d)
            .fold(0.0f64, f64::max)
    });

    let mut report = String::new();
    let _ = writeln!(report, "bound {label}:");
    let _ = writeln!(report, "eps_dot*: {:.6e}", est.eps_dot_star);
    let _ = writeln!(report, "p1*: {:.6e}", est.p1_star);
    let _ = writeln!(report, "p2*: {:.6e}", est.p2_star);
    let _ = writeln!(report, "lambda_min(F): {:.6e}", est.lambda_min_f);
    let _ = writeln!(report, "bound on ||delta||^2: {:.6e}", est.bound);
    match settle {
        Some(t) => {
            let _ = writeln!(report, "empirical T: {t:.3} s");
            let _ = writeln!(
                report,
                "max ||delta(t)||^2 for t >= T: {:.6e}",
                sup_after.unwrap_or(0.0)
            );
        }
        None => {
            let _ = writeln!(report, "empirical T: not reached within the horizon");
        }
    }
    if let Some(path) = output_path {
        let _ = writeln!(report, "wrote {}", path.display());
    }
    Ok(report)
}

/// Runs the randomized property suite; any failing property is an error so
/// the process exits nonzero.
pub fn cmd_verify(trials: usize, seed: u64) -> Result<String> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".to_string()));
    }
    let report = verify::run(trials, seed);
    let text = format!("{report}");
    if report.all_passed() {
        Ok(text)
    } else {
        let failed = report.properties.iter().filter(|p| !p.passed()).count();
        Err(CliError::VerifyFailed {
            report: text,
            failed,
            total: report.properties.len(),
        })
    }
}
