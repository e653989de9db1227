//! Time signals driving a scenario: exogenous sensed inputs and
//! value-of-information weights.
//!
//! Both signal families are pure functions of time, so the integrator can
//! evaluate them at arbitrary stage times and the analysis layer can
//! differentiate them with finite differences. Weight signals always produce
//! values in `[0, 1]`: the constant and piecewise-linear kinds validate their
//! data up front, and the distance-based kind clamps by construction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("piecewise-linear signal needs at least one breakpoint")]
    EmptyBreakpoints,
    #[error("piecewise-linear breakpoints must be strictly increasing in time (index {index})")]
    NonIncreasingBreakpoints { index: usize },
    #[error("weight value {value} outside [0, 1]")]
    WeightOutOfRange { value: f64 },
    #[error("sensing radius must be positive, got {radius}")]
    NonPositiveRadius { radius: f64 },
    #[error("target period must be positive, got {period}")]
    NonPositivePeriod { period: f64 },
    #[error("signal parameter {name} must be finite")]
    NonFinite { name: &'static str },
}

pub type Result<T> = std::result::Result<T, SignalError>;

/// Motion of a sensed target. Supplies both a spatial position (for
/// distance-based weights and accuracies) and the true scalar quantity being
/// measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetPath {
    /// A stationary target holding a constant true quantity.
    Fixed {
        quantity: f64,
        #[serde(default)]
        position: [f64; 2],
    },
    /// Uniform motion around a circle; the true quantity is the target's
    /// x-coordinate.
    Circle {
        center: [f64; 2],
        radius: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl TargetPath {
    pub fn position(&self, t: f64) -> [f64; 2] {
        match self {
            TargetPath::Fixed { position, .. } => *position,
            TargetPath::Circle {
                center,
                radius,
                period,
                phase,
            } => {
                let angle = 2.0 * std::f64::consts::PI * t / period + phase;
                [
                    center[0] + radius * angle.cos(),
                    center[1] + radius * angle.sin(),
                ]
            }
        }
    }

    /// The true quantity an accurate sensor would report at time `t`.
    pub fn quantity(&self, t: f64) -> f64 {
        match self {
            TargetPath::Fixed { quantity, .. } => *quantity,
            TargetPath::Circle { .. } => self.position(t)[0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TargetPath::Fixed { quantity, position } => {
                ensure_finite(*quantity, "quantity")?;
                ensure_finite(position[0], "position")?;
                ensure_finite(position[1], "position")?;
            }
            TargetPath::Circle {
                center,
                radius,
                period,
                phase,
            } => {
                ensure_finite(center[0], "center")?;
                ensure_finite(center[1], "center")?;
                ensure_finite(*radius, "radius")?;
                ensure_finite(*phase, "phase")?;
                ensure_finite(*period, "period")?;
                if *period <= 0.0 {
                    return Err(SignalError::NonPositivePeriod { period: *period });
                }
            }
        }
        Ok(())
    }
}

/// How sensing quality decays with distance to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeProfile {
    /// `clamp(1 - d/r, 0, 1)`: full quality on top of the target, fading
    /// linearly to zero at the sensing radius.
    #[default]
    Linear,
    /// 1 inside the sensing radius, 0 outside.
    Indicator,
}

impl RangeProfile {
    pub fn value(&self, distance: f64, radius: f64) -> f64 {
        match self {
            RangeProfile::Linear => (1.0 - distance / radius).clamp(0.0, 1.0),
            RangeProfile::Indicator => {
                if distance <= radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Measurement accuracy of a target-tracking sensor: the sensed value is
/// `accuracy * quantity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Accuracy {
    Constant {
        value: f64,
    },
    /// Accuracy decays linearly with the distance between the sensing agent
    /// and the target, reaching zero at `radius`.
    DistanceBased {
        position: [f64; 2],
        radius: f64,
    },
}

impl Accuracy {
    pub fn value(&self, target: &TargetPath, t: f64) -> f64 {
        match self {
            Accuracy::Constant { value } => *value,
            Accuracy::DistanceBased { position, radius } => {
                let p = target.position(t);
                let d = ((position[0] - p[0]).powi(2) + (position[1] - p[1]).powi(2)).sqrt();
                RangeProfile::Linear.value(d, *radius)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Accuracy::Constant { value } => ensure_finite(*value, "accuracy"),
            Accuracy::DistanceBased { position, radius } => {
                ensure_finite(position[0], "position")?;
                ensure_finite(position[1], "position")?;
                ensure_finite(*radius, "radius")?;
                if *radius <= 0.0 {
                    return Err(SignalError::NonPositiveRadius { radius: *radius });
                }
                Ok(())
            }
        }
    }
}

/// An exogenous sensed input `c_h(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputSignal {
    Constant {
        value: f64,
    },
    /// `amplitude * sin(frequency * t + phase) + offset`, with `frequency`
    /// in rad/s.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Linear interpolation through `(t, value)` breakpoints, held constant
    /// outside the breakpoint range.
    PiecewiseLinear {
        points: Vec<[f64; 2]>,
    },
    /// A sensor measurement of a (possibly moving) target:
    /// `accuracy(t) * quantity(t)`.
    TargetTrack {
        target: TargetPath,
        accuracy: Accuracy,
    },
}

impl InputSignal {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            InputSignal::Constant { value } => *value,
            InputSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => amplitude * (frequency * t + phase).sin() + offset,
            InputSignal::PiecewiseLinear { points } => piecewise_eval(points, t),
            InputSignal::TargetTrack { target, accuracy } => {
                accuracy.value(target, t) * target.quantity(t)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InputSignal::Constant { value } => ensure_finite(*value, "value"),
            InputSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                ensure_finite(*amplitude, "amplitude")?;
                ensure_finite(*frequency, "frequency")?;
                ensure_finite(*phase, "phase")?;
                ensure_finite(*offset, "offset")
            }
            InputSignal::PiecewiseLinear { points } => validate_breakpoints(points, false),
            InputSignal::TargetTrack { target, accuracy } => {
                target.validate()?;
                accuracy.validate()
            }
        }
    }
}

/// A value-of-information weight `w_ih(t) in [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightSignal {
    Constant {
        value: f64,
    },
    PiecewiseLinear {
        points: Vec<[f64; 2]>,
    },
    /// Weight derived from the distance between a stationary agent and a
    /// moving target.
    DistanceBased {
        position: [f64; 2],
        target: TargetPath,
        radius: f64,
        #[serde(default)]
        profile: RangeProfile,
    },
}

impl WeightSignal {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            WeightSignal::Constant { value } => *value,
            WeightSignal::PiecewiseLinear { points } => piecewise_eval(points, t),
            WeightSignal::DistanceBased {
                position,
                target,
                radius,
                profile,
            } => {
                let p = target.position(t);
                let d = ((position[0] - p[0]).powi(2) + (position[1] - p[1]).powi(2)).sqrt();
                profile.value(d, *radius)
            }
        }
    }

    /// Rejects weights outside `[0, 1]` rather than clamping them silently:
    /// a misconfigured weight should fail loudly at load time.
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSignal::Constant { value } => {
                ensure_finite(*value, "value")?;
                if !(0.0..=1.0).contains(value) {
                    return Err(SignalError::WeightOutOfRange { value: *value });
                }
                Ok(())
            }
            WeightSignal::PiecewiseLinear { points } => validate_breakpoints(points, true),
            WeightSignal::DistanceBased {
                position,
                target,
                radius,
                ..
            } => {
                ensure_finite(position[0], "position")?;
                ensure_finite(position[1], "position")?;
                target.validate()?;
                ensure_finite(*radius, "radius")?;
                if *radius <= 0.0 {
                    return Err(SignalError::NonPositiveRadius { radius: *radius });
                }
                Ok(())
            }
        }
    }
}

fn piecewise_eval(points: &[[f64; 2]], t: f64) -> f64 {
    debug_assert!(!points.is_empty());
    if t <= points[0][0] {
        return points[0][1];
    }
    if t >= points[points.len() - 1][0] {
        return points[points.len() - 1][1];
    }
    let k = points.partition_point(|p| p[0] <= t);
    let (t0, v0) = (points[k - 1][0], points[k - 1][1]);
    let (t1, v1) = (points[k][0], points[k][1]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

fn validate_breakpoints(points: &[[f64; 2]], unit_range: bool) -> Result<()> {
    if points.is_empty() {
        return Err(SignalError::EmptyBreakpoints);
    }
    for (index, p) in points.iter().enumerate() {
        ensure_finite(p[0], "breakpoint time")?;
        ensure_finite(p[1], "breakpoint value")?;
        if index > 0 && p[0] <= points[index - 1][0] {
            return Err(SignalError::NonIncreasingBreakpoints { index });
        }
        if unit_range && !(0.0..=1.0).contains(&p[1]) {
            return Err(SignalError::WeightOutOfRange { value: p[1] });
        }
    }
    Ok(())
}

fn ensure_finite(value: f64, name: &'static str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(SignalError::NonFinite { name })
    }
}
