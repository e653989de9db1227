//! CSV export of recorded trajectories.
//!
//! One row per recorded sample with the columns
//! `t, x_1..x_n, xi_1..xi_n, epsilon, epsilon_valid, delta_norm, lyapunov,
//! bound` (2n + 6 columns in total). Numbers carry 12 significant digits;
//! `epsilon_valid` is `1`/`0`; a missing bound is written as `NaN`.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::sim::Trajectory;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, OutputError>;

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.11e}")
    }
}

/// Writes a trajectory as CSV to any writer.
pub fn write_csv<W: Write>(traj: &Trajectory, writer: W) -> Result<()> {
    let n = traj.node_count();
    let mut out = csv::Writer::from_writer(writer);
    let mut header = Vec::with_capacity(2 * n + 6);
    header.push("t".to_string());
    for i in 1..=n {
        header.push(format!("x_{i}"));
    }
    for i in 1..=n {
        header.push(format!("xi_{i}"));
    }
    header.extend(
        [
            "epsilon",
            "epsilon_valid",
            "delta_norm",
            "lyapunov",
            "bound",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    out.write_record(&header)?;

    let bound = traj.bound.map_or("NaN".to_string(), format_value);
    for k in 0..traj.len() {
        let mut row = Vec::with_capacity(2 * n + 6);
        row.push(format_value(traj.times[k]));
        for v in traj.x[k].iter() {
            row.push(format_value(*v));
        }
        for v in traj.xi[k].iter() {
            row.push(format_value(*v));
        }
        row.push(format_value(traj.epsilon[k]));
        row.push(if traj.epsilon_valid[k] { "1" } else { "0" }.to_string());
        row.push(format_value(traj.delta_norm[k]));
        row.push(format_value(traj.lyapunov[k]));
        row.push(bound.clone());
        out.write_record(&row)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes a trajectory as a CSV file.
pub fn save_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(traj, std::io::BufWriter::new(file))
}
