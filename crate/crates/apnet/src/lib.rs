//! Distributed sensing over networks of active and passive agents.
//!
//! A group of agents runs a weighted dynamic consensus: some agents sense
//! exogenous inputs with time-varying value-of-information weights, the rest
//! only relay. Every agent's state tracks the weighted average of whatever
//! is currently sensed. This crate simulates those networks, computes the
//! error coordinates that describe their tracking quality, and evaluates
//! ultimate bounds on the consensus error.
//!
//! The examples directory is the front door; each file is a runnable tour
//! of one capability:
//!
//! ```text
//! cargo run --example weighted_consensus   # a small network tracking two targets
//! cargo run --example moving_target       # sensor grid following a circling target
//! cargo run --example spectral_toolbox    # Laplacian spectra and pseudoinverses
//! cargo run --example error_dynamics      # error coordinates along a trajectory
//! cargo run --example ultimate_bound      # bound evaluation and gain sweeps
//! cargo run --example custom_scenario     # JSON scenario files and CSV output
//! cargo run --example randomized_checks   # the property-verification suite
//! ```
//!
//! The same functionality is scriptable through the thin `apnet` binary
//! (`apnet simulate|bound|verify`), which loads scenarios from JSON files or
//! by builtin name and writes trajectories as CSV.
//!
//! Module map: [`graph`] holds topology and the spectral helpers,
//! [`signal`] the input and weight signal shapes, [`network`] the dynamics,
//! [`sim`] the integrator, [`analysis`] error coordinates and bounds,
//! [`scenario`] the JSON format and builtins, [`output`] CSV export,
//! [`verify`] randomized property checks, and [`cli`] the command layer.

pub mod analysis;
pub mod cli;
pub mod graph;
pub mod network;
pub mod output;
pub mod scenario;
pub mod signal;
pub mod sim;
pub mod verify;

pub use analysis::{scenario_bound, BoundEstimate};
pub use graph::Graph;
pub use network::{Gains, WeightConfig, WeightEntry};
pub use scenario::builtin;
pub use signal::{InputSignal, WeightSignal};
pub use sim::{integrate, Scenario, Trajectory};
