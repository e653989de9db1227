//! Black-box tests of the `apnet` binary: exit codes, CSV layout, report
//! text, and scenario-file handling.

use std::path::Path;
use std::process::{Command, Output};

fn apnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apnet"))
        .args(args)
        .env("APNET_LOG", "error")
        .output()
        .expect("binary should spawn")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output
        .status
        .code()
        .expect("no exit code (killed by signal?)")
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const TRIANGLE_CONSTANTS: &str = r#"{
  "graph": { "n": 3, "edges": [[1, 2], [2, 3], [1, 3]] },
  "gains": { "alpha": 3.0, "gamma": 6.0, "sigma": 0.0 },
  "inputs": [
    { "kind": "constant", "value": 2.0 },
    { "kind": "constant", "value": -1.0 }
  ],
  "weights": [
    { "agent": 1, "input": 1, "signal": { "kind": "constant", "value": 0.8 } },
    { "agent": 3, "input": 2, "signal": { "kind": "constant", "value": 0.4 } }
  ],
  "sim": { "duration": 20.0 }
}"#;

const SIGMA_ZERO_SINUSOID: &str = r#"{
  "graph": { "n": 2, "edges": [[1, 2]] },
  "gains": { "alpha": 2.0, "gamma": 4.0, "sigma": 0.0 },
  "inputs": [
    { "kind": "sinusoid", "amplitude": 1.0, "frequency": 1.0 }
  ],
  "weights": [
    { "agent": 1, "input": 1, "signal": { "kind": "constant", "value": 0.7 } }
  ],
  "sim": { "duration": 5.0 }
}"#;

#[test]
fn simulate_builtin_writes_the_expected_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("traj.csv");
    let out = apnet(&[
        "simulate",
        "--builtin",
        "fig2-heterogeneous",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("4 agents"), "unexpected report: {text}");

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "t,x_1,x_2,x_3,x_4,xi_1,xi_2,xi_3,xi_4,epsilon,epsilon_valid,delta_norm,lyapunov,bound"
    );
    assert_eq!(
        lines.len(),
        1 + 1001,
        "one header plus one row per recorded sample"
    );

    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last.len(), 14);
    let t: f64 = last[0].parse().unwrap();
    assert!((t - 10.0).abs() < 1e-9);
    for col in &last[1..5] {
        let x: f64 = col.parse().unwrap();
        assert!(
            (x - 1.431818).abs() <= 1e-3,
            "final state {x} too far from 1.431818"
        );
    }
    let epsilon_valid = last[10];
    assert_eq!(epsilon_valid, "1");
}

#[test]
fn bound_reports_ingredients_and_empirical_settling() {
    let out = apnet(&["bound", "--builtin", "fig2-identical", "--duration", "100"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("bound on ||delta||^2: 0.000000e0"),
        "report: {text}"
    );
    assert!(text.contains("empirical T: "), "report: {text}");
    let sup_line = text
        .lines()
        .find(|l| l.starts_with("max ||delta(t)||^2 for t >= T: "))
        .expect("settling should be reached");
    let sup: f64 = sup_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(sup <= 1e-12, "post-settling sup {sup:.3e} above threshold");
}

#[test]
fn bound_is_undefined_for_leakless_moving_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "sigma-zero.json", SIGMA_ZERO_SINUSOID);
    let out = apnet(&["bound", "--scenario", &path]);
    assert_eq!(exit_code(&out), 1, "stdout: {}", stdout(&out));
    assert!(
        stderr(&out).contains("bound undefined"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn missing_scenario_file_is_a_usage_error() {
    let out = apnet(&["simulate", "--scenario", "/no/such/scenario.json"]);
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr(&out).contains("/no/such/scenario.json"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn unknown_builtin_lists_the_available_names() {
    let out = apnet(&["simulate", "--builtin", "fig9-imaginary"]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("fig9-imaginary"), "stderr: {err}");
    for name in [
        "fig2-identical",
        "fig2-heterogeneous",
        "fig4-identical",
        "fig4-heterogeneous",
    ] {
        assert!(err.contains(name), "stderr should list {name}: {err}");
    }
}

#[test]
fn source_flags_are_required_and_exclusive() {
    let neither = apnet(&["simulate"]);
    assert_eq!(exit_code(&neither), 2);

    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "triangle.json", TRIANGLE_CONSTANTS);
    let both = apnet(&[
        "simulate",
        "--builtin",
        "fig2-identical",
        "--scenario",
        &path,
    ]);
    assert_eq!(exit_code(&both), 2);
}

#[test]
fn zero_trials_is_rejected() {
    let out = apnet(&["verify", "--trials", "0"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn divergence_exits_with_code_three() {
    let out = apnet(&[
        "simulate",
        "--builtin",
        "fig4-heterogeneous",
        "--dt",
        "0.5",
        "--duration",
        "50",
    ]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("diverged"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn verify_is_deterministic_and_reports_every_property() {
    let first = apnet(&["verify", "--trials", "25", "--seed", "7"]);
    let second = apnet(&["verify", "--trials", "25", "--seed", "7"]);
    assert_eq!(exit_code(&first), 0, "stderr: {}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&second));
    let text = stdout(&first);
    let pass_lines = text
        .lines()
        .filter(|l| l.trim_start().starts_with("PASS"))
        .count();
    assert_eq!(pass_lines, 6, "report: {text}");
}

#[test]
fn custom_scenario_files_simulate_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "triangle.json", TRIANGLE_CONSTANTS);
    let csv_path = dir.path().join("triangle.csv");

    let sim = apnet(&[
        "simulate",
        "--scenario",
        &path,
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&sim), 0, "stderr: {}", stderr(&sim));
    assert!(
        stdout(&sim).contains("3 agents"),
        "report: {}",
        stdout(&sim)
    );

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 2 * 3 + 6);

    // Constant data with sigma = 0 pins the asymptotic bound at zero.
    let bound = apnet(&["bound", "--scenario", &path]);
    assert_eq!(exit_code(&bound), 0, "stderr: {}", stderr(&bound));
    assert!(stdout(&bound).contains("bound on ||delta||^2: 0.000000e0"));
}

#[test]
fn malformed_json_reports_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "broken.json", "{ \"graph\": { \"n\": oops");
    let out = apnet(&["simulate", "--scenario", &path]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 1"), "stderr: {err}");
    assert!(err.contains("column"), "stderr: {err}");
}

#[test]
fn semantic_errors_name_the_offending_entry() {
    let dir = tempfile::tempdir().unwrap();
    let zero_based = TRIANGLE_CONSTANTS.replace(
        r#"{ "agent": 1, "input": 1, "signal": { "kind": "constant", "value": 0.8 } }"#,
        r#"{ "agent": 0, "input": 1, "signal": { "kind": "constant", "value": 0.8 } }"#,
    );
    let path = write_scenario(dir.path(), "zero-based.json", &zero_based);
    let out = apnet(&["simulate", "--scenario", &path]);
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr(&out).contains("weights[0]"),
        "stderr: {}",
        stderr(&out)
    );
}
