//! Round-tripping a scenario through the JSON file format and exporting the
//! resulting trajectory as CSV. The same files drive the `apnet` binary:
//!
//! ```text
//! apnet simulate --scenario my_scenario.json -o out.csv
//! ```

use apnet::network::WeightEntry;
use apnet::{
    integrate, output, scenario, Gains, Graph, InputSignal, Scenario, WeightConfig, WeightSignal,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A triangle of agents; agent 1 senses a ramp, agent 2 a sinusoid, and
    // agent 3 relays. Agent 1's trust in the ramp decays over time.
    let graph = Graph::new(3, &[(0, 1), (1, 2), (0, 2)])?;
    let gains = Gains::new(3.0, 6.0, 0.1)?;
    let inputs = vec![
        InputSignal::PiecewiseLinear {
            points: vec![[0.0, 0.0], [10.0, 2.0]],
        },
        InputSignal::Sinusoid {
            amplitude: 0.5,
            frequency: 1.0,
            phase: 0.0,
            offset: 1.0,
        },
    ];
    let weights = WeightConfig::new(
        3,
        2,
        vec![
            WeightEntry {
                agent: 0,
                input: 0,
                signal: WeightSignal::PiecewiseLinear {
                    points: vec![[0.0, 1.0], [10.0, 0.2]],
                },
            },
            WeightEntry {
                agent: 1,
                input: 1,
                signal: WeightSignal::Constant { value: 0.9 },
            },
        ],
    )?;
    let mut sc = Scenario::new(graph, gains, inputs, weights, 10.0);
    sc.record_stride = 100;

    let dir = std::env::temp_dir();
    let json_path = dir.join("custom_scenario.json");
    let csv_path = dir.join("custom_scenario.csv");

    scenario::save(&sc, &json_path)?;
    println!("wrote {}", json_path.display());
    let head: String = std::fs::read_to_string(&json_path)?
        .lines()
        .take(12)
        .collect::<Vec<_>>()
        .join("\n");
    println!("{head}\n  ...\n");

    let reloaded = scenario::load(&json_path)?;
    let traj = integrate(&reloaded)?;
    output::save_csv(&traj, &csv_path)?;
    println!("wrote {} ({} samples)", csv_path.display(), traj.len());

    let csv_text = std::fs::read_to_string(&csv_path)?;
    for line in csv_text.lines().take(3) {
        println!("{line}");
    }
    println!("...");
    Ok(())
}
