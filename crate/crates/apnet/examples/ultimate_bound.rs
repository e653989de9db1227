//! Evaluating the ultimate bound on ||delta||^2 for the grid-tracking
//! scenario, checking it against the simulated trajectory, and sweeping the
//! gains to show how alpha and gamma tighten it.

use apnet::scenario::builtin;
use apnet::{integrate, scenario_bound, Gains};

fn main() {
    let mut sc = builtin("fig4-heterogeneous").unwrap();
    sc.dt = 5e-3;

    let est = scenario_bound(&sc).unwrap();
    println!("perturbation suprema of the scenario (gain-independent):");
    println!("  eps_dot* = {:.4}", est.eps_dot_star);
    println!("  p1*      = {:.4}", est.p1_star);
    println!("  p2*      = {:.4}", est.p2_star);
    println!("  lambda_min(F) = {:.5}", est.lambda_min_f);
    println!(
        "bound on ||delta||^2 at (alpha, gamma) = (20, 150): {:.1}",
        est.bound
    );

    let traj = integrate(&sc).unwrap();
    let sup = traj.delta_norm.iter().map(|d| d * d).fold(0.0f64, f64::max);
    println!("observed sup ||delta||^2 along the run: {sup:.1}");
    println!();

    println!("gain sweep on the same scenario:");
    println!("alpha  gamma   bound");
    for (alpha, gamma) in [(5.0, 50.0), (10.0, 200.0), (20.0, 800.0)] {
        sc.gains = Gains::new(alpha, gamma, 0.1).unwrap();
        let est = scenario_bound(&sc).unwrap();
        println!("{alpha:5}  {gamma:5}  {:10.1}", est.bound);
    }
    println!();
    println!("raising alpha shrinks the eps_dot term as 1/alpha^2; raising");
    println!("gamma faster than alpha^2 shrinks the perturbation term too.");
}
