//! The randomized property suite behind `apnet verify`: spectral facts,
//! derivative-form agreement, and weight consistency over random connected
//! graphs. Reports are deterministic for a given seed.

use apnet::verify;

fn main() {
    let report = verify::run(100, 2024);
    print!("{report}");
    std::process::exit(if report.all_passed() { 0 } else { 1 });
}
