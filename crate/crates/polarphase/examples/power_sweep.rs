//! Optimum average error rate vs path power gain for all classifier
//! variants: the three weightings under full polarization diversity, the two
//! limited-diversity systems, and the phase-variance baseline.
//!
//! ```bash
//! cargo run --release -p polarphase --example power_sweep
//! ```

use polarphase::montecarlo::{sweep, ExperimentConfig, SweepAxis, Variant};

fn main() {
    let cfg = ExperimentConfig {
        num_trials: 10_000,
        seed: 7,
        ..ExperimentConfig::default()
    };
    let grid: Vec<f64> = (0..8).map(|k| -135.0 + 10.0 * k as f64).collect();
    let variants = Variant::standard_set();
    let rows = sweep(&cfg, &SweepAxis::PowerDb(grid.clone()), &variants).unwrap();

    print!("{:>10}", "P [dB]");
    for v in &variants {
        print!("{:>10}", v.label());
    }
    println!();
    for &db in &grid {
        print!("{db:>10.0}");
        for v in &variants {
            let row = rows
                .iter()
                .find(|r| r.axis == db && r.variant == v.label())
                .unwrap();
            print!("{:>10.4}", row.aer_opt);
        }
        println!();
    }
    println!("\n(each cell is the optimum average error rate over the threshold grid)");
}
