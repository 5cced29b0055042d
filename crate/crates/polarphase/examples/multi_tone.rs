//! Multi-tone transmissions: stacking the differential metric across tones.
//!
//! With scattering phase noise on reflected paths, frequency diversity keeps
//! improving the variance-proportional weighting while the other variants
//! benefit little.
//!
//! ```bash
//! cargo run --release -p polarphase --example multi_tone
//! ```

use polarphase::montecarlo::{sweep, ExperimentConfig, SweepAxis, Variant};

fn main() {
    let cfg = ExperimentConfig {
        num_trials: 10_000,
        seed: 7,
        scatter_var: 1e-3,
        ..ExperimentConfig::default()
    };
    let tones = vec![1, 2, 4, 8];
    let variants = Variant::standard_set();
    let rows = sweep(&cfg, &SweepAxis::Tones(tones.clone()), &variants).unwrap();

    println!(
        "optimum average error rate vs number of tones ({:.0} dB, scatter {} rad^2)\n",
        cfg.power_db(),
        cfg.scatter_var
    );
    print!("{:>8}", "tones");
    for v in &variants {
        print!("{:>10}", v.label());
    }
    println!();
    for &f in &tones {
        print!("{f:>8}");
        for v in &variants {
            let row = rows
                .iter()
                .find(|r| r.axis == f as f64 && r.variant == v.label())
                .unwrap();
            print!("{:>10.4}", row.aer_opt);
        }
        println!();
    }
}
