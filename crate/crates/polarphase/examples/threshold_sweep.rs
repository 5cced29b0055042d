//! Error rates as a function of the decision threshold.
//!
//! One simulation at -100 dB; the threshold is applied afterwards, so the
//! whole curve costs a single run. Prints miss rate, false-alarm rate, and
//! average error rate per threshold, and the optimum.
//!
//! ```bash
//! cargo run --release -p polarphase --example threshold_sweep
//! ```

use polarphase::classifier::Weighting;
use polarphase::measurement::Diversity;
use polarphase::montecarlo::{
    metrics, optimize_threshold, run_trials, ExperimentConfig, ThresholdGrid, Variant,
};

fn main() {
    let cfg = ExperimentConfig {
        num_trials: 20_000,
        seed: 7,
        xi_grid: ThresholdGrid {
            min: 1e-5,
            max: 1e-1,
            points: 13,
        },
        ..ExperimentConfig::default()
    };
    let variants = [Variant::weighted(Weighting::Nvp, Diversity::Full)];
    let table = run_trials(&cfg, &variants).unwrap();

    println!(
        "nvp-full, {} trials at {:.0} dB, random reflector material\n",
        cfg.num_trials,
        cfg.power_db()
    );
    println!("  threshold [rad^2]   miss    false-alarm   avg error");
    for xi in cfg.xi_grid.values() {
        let point = metrics(&table.stats[0], &table.truths, cfg.prior_nlos, xi).unwrap();
        println!(
            "  {xi:>16.3e}   {:>5.3}   {:>11.3}   {:>9.3}",
            point.pmd, point.pfa, point.aer
        );
    }

    let (xi_opt, aer_opt) = optimize_threshold(
        &table.stats[0],
        &table.truths,
        cfg.prior_nlos,
        &cfg.xi_grid.values(),
    )
    .unwrap();
    println!("\noptimum: aer = {aer_opt:.4} at threshold {xi_opt:.3e} rad^2");
}
