//! Synthesizing carrier-phase measurements.
//!
//! Draws one direct-path and one reflected-path scenario with the same
//! geometry and prints the measured phase and noise variance of every
//! polarization configuration. The distance/clock term is common to all
//! configurations; only the differentials carry link information.
//!
//! ```bash
//! cargo run --release -p polarphase --example phase_measurements
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polarphase::geometry::{DirectionAngles, EulerAngles};
use polarphase::measurement::{
    measurement_set, Diversity, Hypothesis, PolarizationConfig, RadioParams, Scenario,
};
use polarphase::polarization::Material;

fn print_set(label: &str, scenario: &Scenario, params: &RadioParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let set = measurement_set(scenario, params, Diversity::Full, &mut rng).unwrap();
    println!("{label}");
    for (tone, measurements) in set.tones.iter().enumerate() {
        for config in PolarizationConfig::ALL {
            let m = measurements.configs[config.index()].unwrap();
            println!(
                "  tone {tone}  ({config})  phase = {:>8.5} rad   sigma^2 = {:.3e} rad^2",
                m.phase, m.noise_var
            );
        }
    }
    println!();
}

fn main() {
    let params = RadioParams {
        num_tones: 2,
        ..RadioParams::default()
    };
    let mut scenario = Scenario {
        truth: Hypothesis::Los,
        power_linear: 1e-10,
        distance_m: 10.0,
        clock_offset: 2.1,
        ue_rotation: EulerAngles::new(0.4, -0.8, 1.1),
        reflector_rotation: EulerAngles::new(0.2, 0.1, -0.5),
        incidence: 0.7,
        material: Material::new("distilled water", 4.0, 5.0),
        departure: DirectionAngles::new(0.5, 0.1),
        arrival: DirectionAngles::new(-1.2, 0.2),
        scatter_var: 0.0,
    };

    println!(
        "path power {:.0} dB, d = {} m, clock offset {} rad\n",
        10.0 * scenario.power_linear.log10(),
        scenario.distance_m,
        scenario.clock_offset
    );
    print_set("direct path:", &scenario, &params);

    scenario.truth = Hypothesis::Nlos;
    print_set(
        "reflected off water, incidence 0.7 rad:",
        &scenario,
        &params,
    );

    // The reflection costs signal power, so the same geometry measures noisier.
    scenario.material = Material::new("wood", 1.2, 1e-4);
    print_set("reflected off wood (lossier, noisier):", &scenario, &params);
}
