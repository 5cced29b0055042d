//! Fresnel reflection coefficients of the built-in reflector materials.
//!
//! Prints amplitude and phase of the perpendicular/parallel coefficients over
//! the incidence angle and locates the parallel-amplitude dip (the Brewster
//! angle for near-lossless materials).
//!
//! ```bash
//! cargo run --release -p polarphase --example reflection_coefficients
//! ```

use std::f64::consts::FRAC_PI_2;

use polarphase::measurement::RadioParams;
use polarphase::polarization::{complex_permittivity, reflection_coefficients, Material};

fn main() {
    let wavelength = RadioParams::default().wavelength(0);
    println!("wavelength: {:.4} mm\n", wavelength * 1e3);

    for material in Material::builtin_table() {
        let eps = complex_permittivity(&material, wavelength);
        println!("{} (eps = {:.3} {:+.3e}j)", material.name, eps.re, eps.im);
        println!("  alpha[deg]   |R_perp|  arg[deg]   |R_par|   arg[deg]");
        for deg in (0..=90).step_by(15) {
            let alpha = f64::from(deg).to_radians().min(FRAC_PI_2);
            let r = reflection_coefficients(eps, alpha);
            println!(
                "  {deg:>10}   {:>8.4}  {:>8.2}   {:>7.4}  {:>8.2}",
                r.perpendicular.norm(),
                r.perpendicular.arg().to_degrees(),
                r.parallel.norm(),
                r.parallel.arg().to_degrees(),
            );
        }

        // Locate the parallel-amplitude minimum on a fine grid.
        let mut best = (f64::INFINITY, 0.0);
        let mut alpha = 0.0;
        while alpha <= FRAC_PI_2 {
            let mag = reflection_coefficients(eps, alpha).parallel.norm();
            if mag < best.0 {
                best = (mag, alpha);
            }
            alpha += 1e-4;
        }
        println!(
            "  |R_par| dips to {:.2e} at {:.2} deg\n",
            best.0,
            best.1.to_degrees()
        );
    }
}
