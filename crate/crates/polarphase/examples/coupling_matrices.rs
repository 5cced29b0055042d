//! Direct-path vs reflected-path polarization coupling.
//!
//! Builds the 2x2 coupling matrix of a direct path (a pure rotation) and of a
//! single reflection off water (rotation · reflection · rotation), then shows
//! the grazing-incidence limit where the reflected coupling collapses to a
//! negated rotation.
//!
//! ```bash
//! cargo run --release -p polarphase --example coupling_matrices
//! ```

use std::f64::consts::FRAC_PI_2;

use polarphase::measurement::RadioParams;
use polarphase::polarization::{
    complex_permittivity, reflection_coefficients, CouplingMatrix, Material,
};

fn print_matrix(label: &str, m: &CouplingMatrix) {
    println!("{label}");
    for row in m.0 {
        println!(
            "  [{:>7.4} {:+.4}j   {:>7.4} {:+.4}j]",
            row[0].re, row[0].im, row[1].re, row[1].im
        );
    }
}

fn main() {
    let theta = 0.6;
    print_matrix(
        &format!("direct path, rotation {theta} rad:"),
        &CouplingMatrix::los(theta),
    );

    let wavelength = RadioParams::default().wavelength(0);
    let water = Material::new("distilled water", 4.0, 5.0);
    let eps = complex_permittivity(&water, wavelength);

    let (theta1, theta2) = (0.4, -0.9);
    for alpha_deg in [30.0, 60.0, 85.0] {
        let r = reflection_coefficients(eps, f64::to_radians(alpha_deg));
        print_matrix(
            &format!("\nwater reflection at {alpha_deg} deg incidence:"),
            &CouplingMatrix::nlos(theta1, theta2, &r),
        );
    }

    // At grazing incidence both coefficients hit -1 exactly and the coupling
    // equals the negated direct-path rotation by theta1 + theta2.
    let grazing = reflection_coefficients(eps, FRAC_PI_2);
    println!(
        "\ngrazing incidence: R_perp = {}, R_par = {}",
        grazing.perpendicular, grazing.parallel
    );
    print_matrix(
        "reflected coupling:",
        &CouplingMatrix::nlos(theta1, theta2, &grazing),
    );
    print_matrix(
        "negated direct rotation by theta1 + theta2:",
        &CouplingMatrix::los(theta1 + theta2),
    );
}
