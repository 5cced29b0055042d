//! Polarization rotation angles of a direct path.
//!
//! Rotates the receive antenna and shows how the rotation angle of each
//! transmit/receive polarization configuration responds, including the
//! degenerate geometry where an orientation vector lines up with the wave
//! travel direction.
//!
//! ```bash
//! cargo run --release -p polarphase --example rotation_geometry
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use polarphase::geometry::{
    los_rotation_angle, receive_polarization_projection, rotation_matrix, DirectionAngles,
    EulerAngles, Matrix3,
};
use polarphase::measurement::PolarizationConfig;

fn main() {
    let euler = EulerAngles::new(0.3, -0.7, 1.1);
    let q = rotation_matrix(&euler);
    println!(
        "receiver rotation ({:.1}, {:.1}, {:.1}) rad:",
        euler.beta_x, euler.beta_y, euler.beta_z
    );
    for row in q.0 {
        println!("  [{:>8.4} {:>8.4} {:>8.4}]", row[0], row[1], row[2]);
    }
    println!("  det = {:.12}\n", q.determinant());

    let departure = DirectionAngles::new(0.5, 0.1);
    let arrival = DirectionAngles::new(-1.2, 0.2);
    println!("per-configuration rotation angles (departure az 0.5, arrival az -1.2):");
    for config in PolarizationConfig::ALL {
        let theta = los_rotation_angle(
            &config.transmit_pattern(),
            &config.receive_pattern(),
            config.receive_orientation(),
            &q,
            &departure,
            &arrival,
        )
        .unwrap();
        println!(
            "  ({config})  theta = {theta:>8.4} rad   cos = {:>7.4}",
            theta.cos()
        );
    }

    // An unrotated antenna watching along its own vertical orientation has no
    // polarization projection.
    println!();
    let aligned = receive_polarization_projection(
        [1.0, 0.0, 0.0],
        &Matrix3::IDENTITY,
        &DirectionAngles::new(0.0, 0.0),
    );
    println!("orientation parallel to travel direction: {aligned:?}");
    let generic = receive_polarization_projection(
        [1.0, 0.0, 0.0],
        &Matrix3::IDENTITY,
        &DirectionAngles::new(FRAC_PI_4, -FRAC_PI_2 / 3.0),
    )
    .unwrap();
    println!(
        "generic arrival direction:                 p_r = [{:.4}, {:.4}]",
        generic[0], generic[1]
    );
}
