//! Reflector materials, Fresnel reflection coefficients, and the polarization
//! coupling matrices of direct and single-reflection paths.
//!
//! A direct path couples the transmit and receive polarizations through a pure
//! rotation. A reflected path factors as rotation · diag(R⊥, R∥) · rotation,
//! where the two rotations describe the incident and reflected hops and the
//! diagonal holds the perpendicular/parallel reflection coefficients of the
//! reflector material at the operating wavelength.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{GeometryError, MaterialsError};
use crate::geometry::{
    los_rotation_angle, rotation_matrix, DirectionAngles, EulerAngles, FieldPattern,
};

/// Electric properties of a reflecting surface.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Material {
    pub name: String,
    /// Relative permittivity (dimensionless, >= 1).
    pub eps_r: f64,
    /// Conductivity in S/m (>= 0).
    pub kappa: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, eps_r: f64, kappa: f64) -> Self {
        Self {
            name: name.into(),
            eps_r,
            kappa,
        }
    }

    /// The built-in reflector table: glass, wood, moist concrete, distilled
    /// water, and a metal-like conductor.
    pub fn builtin_table() -> Vec<Material> {
        vec![
            Material::new("glass", 6.0, 1e-14),
            Material::new("wood", 1.2, 1e-4),
            Material::new("moist concrete", 2.3, 1e-2),
            Material::new("distilled water", 4.0, 5.0),
            Material::new("conductor", 30.0, 10.0),
        ]
    }
}

fn normalize_name(name: &str) -> String {
    name.trim()
        .chars()
        .map(|c| {
            if c == '-' || c == '_' {
                ' '
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect()
}

/// Look up a material by name, case-insensitively; `-` and `_` are treated as
/// spaces. A query that matches no full name but is contained in exactly one
/// entry (e.g. `water`) resolves to that entry.
pub fn find_material<'a>(
    name: &str,
    table: &'a [Material],
) -> Result<&'a Material, MaterialsError> {
    let query = normalize_name(name);
    if let Some(m) = table.iter().find(|m| normalize_name(&m.name) == query) {
        return Ok(m);
    }
    let mut partial = table
        .iter()
        .filter(|m| normalize_name(&m.name).contains(&query));
    match (partial.next(), partial.next()) {
        (Some(m), None) => Ok(m),
        _ => Err(MaterialsError::UnknownMaterial(name.to_string())),
    }
}

/// Parse a materials file: one `name,eps_r,kappa` record per line, `.` as the
/// decimal separator, lines beginning with `#` ignored.
pub fn parse_materials_file(path: &str) -> Result<Vec<Material>, MaterialsError> {
    let text = std::fs::read_to_string(path).map_err(|source| MaterialsError::Io {
        path: path.to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| MaterialsError::Parse {
            path: path.to_string(),
            line: idx + 1,
            reason,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(format!(
                "expected 3 comma-separated fields, got {}",
                fields.len()
            )));
        }
        let eps_r: f64 = fields[1]
            .parse()
            .map_err(|_| err(format!("invalid eps_r '{}'", fields[1])))?;
        let kappa: f64 = fields[2]
            .parse()
            .map_err(|_| err(format!("invalid kappa '{}'", fields[2])))?;
        if fields[0].is_empty() || eps_r < 1.0 || kappa < 0.0 {
            return Err(err(
                "need non-empty name, eps_r >= 1, kappa >= 0".to_string()
            ));
        }
        out.push(Material::new(fields[0], eps_r, kappa));
    }
    Ok(out)
}

/// Complex permittivity `ε = ε_r - j·60·κ·λ` of a material at wavelength `λ`
/// in meters.
pub fn complex_permittivity(material: &Material, wavelength: f64) -> Complex64 {
    Complex64::new(material.eps_r, -60.0 * material.kappa * wavelength)
}

/// Perpendicular and parallel reflection coefficients of a reflector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub perpendicular: Complex64,
    pub parallel: Complex64,
}

/// Fresnel reflection coefficients for complex permittivity `ε` and incidence
/// angle `α ∈ [0, π/2]`.
///
/// The square root takes the principal branch (non-negative real part), which
/// keeps both magnitudes at or below one for passive materials.
pub fn reflection_coefficients(eps: Complex64, alpha: f64) -> ReflectionPair {
    // cos α computed as sin(π/2 - α): exactly zero at grazing incidence, where
    // both coefficients must equal -1 exactly.
    let cos_a = (FRAC_PI_2 - alpha).sin();
    let sin_sq = alpha.sin().powi(2);
    let root = (eps - sin_sq).sqrt();
    ReflectionPair {
        perpendicular: (cos_a - root) / (cos_a + root),
        parallel: (eps * cos_a - root) / (eps * cos_a + root),
    }
}

/// 2x2 complex polarization coupling matrix of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix(pub [[Complex64; 2]; 2]);

impl CouplingMatrix {
    /// Direct-path coupling: a rotation by the polarization rotation angle.
    pub fn los(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let r = |x: f64| Complex64::new(x, 0.0);
        CouplingMatrix([[r(c), r(s)], [r(-s), r(c)]])
    }

    /// Reflected-path coupling: rotation(θ2) · diag(R⊥, R∥) · rotation(θ1).
    pub fn nlos(theta1: f64, theta2: f64, r: &ReflectionPair) -> Self {
        let (s1, c1) = theta1.sin_cos();
        let (s2, c2) = theta2.sin_cos();
        // diag(R⊥, R∥) · rotation(θ1)
        let top = [r.perpendicular * c1, r.perpendicular * s1];
        let bot = [r.parallel * -s1, r.parallel * c1];
        CouplingMatrix([
            [c2 * top[0] + s2 * bot[0], c2 * top[1] + s2 * bot[1]],
            [-s2 * top[0] + c2 * bot[0], -s2 * top[1] + c2 * bot[1]],
        ])
    }

    /// Bilinear form `F_r^T M F_t`.
    pub fn bilinear(&self, f_r: &FieldPattern, f_t: &FieldPattern) -> Complex64 {
        let m = &self.0;
        let rx = [f_r.v_component, f_r.h_component];
        let tx = [f_t.v_component, f_t.h_component];
        rx[0] * (m[0][0] * tx[0] + m[0][1] * tx[1]) + rx[1] * (m[1][0] * tx[0] + m[1][1] * tx[1])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Rotation angles of the incident (transmitter-reflector) and reflected
/// (reflector-receiver) hops of a single-bounce path.
///
/// The reflector is treated as a virtual antenna: the incident hop re-uses the
/// direct-path procedure with the reflector's own rotation and an arrival
/// direction `(α, θ_t - δ_x)`, while the reflected hop uses the receiver
/// rotation relative to the reflector and the true arrival direction.
#[allow(clippy::too_many_arguments)]
pub fn nlos_rotation_angles(
    ue_rotation: EulerAngles,
    reflector_rotation: EulerAngles,
    alpha: f64,
    departure: &DirectionAngles,
    arrival: &DirectionAngles,
    f_t: &FieldPattern,
    f_r: &FieldPattern,
    orientation: [f64; 3],
) -> Result<(f64, f64), GeometryError> {
    let incident_arrival =
        DirectionAngles::new(alpha, departure.elevation - reflector_rotation.beta_x);
    let q_incident = rotation_matrix(&reflector_rotation);
    let theta1 = los_rotation_angle(
        f_t,
        f_r,
        orientation,
        &q_incident,
        departure,
        &incident_arrival,
    )?;

    let q_reflected = rotation_matrix(&(ue_rotation - reflector_rotation));
    let theta2 = los_rotation_angle(f_t, f_r, orientation, &q_reflected, departure, arrival)?;

    Ok((theta1, theta2))
}
