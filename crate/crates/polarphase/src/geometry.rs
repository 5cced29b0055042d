//! Euler-angle rotations and the geometric polarization rotation angle.
//!
//! A link is described by the orientation of the receive antenna relative to
//! the transmit antenna (three Euler angles) plus the departure/arrival
//! directions of the wave. The polarization rotation angle `ϑ` between a
//! transmit field pattern and a (possibly rotated) receive antenna is obtained
//! by projecting the receive orientation vector onto the transmit polarization
//! plane and comparing it with the transmit polarization vector.

use crate::error::GeometryError;

/// Rejection threshold for orientation vectors (numerically) parallel to the
/// wave travel direction, where the polarization projection is undefined.
pub const PROJECTION_EPS: f64 = 1e-9;

/// Rotation about the x, y, z axes, in radians.
///
/// No range is enforced; scenario sampling decides the ranges.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EulerAngles {
    pub beta_x: f64,
    pub beta_y: f64,
    pub beta_z: f64,
}

impl EulerAngles {
    pub const ZERO: Self = Self {
        beta_x: 0.0,
        beta_y: 0.0,
        beta_z: 0.0,
    };

    pub fn new(beta_x: f64, beta_y: f64, beta_z: f64) -> Self {
        Self {
            beta_x,
            beta_y,
            beta_z,
        }
    }
}

impl std::ops::Sub for EulerAngles {
    type Output = EulerAngles;

    fn sub(self, rhs: EulerAngles) -> EulerAngles {
        EulerAngles::new(
            self.beta_x - rhs.beta_x,
            self.beta_y - rhs.beta_y,
            self.beta_z - rhs.beta_z,
        )
    }
}

/// Departure or arrival direction of the wave.
///
/// Sampled azimuths lie in `[-π, π]` and elevations in `[-π/2, π/2]`; the
/// virtual-antenna construction for reflected paths may produce elevations
/// outside that range, which the projection handles without restriction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DirectionAngles {
    /// Azimuth angle in radians.
    pub azimuth: f64,
    /// Elevation angle in radians.
    pub elevation: f64,
}

impl DirectionAngles {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }
}

/// Two-element field pattern: vertically and horizontally polarized
/// amplitudes of the antenna response after beamforming.
///
/// The beamformer phase-offset convention keeps both components real and
/// non-negative; an active pattern is never the zero vector.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FieldPattern {
    pub v_component: f64,
    pub h_component: f64,
}

impl FieldPattern {
    /// Unit vertically polarized pattern `[1, 0]`.
    pub const VERTICAL: Self = Self {
        v_component: 1.0,
        h_component: 0.0,
    };
    /// Unit horizontally polarized pattern `[0, 1]`.
    pub const HORIZONTAL: Self = Self {
        v_component: 0.0,
        h_component: 1.0,
    };

    pub fn new(v_component: f64, h_component: f64) -> Self {
        Self {
            v_component,
            h_component,
        }
    }

    pub fn norm(&self) -> f64 {
        self.v_component.hypot(self.h_component)
    }

    /// Polarization mismatch angle `arctan2(F^H, F^V)` of this pattern.
    pub fn mismatch_angle(&self) -> f64 {
        self.h_component.atan2(self.v_component)
    }
}

/// 3x3 real matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub const IDENTITY: Self = Self([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul(&self, rhs: &Matrix3) -> Matrix3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Matrix3(out)
    }

    pub fn transpose(&self) -> Matrix3 {
        let m = &self.0;
        Matrix3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Orientation change of the receive antenna axes relative to the transmit
/// antenna: the composition of rotations about z, y, x with negated angles.
///
/// The result is orthonormal with determinant 1.
pub fn rotation_matrix(e: &EulerAngles) -> Matrix3 {
    let (sx, cx) = e.beta_x.sin_cos();
    let (sy, cy) = e.beta_y.sin_cos();
    let (sz, cz) = e.beta_z.sin_cos();
    Matrix3([
        [cz * cy, sz * cx + cz * sy * sx, sz * sx - cz * sy * cx],
        [-sz * cy, cz * cx - sz * sy * sx, cz * sx + sz * sy * cx],
        [sy, -cy * sx, cy * cx],
    ])
}

/// Projection of the rotated receive orientation vector onto the transmit
/// polarization plane, normalized to unit length.
///
/// `orientation` is the receive orientation vector in local coordinates
/// (`[1,0,0]` for vertically and `[0,1,0]` for horizontally polarized
/// receptions). The vector is first rotated into global coordinates by `q`,
/// then re-aligned so the wave travel direction is on the y-axis, and finally
/// its x/z components are kept.
///
/// Fails with [`GeometryError::DegenerateProjection`] when the re-aligned
/// vector is parallel to the travel direction.
pub fn receive_polarization_projection(
    orientation: [f64; 3],
    q: &Matrix3,
    arrival: &DirectionAngles,
) -> Result<[f64; 2], GeometryError> {
    let global = q.mul_vec(orientation);

    // Rotate by p = -azimuth - π/2 in azimuth and by the elevation so the
    // travel direction lands on the y-axis; written out, the matrix is the
    // negated direct form in the arrival angles.
    let (sa, ca) = arrival.azimuth.sin_cos();
    let (se, ce) = arrival.elevation.sin_cos();
    let aligned = Matrix3([
        [-sa, ca, 0.0],
        [-ce * ca, -ce * sa, -se],
        [-se * ca, -se * sa, ce],
    ])
    .mul_vec(global);

    let planar = [aligned[0], aligned[2]];
    let norm = planar[0].hypot(planar[1]);
    if norm <= PROJECTION_EPS {
        return Err(GeometryError::DegenerateProjection);
    }
    Ok([planar[0] / norm, planar[1] / norm])
}

/// Polarization rotation angle `ϑ` of a direct path between a transmit field
/// pattern and a receive antenna rotated by `q`.
///
/// `ϑ = ϖ_t - ϖ_r - ψ` where `ϖ_u` is the polarization mismatch angle of
/// pattern `u` and `ψ` is the angle between the transmit polarization vector
/// and the projected receive orientation. The result is unwrapped; only its
/// sine and cosine are consumed downstream.
pub fn los_rotation_angle(
    f_t: &FieldPattern,
    f_r: &FieldPattern,
    orientation: [f64; 3],
    q: &Matrix3,
    _departure: &DirectionAngles,
    arrival: &DirectionAngles,
) -> Result<f64, GeometryError> {
    let p_r = receive_polarization_projection(orientation, q, arrival)?;
    let norm_t = f_t.norm();
    let p_t = [f_t.v_component / norm_t, f_t.h_component / norm_t];

    // Round-off can push the inner product just outside [-1, 1].
    let inner = (p_t[0] * p_r[0] + p_t[1] * p_r[1]).clamp(-1.0, 1.0);
    let psi = inner.acos();

    Ok(f_t.mismatch_angle() - f_r.mismatch_angle() - psi)
}
