//! Carrier-phase measurement synthesis.
//!
//! The receiver tracks the phase of a constant tone with a phase-locked loop.
//! A measured phase is the wrapped sum of the propagation term `2πd/λ`, the
//! clock phase offset, the polarization-induced phase of the path coupling,
//! Gaussian tracking noise whose variance follows from the per-configuration
//! SNR, and (for reflected paths) optional scattering phase noise.
//!
//! Configurations with no coupled signal carry no phase information: their
//! phase is drawn uniformly and their variance is capped at `π²/3`, the
//! variance of a uniform phase, which lets variance-aware weighting discount
//! them naturally.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::GeometryError;
use crate::geometry::{
    los_rotation_angle, rotation_matrix, DirectionAngles, EulerAngles, FieldPattern,
};
use crate::polarization::{
    complex_permittivity, nlos_rotation_angles, reflection_coefficients, CouplingMatrix, Material,
    ReflectionPair,
};
use crate::SPEED_OF_LIGHT;

/// Characteristic impedance of vacuum, ohms.
pub const VACUUM_IMPEDANCE: f64 = 120.0 * std::f64::consts::PI;

/// Variance assigned to information-free (uniform) phases: Var of U(-π, π].
pub const PHASE_VAR_CAP: f64 = std::f64::consts::PI * std::f64::consts::PI / 3.0;

/// Below this SNR the noise-variance model is replaced by [`PHASE_VAR_CAP`].
pub const SNR_FLOOR: f64 = 1e-9;

/// Couplings below this magnitude are treated as signal-free.
pub const SIGNAL_FREE_COUPLING: f64 = 1e-12;

/// Wrap an angle to `[0, 2π)`.
///
/// `rem_euclid` may round a tiny negative input up to exactly `2π`; that case
/// folds back to zero.
pub fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wrap an angle to `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_tau(x);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Ground truth of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Los,
    Nlos,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::Los => "los",
            Hypothesis::Nlos => "nlos",
        })
    }
}

/// Radio and receiver parameters shared by every measurement of a trial.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RadioParams {
    /// Frequency of the first tone in Hz.
    pub f0_hz: f64,
    /// Spacing between consecutive tones in Hz.
    pub tone_spacing_hz: f64,
    /// Number of tones transmitted (>= 1).
    pub num_tones: usize,
    /// Loop filter bandwidth in Hz.
    pub loop_bandwidth_hz: f64,
    /// Integration time in seconds.
    pub integration_time_s: f64,
    /// Noise spectral density in W/Hz.
    pub noise_density: f64,
    /// Receive antenna gain, linear.
    pub antenna_gain: f64,
    /// Characteristic impedance in ohms (120π for vacuum).
    pub impedance_ohms: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            f0_hz: 30e9,
            tone_spacing_hz: 1e6,
            num_tones: 1,
            loop_bandwidth_hz: 20.0,
            integration_time_s: 0.01,
            noise_density: 10f64.powf(-20.38),
            antenna_gain: 1.0,
            impedance_ohms: VACUUM_IMPEDANCE,
        }
    }
}

impl RadioParams {
    /// Wavelength of tone `index` in meters.
    pub fn wavelength(&self, index: usize) -> f64 {
        SPEED_OF_LIGHT / (self.f0_hz + index as f64 * self.tone_spacing_hz)
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("f0_hz", self.f0_hz),
            ("tone_spacing_hz", self.tone_spacing_hz),
            ("loop_bandwidth_hz", self.loop_bandwidth_hz),
            ("integration_time_s", self.integration_time_s),
            ("noise_density", self.noise_density),
            ("antenna_gain", self.antenna_gain),
            ("impedance_ohms", self.impedance_ohms),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(format!("{name} must be positive and finite, got {value}"));
            }
        }
        if self.num_tones == 0 {
            return Err("num_tones must be >= 1".to_string());
        }
        Ok(())
    }
}

/// One sampled world instance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Scenario {
    pub truth: Hypothesis,
    /// Path power gain, linear.
    pub power_linear: f64,
    /// Distance traveled by the tone in meters.
    pub distance_m: f64,
    /// Difference of the transmit/receive clock phase offsets, radians.
    pub clock_offset: f64,
    /// Receiver orientation relative to the transmitter.
    pub ue_rotation: EulerAngles,
    /// Reflector orientation relative to the transmitter (reflected paths).
    pub reflector_rotation: EulerAngles,
    /// Angle of incidence on the reflector, radians in `[0, π/2]`.
    pub incidence: f64,
    /// Reflector material (reflected paths).
    pub material: Material,
    pub departure: DirectionAngles,
    pub arrival: DirectionAngles,
    /// Scattering phase-noise power in rad² added under NLOS.
    pub scatter_var: f64,
}

impl Scenario {
    pub fn is_nlos(&self) -> bool {
        self.truth == Hypothesis::Nlos
    }
}

/// Transmit/receive polarization configuration `(p, q)`: `p` is the receive
/// and `q` the transmit polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizationConfig {
    Vv,
    Vh,
    Hv,
    Hh,
}

impl PolarizationConfig {
    pub const ALL: [PolarizationConfig; 4] = [
        PolarizationConfig::Vv,
        PolarizationConfig::Vh,
        PolarizationConfig::Hv,
        PolarizationConfig::Hh,
    ];

    pub fn index(self) -> usize {
        match self {
            PolarizationConfig::Vv => 0,
            PolarizationConfig::Vh => 1,
            PolarizationConfig::Hv => 2,
            PolarizationConfig::Hh => 3,
        }
    }

    /// Transmit field pattern of this configuration (unit amplitude).
    pub fn transmit_pattern(self) -> FieldPattern {
        match self {
            PolarizationConfig::Vv | PolarizationConfig::Hv => FieldPattern::VERTICAL,
            PolarizationConfig::Vh | PolarizationConfig::Hh => FieldPattern::HORIZONTAL,
        }
    }

    /// Receive field pattern of this configuration (unit amplitude).
    pub fn receive_pattern(self) -> FieldPattern {
        match self {
            PolarizationConfig::Vv | PolarizationConfig::Vh => FieldPattern::VERTICAL,
            PolarizationConfig::Hv | PolarizationConfig::Hh => FieldPattern::HORIZONTAL,
        }
    }

    /// Receive orientation vector in the antenna's local coordinates.
    pub fn receive_orientation(self) -> [f64; 3] {
        match self {
            PolarizationConfig::Vv | PolarizationConfig::Vh => [1.0, 0.0, 0.0],
            PolarizationConfig::Hv | PolarizationConfig::Hh => [0.0, 1.0, 0.0],
        }
    }
}

impl std::fmt::Display for PolarizationConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PolarizationConfig::Vv => "V,V",
            PolarizationConfig::Vh => "V,H",
            PolarizationConfig::Hv => "H,V",
            PolarizationConfig::Hh => "H,H",
        })
    }
}

/// Which link sides switch between vertical and horizontal polarization.
///
/// Limited-diversity systems fix the other side to horizontal: transmit
/// diversity measures `(H,V)` and `(H,H)`, receive diversity `(V,H)` and
/// `(H,H)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diversity {
    Full,
    #[serde(alias = "tx")]
    Transmit,
    #[serde(alias = "rx")]
    Receive,
}

impl Diversity {
    /// Indices (into [`PolarizationConfig::ALL`]) of the measurable configs.
    pub fn active_configs(self) -> &'static [usize] {
        match self {
            Diversity::Full => &[0, 1, 2, 3],
            Diversity::Transmit => &[2, 3],
            Diversity::Receive => &[1, 3],
        }
    }

    /// Indices of the measurable differential entries (see
    /// [`crate::classifier::DIFFERENTIAL_PAIRS`]).
    pub fn active_differentials(self) -> &'static [usize] {
        match self {
            Diversity::Full => &[0, 1, 2, 3, 4, 5],
            Diversity::Transmit => &[5],
            Diversity::Receive => &[4],
        }
    }
}

impl std::fmt::Display for Diversity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Diversity::Full => "full",
            Diversity::Transmit => "tx",
            Diversity::Receive => "rx",
        })
    }
}

/// A single phase measurement and its true tracking-noise variance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Measurement {
    /// Measured phase in `[0, 2π)`.
    pub phase: f64,
    /// True measurement-noise variance in rad².
    pub noise_var: f64,
}

/// Measurements of one tone over the active polarization configurations,
/// indexed by [`PolarizationConfig::index`]; masked configs are `None`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToneMeasurements {
    pub configs: [Option<Measurement>; 4],
}

/// The measured phases of one trial: per tone, per active configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhaseMeasurementSet {
    pub diversity: Diversity,
    pub tones: Vec<ToneMeasurements>,
}

impl PhaseMeasurementSet {
    pub fn num_tones(&self) -> usize {
        self.tones.len()
    }

    /// Restrict a set to the given mask, keeping the measurement values of
    /// the surviving configurations.
    pub fn masked(&self, diversity: Diversity) -> PhaseMeasurementSet {
        let tones = self
            .tones
            .iter()
            .map(|tone| {
                let mut configs = [None; 4];
                for &c in diversity.active_configs() {
                    configs[c] = tone.configs[c];
                }
                ToneMeasurements { configs }
            })
            .collect();
        PhaseMeasurementSet { diversity, tones }
    }

    /// Copy of the set with every noise variance multiplied by an independent
    /// log-normal factor `exp(N(0, log_std²))`. Models imperfect variance
    /// estimation for weighting robustness studies; the measured phases are
    /// untouched.
    pub fn with_perturbed_variances(
        &self,
        log_std: f64,
        rng: &mut impl Rng,
    ) -> PhaseMeasurementSet {
        let mut out = self.clone();
        for tone in &mut out.tones {
            for slot in tone.configs.iter_mut().flatten() {
                let z: f64 = rng.sample(StandardNormal);
                slot.noise_var *= (log_std * z).exp();
            }
        }
        out
    }
}

/// Electric field at the receive beamformer output:
/// `E_r = sqrt(P·Z0) · F_r^T M F_t · exp(-j2πd/λ)`.
pub fn received_field(
    power_linear: f64,
    distance_m: f64,
    wavelength: f64,
    f_r: &FieldPattern,
    coupling: &CouplingMatrix,
    f_t: &FieldPattern,
) -> Complex64 {
    let amplitude = (power_linear * VACUUM_IMPEDANCE).sqrt();
    let propagation = Complex64::from_polar(1.0, -TAU * distance_m / wavelength);
    amplitude * coupling.bilinear(f_r, f_t) * propagation
}

/// SNR at the receive antenna: `γ = G λ² |E_r|² / (480 π² B N0)`.
pub fn snr(e_r: Complex64, gain: f64, wavelength: f64, bandwidth: f64, noise_density: f64) -> f64 {
    gain * wavelength * wavelength * e_r.norm_sqr()
        / (480.0 * std::f64::consts::PI * std::f64::consts::PI * bandwidth * noise_density)
}

/// Phase tracking-noise variance `σ² = (1/γ)(1 + 1/(TBγ))`, capped at
/// [`PHASE_VAR_CAP`] for SNRs at or below [`SNR_FLOOR`] where the model
/// diverges.
pub fn phase_noise_variance(snr: f64, integration_time: f64, bandwidth: f64) -> f64 {
    if snr <= SNR_FLOOR {
        return PHASE_VAR_CAP;
    }
    (1.0 / snr) * (1.0 + 1.0 / (integration_time * bandwidth * snr))
}

/// Phase shift introduced by the polarization configuration:
/// `arctan2(Im{F_r^T M F_t}, Re{F_r^T M F_t})`.
///
/// Returns `None` when the coupling magnitude is below
/// [`SIGNAL_FREE_COUPLING`]: the configuration carries no signal and its
/// phase is meaningless.
pub fn polarization_phase(
    f_r: &FieldPattern,
    coupling: &CouplingMatrix,
    f_t: &FieldPattern,
) -> Option<f64> {
    let coupled = coupling.bilinear(f_r, f_t);
    if coupled.norm() < SIGNAL_FREE_COUPLING {
        return None;
    }
    Some(coupled.im.atan2(coupled.re))
}

/// Per-configuration polarization rotation angles of a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathAngles {
    Direct(f64),
    Reflected { incident: f64, reflected: f64 },
}

/// Rotation angle(s) of one polarization configuration of the scenario's path.
pub fn path_angles(
    scenario: &Scenario,
    config: PolarizationConfig,
) -> Result<PathAngles, GeometryError> {
    let f_t = config.transmit_pattern();
    let f_r = config.receive_pattern();
    let orientation = config.receive_orientation();
    match scenario.truth {
        Hypothesis::Los => {
            let q = rotation_matrix(&scenario.ue_rotation);
            let theta = los_rotation_angle(
                &f_t,
                &f_r,
                orientation,
                &q,
                &scenario.departure,
                &scenario.arrival,
            )?;
            Ok(PathAngles::Direct(theta))
        }
        Hypothesis::Nlos => {
            let (incident, reflected) = nlos_rotation_angles(
                scenario.ue_rotation,
                scenario.reflector_rotation,
                scenario.incidence,
                &scenario.departure,
                &scenario.arrival,
                &f_t,
                &f_r,
                orientation,
            )?;
            Ok(PathAngles::Reflected {
                incident,
                reflected,
            })
        }
    }
}

fn coupling_for(angles: PathAngles, reflection: Option<&ReflectionPair>) -> CouplingMatrix {
    match angles {
        PathAngles::Direct(theta) => CouplingMatrix::los(theta),
        PathAngles::Reflected {
            incident,
            reflected,
        } => CouplingMatrix::nlos(
            incident,
            reflected,
            reflection.expect("reflected path requires reflection coefficients"),
        ),
    }
}

fn reflection_for_tone(scenario: &Scenario, wavelength: f64) -> Option<ReflectionPair> {
    if scenario.is_nlos() {
        let eps = complex_permittivity(&scenario.material, wavelength);
        Some(reflection_coefficients(eps, scenario.incidence))
    } else {
        None
    }
}

/// One measurement from a coupling matrix. `rng: None` disables the noise
/// terms (the variances are still computed and reported).
fn measure<R: Rng>(
    scenario: &Scenario,
    params: &RadioParams,
    config: PolarizationConfig,
    coupling: &CouplingMatrix,
    wavelength: f64,
    rng: &mut Option<&mut R>,
) -> Measurement {
    let f_t = config.transmit_pattern();
    let f_r = config.receive_pattern();

    let Some(pol_phase) = polarization_phase(&f_r, coupling, &f_t) else {
        // No coupled signal: an information-free uniform phase.
        let phase = match rng {
            Some(rng) => rng.random_range(0.0..TAU),
            None => 0.0,
        };
        return Measurement {
            phase,
            noise_var: PHASE_VAR_CAP,
        };
    };

    // |E_r|² taken from the coupling magnitude directly: the unit propagation
    // phasor drops out exactly, so the variance never depends on d.
    let coupled = coupling.bilinear(&f_r, &f_t);
    let field_mag = (scenario.power_linear * VACUUM_IMPEDANCE).sqrt() * coupled.norm();
    let gamma = snr(
        Complex64::new(field_mag, 0.0),
        params.antenna_gain,
        wavelength,
        params.loop_bandwidth_hz,
        params.noise_density,
    );
    let noise_var =
        phase_noise_variance(gamma, params.integration_time_s, params.loop_bandwidth_hz);

    // The distance/clock term is common to every configuration of a tone.
    // Wrapping it, and the per-config residual, before the final addition
    // keeps both summands small, so the round-off of the later differentials
    // is independent of d and the clock offset.
    let common = wrap_tau(TAU * scenario.distance_m / wavelength + scenario.clock_offset);
    let mut residual = pol_phase;
    if let Some(rng) = rng {
        let z: f64 = rng.sample(StandardNormal);
        residual += noise_var.sqrt() * z;
        if scenario.is_nlos() {
            let z: f64 = rng.sample(StandardNormal);
            residual += scenario.scatter_var.sqrt() * z;
        }
    }
    Measurement {
        phase: wrap_tau(common + wrap_tau(residual)),
        noise_var,
    }
}

/// Synthesize the phase measurement of one configuration at one tone.
pub fn synthesize_measurement(
    scenario: &Scenario,
    params: &RadioParams,
    config: PolarizationConfig,
    tone_index: usize,
    rng: &mut impl Rng,
) -> Result<Measurement, GeometryError> {
    let wavelength = params.wavelength(tone_index);
    let angles = path_angles(scenario, config)?;
    let reflection = reflection_for_tone(scenario, wavelength);
    Ok(measure(
        scenario,
        params,
        config,
        &coupling_for(angles, reflection.as_ref()),
        wavelength,
        &mut Some(rng),
    ))
}

fn build_set<R: Rng>(
    scenario: &Scenario,
    params: &RadioParams,
    diversity: Diversity,
    mut rng: Option<&mut R>,
) -> Result<PhaseMeasurementSet, GeometryError> {
    // Per-config rotation angles are tone-independent; compute them once.
    let mut angles = [None; 4];
    for &c in diversity.active_configs() {
        angles[c] = Some(path_angles(scenario, PolarizationConfig::ALL[c])?);
    }

    let mut tones = Vec::with_capacity(params.num_tones);
    for tone in 0..params.num_tones {
        let wavelength = params.wavelength(tone);
        let reflection = reflection_for_tone(scenario, wavelength);
        let mut configs = [None; 4];
        for &c in diversity.active_configs() {
            let coupling = coupling_for(angles[c].unwrap(), reflection.as_ref());
            configs[c] = Some(measure(
                scenario,
                params,
                PolarizationConfig::ALL[c],
                &coupling,
                wavelength,
                &mut rng,
            ));
        }
        tones.push(ToneMeasurements { configs });
    }
    Ok(PhaseMeasurementSet { diversity, tones })
}

/// Synthesize one trial's measurements: one `(phase, variance)` per active
/// configuration per tone, with independent noise draws per entry.
///
/// Draw order is fixed (tones outer, configurations in `V,V V,H H,V H,H`
/// order) so a seeded RNG reproduces the set bit for bit.
pub fn measurement_set(
    scenario: &Scenario,
    params: &RadioParams,
    diversity: Diversity,
    rng: &mut impl Rng,
) -> Result<PhaseMeasurementSet, GeometryError> {
    build_set(scenario, params, diversity, Some(rng))
}

/// [`measurement_set`] with all noise terms disabled; the reported variances
/// still reflect the per-configuration SNR.
pub fn noiseless_measurement_set(
    scenario: &Scenario,
    params: &RadioParams,
    diversity: Diversity,
) -> Result<PhaseMeasurementSet, GeometryError> {
    build_set::<rand_chacha::ChaCha8Rng>(scenario, params, diversity, None)
}

/// Repeated phase observations of the `(V,V)` configuration, for classifiers
/// that threshold the sample variance of the phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSampleSeries {
    /// `num_tones` rows of `num_samples` wrapped phases each.
    pub tone_phases: Vec<Vec<f64>>,
    /// True tracking-noise variance per tone.
    pub noise_vars: Vec<f64>,
}

/// Sample `num_samples` phases of the `(V,V)` configuration per tone. The
/// tracking noise and (under NLOS) the scattering noise are redrawn for every
/// sample; the polarization, distance, and clock terms are fixed.
pub fn phaseu_sample_series(
    scenario: &Scenario,
    params: &RadioParams,
    num_samples: usize,
    rng: &mut impl Rng,
) -> Result<PhaseSampleSeries, GeometryError> {
    let config = PolarizationConfig::Vv;
    let angles = path_angles(scenario, config)?;
    let mut tone_phases = Vec::with_capacity(params.num_tones);
    let mut noise_vars = Vec::with_capacity(params.num_tones);
    for tone in 0..params.num_tones {
        let wavelength = params.wavelength(tone);
        let reflection = reflection_for_tone(scenario, wavelength);
        let coupling = coupling_for(angles, reflection.as_ref());
        let mut phases = Vec::with_capacity(num_samples);
        let mut var = PHASE_VAR_CAP;
        let mut draws = Some(&mut *rng);
        for _ in 0..num_samples {
            let m = measure(scenario, params, config, &coupling, wavelength, &mut draws);
            var = m.noise_var;
            phases.push(m.phase);
        }
        tone_phases.push(phases);
        noise_vars.push(var);
    }
    Ok(PhaseSampleSeries {
        tone_phases,
        noise_vars,
    })
}

#[cfg(test)]
pub(crate) fn sample_scenario_like(rng: &mut impl Rng, truth: Hypothesis) -> Scenario {
    use std::f64::consts::{FRAC_PI_2, PI};
    Scenario {
        truth,
        power_linear: 1e-10,
        distance_m: 10.0,
        clock_offset: rng.random_range(0.0..TAU),
        ue_rotation: EulerAngles::new(
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
        ),
        reflector_rotation: EulerAngles::new(
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
        ),
        incidence: rng.random_range(0.0..FRAC_PI_2),
        material: Material::new("distilled water", 4.0, 5.0),
        departure: DirectionAngles::new(
            rng.random_range(-PI..PI),
            rng.random_range(-FRAC_PI_2..FRAC_PI_2),
        ),
        arrival: DirectionAngles::new(
            rng.random_range(-PI..PI),
            rng.random_range(-FRAC_PI_2..FRAC_PI_2),
        ),
        scatter_var: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn received_field_examples() {
        let id = CouplingMatrix::los(0.0);
        // Distance a whole number of wavelengths: all phases cancel.
        let e = received_field(
            1e-10,
            2.0,
            0.01,
            &FieldPattern::VERTICAL,
            &id,
            &FieldPattern::VERTICAL,
        );
        let expected = (1e-10 * 120.0 * PI).sqrt();
        assert!((e.re - expected).abs() <= 1e-18 && e.im.abs() <= 1e-12);

        // Cross-polarized under identity coupling.
        let e = received_field(
            1e-10,
            2.0,
            0.01,
            &FieldPattern::VERTICAL,
            &id,
            &FieldPattern::HORIZONTAL,
        );
        assert_eq!(e, Complex64::ZERO);

        // |E_r| does not depend on the distance.
        let e1 = received_field(
            1e-10,
            3.3,
            0.01,
            &FieldPattern::VERTICAL,
            &id,
            &FieldPattern::VERTICAL,
        );
        let e2 = received_field(
            1e-10,
            77.7,
            0.01,
            &FieldPattern::VERTICAL,
            &id,
            &FieldPattern::VERTICAL,
        );
        assert!((e1.norm() - e2.norm()).abs() <= 1e-15);
    }

    #[test]
    fn snr_substitution_oracle() {
        assert_eq!(snr(Complex64::ZERO, 1.0, 0.01, 20.0, 1e-20), 0.0);

        let e = Complex64::new(2e-4, 1e-4);
        let doubled = snr(2.0 * e, 1.0, 0.01, 20.0, 1e-20) / snr(e, 1.0, 0.01, 20.0, 1e-20);
        assert!((doubled - 4.0).abs() <= 1e-12);

        // Spreadsheet-style evaluation with |E_r|² = P·120π at P = 1e-10.
        let e_mag_sq = 1e-10 * 120.0 * PI;
        let gamma = snr(
            Complex64::new(e_mag_sq.sqrt(), 0.0),
            1.0,
            0.01,
            20.0,
            10f64.powf(-20.38),
        );
        let expected = 1.0 * 0.01 * 0.01 * e_mag_sq / (480.0 * PI * PI * 20.0 * 10f64.powf(-20.38));
        assert!(
            (gamma / expected - 1.0).abs() <= 1e-12,
            "{gamma} vs {expected}"
        );
    }

    #[test]
    fn noise_variance_examples() {
        let v = phase_noise_variance(100.0, 0.01, 20.0);
        assert!((v - 0.0105).abs() <= 1e-15);

        assert!(phase_noise_variance(1e12, 0.01, 20.0) < 1e-11);
        assert_eq!(phase_noise_variance(0.0, 0.01, 20.0), PHASE_VAR_CAP);

        // Strictly decreasing on snr > 0.
        let mut last = f64::INFINITY;
        for k in 1..2000 {
            let v = phase_noise_variance(k as f64 * 0.05, 0.01, 20.0);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn polarization_phase_quadrants() {
        let with_entry = |z: Complex64| {
            CouplingMatrix([[z, Complex64::ZERO], [Complex64::ZERO, Complex64::ZERO]])
        };
        let v = FieldPattern::VERTICAL;
        assert_eq!(
            polarization_phase(&v, &with_entry(Complex64::new(0.7, 0.0)), &v),
            Some(0.0)
        );
        assert_eq!(
            polarization_phase(&v, &with_entry(Complex64::new(-0.7, 0.0)), &v),
            Some(PI)
        );
        assert_eq!(
            polarization_phase(&v, &with_entry(Complex64::new(0.0, 1.0)), &v),
            Some(FRAC_PI_2)
        );
        assert_eq!(
            polarization_phase(&v, &with_entry(Complex64::new(1e-15, 0.0)), &v),
            None
        );
    }

    #[test]
    fn noiseless_los_phases_are_binary() {
        // Zero Euler rotation with a generic arrival keeps all four configs
        // non-degenerate; a distance that is an exact multiple of the
        // wavelength and zero clock offset make the common term vanish.
        let mut scenario = sample_scenario_like(&mut ChaCha8Rng::seed_from_u64(1), Hypothesis::Los);
        scenario.ue_rotation = EulerAngles::ZERO;
        scenario.arrival = DirectionAngles::new(FRAC_PI_4, 0.0);
        scenario.clock_offset = 0.0;
        let params = RadioParams::default();
        scenario.distance_m = params.wavelength(0) * 1000.0;

        let set = noiseless_measurement_set(&scenario, &params, Diversity::Full).unwrap();
        for m in set.tones[0].configs.iter().flatten() {
            let near_zero = m.phase.min(TAU - m.phase) <= 1e-9;
            let near_pi = (m.phase - PI).abs() <= 1e-9;
            assert!(near_zero || near_pi, "phase {}", m.phase);
        }
    }

    #[test]
    fn distance_shifts_all_configs_equally() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let scenario = sample_scenario_like(&mut rng, Hypothesis::Los);
        let mut shifted = scenario.clone();
        shifted.distance_m = 123.456;
        shifted.clock_offset = wrap_tau(scenario.clock_offset + 1.0);
        let params = RadioParams::default();

        let a = noiseless_measurement_set(&scenario, &params, Diversity::Full).unwrap();
        let b = noiseless_measurement_set(&shifted, &params, Diversity::Full).unwrap();
        let deltas: Vec<f64> = (0..4)
            .map(|c| {
                wrap_tau(
                    b.tones[0].configs[c].unwrap().phase - a.tones[0].configs[c].unwrap().phase,
                )
            })
            .collect();
        for d in &deltas[1..] {
            assert!(wrap_pi(d - deltas[0]).abs() <= 1e-9, "deltas {deltas:?}");
        }
    }

    #[test]
    fn reflected_path_phases_leave_the_binary_set() {
        // A lossy reflector couples complex coefficients into the phase.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut off_binary = 0;
        for _ in 0..50 {
            let mut scenario = sample_scenario_like(&mut rng, Hypothesis::Nlos);
            scenario.clock_offset = 0.0;
            let params = RadioParams::default();
            let common = wrap_tau(TAU * scenario.distance_m / params.wavelength(0));
            let set = noiseless_measurement_set(&scenario, &params, Diversity::Full).unwrap();
            for m in set.tones[0].configs.iter().flatten() {
                let residual = wrap_pi(m.phase - common);
                if residual.abs() > 1e-3 && (residual.abs() - PI).abs() > 1e-3 {
                    off_binary += 1;
                }
            }
        }
        assert!(
            off_binary > 0,
            "water reflections never produced non-binary phases"
        );
    }

    #[test]
    fn grazing_reflection_measures_like_a_direct_path() {
        // At grazing incidence both reflection coefficients are exactly -1,
        // so every configuration's phase equals the direct-path phase of the
        // summed hop rotation shifted by π, and the differentials agree.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = RadioParams::default();
        for _ in 0..200 {
            let mut scenario = sample_scenario_like(&mut rng, Hypothesis::Nlos);
            scenario.incidence = FRAC_PI_2;
            let set = noiseless_measurement_set(&scenario, &params, Diversity::Full).unwrap();

            let mut direct_phases = [0.0; 4];
            for config in PolarizationConfig::ALL {
                let PathAngles::Reflected {
                    incident,
                    reflected,
                } = path_angles(&scenario, config).unwrap()
                else {
                    panic!("expected a reflected path");
                };
                let coupling = CouplingMatrix::los(incident + reflected);
                let pol_phase = polarization_phase(
                    &config.receive_pattern(),
                    &coupling,
                    &config.transmit_pattern(),
                )
                .unwrap();
                let common = wrap_tau(
                    TAU * scenario.distance_m / params.wavelength(0) + scenario.clock_offset,
                );
                direct_phases[config.index()] = wrap_tau(common + wrap_tau(pol_phase));

                let measured = set.tones[0].configs[config.index()].unwrap().phase;
                let shift = wrap_pi(measured - direct_phases[config.index()]);
                assert!((shift.abs() - PI).abs() <= 1e-9, "phase shift {shift}");
            }

            // The global π shift cancels in every pairwise differential.
            for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                let measured = wrap_pi(
                    set.tones[0].configs[a].unwrap().phase - set.tones[0].configs[b].unwrap().phase,
                );
                let direct = wrap_pi(direct_phases[a] - direct_phases[b]);
                assert!(wrap_pi(measured - direct).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn measurement_counts_match_diversity_and_tones() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scenario = sample_scenario_like(&mut rng, Hypothesis::Los);

        let params = RadioParams::default();
        let set = measurement_set(&scenario, &params, Diversity::Full, &mut rng).unwrap();
        assert_eq!(set.tones.len(), 1);
        assert_eq!(set.tones[0].configs.iter().flatten().count(), 4);

        let params = RadioParams {
            num_tones: 3,
            ..RadioParams::default()
        };
        let set = measurement_set(&scenario, &params, Diversity::Receive, &mut rng).unwrap();
        assert_eq!(set.tones.len(), 3);
        let per_tone: Vec<usize> = set
            .tones
            .iter()
            .map(|t| t.configs.iter().flatten().count())
            .collect();
        assert_eq!(per_tone, vec![2, 2, 2]);
        assert!(set.tones[0].configs[1].is_some() && set.tones[0].configs[3].is_some());
    }

    #[test]
    fn fixed_seed_reproduces_the_set_bitwise() {
        let scenario = sample_scenario_like(&mut ChaCha8Rng::seed_from_u64(5), Hypothesis::Nlos);
        let params = RadioParams {
            num_tones: 2,
            ..RadioParams::default()
        };
        let a = measurement_set(
            &scenario,
            &params,
            Diversity::Full,
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        let b = measurement_set(
            &scenario,
            &params,
            Diversity::Full,
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phases_always_lie_in_the_wrap_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for i in 0..2000 {
            let truth = if i % 2 == 0 {
                Hypothesis::Los
            } else {
                Hypothesis::Nlos
            };
            let mut scenario = sample_scenario_like(&mut rng, truth);
            scenario.scatter_var = 1e-2;
            scenario.power_linear = 10f64.powf(rng.random_range(-14.0..-7.0));
            let Ok(set) = measurement_set(
                &scenario,
                &RadioParams::default(),
                Diversity::Full,
                &mut rng,
            ) else {
                continue;
            };
            for m in set.tones[0].configs.iter().flatten() {
                assert!((0.0..TAU).contains(&m.phase));
                assert!(m.noise_var > 0.0);
            }
        }
    }

    #[test]
    fn direct_path_polarization_phase_is_binary_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..10_000 {
            let scenario = sample_scenario_like(&mut rng, Hypothesis::Los);
            for config in PolarizationConfig::ALL {
                let Ok(PathAngles::Direct(theta)) = path_angles(&scenario, config) else {
                    continue;
                };
                let m = CouplingMatrix::los(theta);
                let coupled = m.bilinear(&config.receive_pattern(), &config.transmit_pattern());
                assert_eq!(coupled.im, 0.0);
                if let Some(phase) =
                    polarization_phase(&config.receive_pattern(), &m, &config.transmit_pattern())
                {
                    assert!(phase == 0.0 || phase == PI);
                    checked += 1;
                }
            }
        }
        assert!(checked > 30_000);
    }

    #[test]
    fn noise_variance_is_invariant_to_distance_and_clock() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let scenario = sample_scenario_like(&mut rng, Hypothesis::Nlos);
        let mut moved = scenario.clone();
        moved.distance_m = 500.0;
        moved.clock_offset = 0.123;
        let params = RadioParams::default();
        let a = noiseless_measurement_set(&scenario, &params, Diversity::Full).unwrap();
        let b = noiseless_measurement_set(&moved, &params, Diversity::Full).unwrap();
        for c in 0..4 {
            assert_eq!(
                a.tones[0].configs[c].unwrap().noise_var,
                b.tones[0].configs[c].unwrap().noise_var
            );
        }
    }

    #[test]
    fn empirical_noise_variance_matches_the_model() {
        // The synthesis path draws standard normals scaled by σ; 1e5 draws at
        // σ² = 0.01 must land within 3%.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let sigma = 0.1;
        let n = 100_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let x = sigma * z;
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!((var / 0.01 - 1.0).abs() <= 0.03, "sample variance {var}");
    }

    #[test]
    fn perturbed_variances_change_only_the_variances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scenario = sample_scenario_like(&mut rng, Hypothesis::Los);
        let set = measurement_set(
            &scenario,
            &RadioParams::default(),
            Diversity::Full,
            &mut rng,
        )
        .unwrap();
        let jittered = set.with_perturbed_variances(0.3, &mut rng);
        for c in 0..4 {
            let (a, b) = (
                set.tones[0].configs[c].unwrap(),
                jittered.tones[0].configs[c].unwrap(),
            );
            assert_eq!(a.phase, b.phase);
            assert_ne!(a.noise_var, b.noise_var);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Wrapping puts any finite angle in range and respects the
            // 2π equivalence class.
            #[test]
            fn wrapping_ranges_and_equivalence(x in -1e6f64..1e6) {
                let tau = wrap_tau(x);
                prop_assert!((0.0..TAU).contains(&tau));
                let pi = wrap_pi(x);
                prop_assert!(pi > -PI && pi <= PI);
                let shifted = wrap_tau(x + TAU);
                prop_assert!((tau - shifted).abs() <= 1e-9 || (tau - shifted).abs() >= TAU - 1e-9);
            }

            // The variance model decreases with SNR and stays positive.
            #[test]
            fn variance_model_is_positive_and_decreasing(
                snr_lo in 1e-6f64..1e6,
                factor in 1.001f64..1e3,
            ) {
                let hi = phase_noise_variance(snr_lo * factor, 0.01, 20.0);
                let lo = phase_noise_variance(snr_lo, 0.01, 20.0);
                prop_assert!(hi > 0.0 && lo > 0.0);
                prop_assert!(hi < lo);
            }
        }
    }

    #[test]
    fn phaseu_series_shape_and_determinism() {
        let scenario = sample_scenario_like(&mut ChaCha8Rng::seed_from_u64(12), Hypothesis::Nlos);
        let params = RadioParams {
            num_tones: 2,
            ..RadioParams::default()
        };
        let a = phaseu_sample_series(&scenario, &params, 25, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        let b = phaseu_sample_series(&scenario, &params, 25, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tone_phases.len(), 2);
        assert_eq!(a.tone_phases[0].len(), 25);
        assert_eq!(a.noise_vars.len(), 2);
    }
}
