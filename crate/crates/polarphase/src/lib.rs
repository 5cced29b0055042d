//! Desk-scale simulator and threshold classifier for LOS/NLOS link
//! identification from polarization-diverse carrier-phase measurements.
//!
//! A transmitter sends a constant tone that is measured at the receiver over
//! up to four transmit/receive polarization configurations. Direct paths
//! rotate the polarization (a real coupling matrix), while single-bounce
//! reflections additionally apply complex, material-dependent reflection
//! coefficients. Differential phase measurements across the configurations
//! cancel the unknown distance and clock terms; a weighted squared norm of the
//! differentials, minimized over a small set of feasible π-offset patterns,
//! is compared to a threshold to declare LOS or NLOS.
//!
//! The crate is organized along the processing chain:
//!
//! - [`geometry`]: Euler rotations and the geometric polarization rotation
//!   angle between antennas.
//! - [`polarization`]: reflector materials, Fresnel reflection coefficients,
//!   and the direct/reflected coupling matrices.
//! - [`measurement`]: carrier-phase synthesis with SNR-dependent phase noise.
//! - [`classifier`]: the differential decision metric, weighting schemes, the
//!   decision rule, and a phase-variance baseline.
//! - [`montecarlo`]: scenario sampling, seeded parallel trial execution,
//!   error-rate metrics, threshold optimization, and parameter sweeps.
//! - [`cli`]: the command-line front end that drives the sweeps and emits CSV.
//!
//! Each major capability has a runnable example under `examples/`; start with
//! `classifier_demo` and `threshold_sweep`:
//!
//! ```bash
//! cargo run --release -p polarphase --example classifier_demo
//! cargo run --release -p polarphase --example threshold_sweep
//! ```
//!
//! # Quick start
//!
//! ```rust
//! use polarphase::montecarlo::{self, ExperimentConfig, Variant};
//! use polarphase::classifier::Weighting;
//! use polarphase::measurement::Diversity;
//!
//! let cfg = ExperimentConfig {
//!     num_trials: 2000,
//!     seed: 7,
//!     ..ExperimentConfig::default()
//! };
//! let variants = [Variant::weighted(Weighting::Nvp, Diversity::Full)];
//! let table = montecarlo::run_trials(&cfg, &variants).unwrap();
//! let (xi_opt, aer_opt) =
//!     montecarlo::optimize_threshold(&table.stats[0], &table.truths, cfg.prior_nlos,
//!                                    &cfg.xi_grid.values()).unwrap();
//! assert!(aer_opt < 0.5 && xi_opt > 0.0);
//! ```

pub mod classifier;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod measurement;
pub mod montecarlo;
pub mod polarization;

pub use error::{GeometryError, MaterialsError, MonteCarloError};

/// Propagation speed used for wavelength conversions, in m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
