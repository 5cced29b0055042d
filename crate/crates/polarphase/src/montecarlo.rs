//! Scenario sampling, trial execution, error-rate metrics, brute-force
//! threshold optimization, and parameter sweeps.
//!
//! Trials are independent and reproducible: trial `t` of a run with master
//! seed `s` draws from dedicated ChaCha streams keyed by `(s, t, lane)`, so
//! results are bitwise identical for any worker count, and every classifier
//! variant of a trial sees the same scenario and the same noise draws (paired
//! comparisons). Statistics are computed once per trial; thresholds are
//! applied afterwards, which makes threshold sweeps essentially free.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::{decision_statistic, phaseu_statistic, Weighting, PHASEU_DEFAULT_SAMPLES};
use crate::error::MonteCarloError;
use crate::geometry::{DirectionAngles, EulerAngles};
use crate::measurement::{
    measurement_set, path_angles, phaseu_sample_series, Diversity, Hypothesis, PolarizationConfig,
    RadioParams, Scenario,
};
use crate::polarization::{find_material, Material};

use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Resample attempts before a trial gives up on degenerate geometry.
pub const MAX_DEGENERATE_RESAMPLES: u32 = 100;

const LANE_SCENARIO: u64 = 0;
const LANE_MEASUREMENT: u64 = 1;
const LANE_PHASEU: u64 = 2;
const LANES_PER_TRIAL: u64 = 4;

/// Independent RNG for one lane of one trial.
fn lane_rng(seed: u64, trial: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(LANES_PER_TRIAL).wrapping_add(lane));
    rng
}

/// Log-spaced decision-threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        // Covers every optimum seen across the power/scatter/tone sweeps with
        // margin on both sides.
        Self {
            min: 1e-6,
            max: 10.0,
            points: 60,
        }
    }
}

impl ThresholdGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let log_min = self.min.log10();
        let step = (self.max.log10() - log_min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| 10f64.powf(log_min + k as f64 * step))
            .collect()
    }
}

/// How the reflector material of an NLOS trial is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum MaterialPolicy {
    /// Every NLOS trial uses the named material.
    Fixed(String),
    /// Every NLOS trial draws uniformly from the material table.
    RandomFromTable,
}

/// Full description of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub num_trials: usize,
    pub seed: u64,
    /// Prior probability of NLOS.
    pub prior_nlos: f64,
    /// Path power gain, linear.
    pub power_linear: f64,
    pub material_policy: MaterialPolicy,
    /// Material table used for lookups and random draws.
    pub materials: Vec<Material>,
    /// Scattering phase-noise power σ̄̄² in rad².
    pub scatter_var: f64,
    pub xi_grid: ThresholdGrid,
    pub radio: RadioParams,
    /// Samples per tone for the phase-variance baseline.
    pub phaseu_samples: usize,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    /// Distance traveled by the tone in meters.
    pub distance_m: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            num_trials: 20_000,
            seed: 1,
            prior_nlos: 0.5,
            power_linear: 1e-10,
            material_policy: MaterialPolicy::RandomFromTable,
            materials: Material::builtin_table(),
            scatter_var: 0.0,
            xi_grid: ThresholdGrid::default(),
            radio: RadioParams::default(),
            phaseu_samples: PHASEU_DEFAULT_SAMPLES,
            workers: None,
            distance_m: 10.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), MonteCarloError> {
        if self.num_trials == 0 {
            return Err(MonteCarloError::NoTrials);
        }
        let invalid = |msg: String| Err(MonteCarloError::InvalidConfig(msg));
        if !(self.prior_nlos > 0.0 && self.prior_nlos < 1.0) {
            return invalid(format!("prior must lie in (0, 1), got {}", self.prior_nlos));
        }
        if self.power_linear <= 0.0 || self.power_linear.is_nan() {
            return invalid(format!("power must be positive, got {}", self.power_linear));
        }
        if self.scatter_var < 0.0 || self.scatter_var.is_nan() {
            return invalid(format!(
                "scatter variance must be >= 0, got {}",
                self.scatter_var
            ));
        }
        if self.distance_m <= 0.0 || self.distance_m.is_nan() {
            return invalid(format!(
                "distance must be positive, got {}",
                self.distance_m
            ));
        }
        if self.xi_grid.points == 0
            || self.xi_grid.min <= 0.0
            || self.xi_grid.min.is_nan()
            || self.xi_grid.max < self.xi_grid.min
        {
            return invalid("threshold grid needs points >= 1 and 0 < min <= max".to_string());
        }
        if self.phaseu_samples < 2 {
            return invalid("phaseu_samples must be >= 2".to_string());
        }
        if self.materials.is_empty() {
            return invalid("material table is empty".to_string());
        }
        if let MaterialPolicy::Fixed(name) = &self.material_policy {
            find_material(name, &self.materials)
                .map_err(|e| MonteCarloError::InvalidConfig(e.to_string()))?;
        }
        self.radio
            .validate()
            .map_err(MonteCarloError::InvalidConfig)
    }

    pub fn power_db(&self) -> f64 {
        10.0 * self.power_linear.log10()
    }
}

/// One classifier configuration evaluated per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Weighted {
        weighting: Weighting,
        diversity: Diversity,
    },
    PhaseU,
}

impl Variant {
    pub fn weighted(weighting: Weighting, diversity: Diversity) -> Self {
        Variant::Weighted {
            weighting,
            diversity,
        }
    }

    /// The six variants reported by the stock sweeps: the three weightings
    /// under full diversity, both limited-diversity systems, and the
    /// phase-variance baseline.
    pub fn standard_set() -> Vec<Variant> {
        vec![
            Variant::weighted(Weighting::Equ, Diversity::Full),
            Variant::weighted(Weighting::Mnv, Diversity::Full),
            Variant::weighted(Weighting::Nvp, Diversity::Full),
            Variant::weighted(Weighting::Nvp, Diversity::Transmit),
            Variant::weighted(Weighting::Nvp, Diversity::Receive),
            Variant::PhaseU,
        ]
    }

    pub fn label(&self) -> String {
        match self {
            Variant::Weighted {
                weighting,
                diversity,
            } => format!("{weighting}-{diversity}"),
            Variant::PhaseU => "phaseu".to_string(),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "phaseu" {
            return Ok(Variant::PhaseU);
        }
        let (w, d) = lower
            .split_once('-')
            .ok_or_else(|| format!("expected <weighting>-<diversity> or 'phaseu', got '{s}'"))?;
        let weighting = match w {
            "equ" => Weighting::Equ,
            "mnv" => Weighting::Mnv,
            "nvp" => Weighting::Nvp,
            _ => return Err(format!("unknown weighting '{w}'")),
        };
        let diversity = match d {
            "full" => Diversity::Full,
            "tx" => Diversity::Transmit,
            "rx" => Diversity::Receive,
            _ => return Err(format!("unknown diversity '{d}'")),
        };
        Ok(Variant::weighted(weighting, diversity))
    }
}

/// Sample the world instance of trial `trial_index`.
///
/// Draw order is fixed: truth, receiver rotation, reflector rotation,
/// incidence, departure, arrival, clock offset, then (only under a random
/// material policy) the material index. Geometry whose polarization
/// projection degenerates for any configuration is resampled; the second
/// field of the result counts those resamples.
pub fn sample_scenario(
    cfg: &ExperimentConfig,
    trial_index: u64,
) -> Result<(Scenario, u32), MonteCarloError> {
    let mut rng = lane_rng(cfg.seed, trial_index, LANE_SCENARIO);
    let mut resamples = 0;
    loop {
        let truth = if rng.random::<f64>() < cfg.prior_nlos {
            Hypothesis::Nlos
        } else {
            Hypothesis::Los
        };
        let mut euler = || {
            EulerAngles::new(
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            )
        };
        let ue_rotation = euler();
        let reflector_rotation = euler();
        let incidence = rng.random_range(0.0..FRAC_PI_2);
        let departure = DirectionAngles::new(
            rng.random_range(-PI..PI),
            rng.random_range(-FRAC_PI_2..FRAC_PI_2),
        );
        let arrival = DirectionAngles::new(
            rng.random_range(-PI..PI),
            rng.random_range(-FRAC_PI_2..FRAC_PI_2),
        );
        let clock_offset = rng.random_range(0.0..TAU);
        let material = match &cfg.material_policy {
            MaterialPolicy::Fixed(name) => find_material(name, &cfg.materials)
                .map_err(|e| MonteCarloError::InvalidConfig(e.to_string()))?
                .clone(),
            MaterialPolicy::RandomFromTable => {
                cfg.materials[rng.random_range(0..cfg.materials.len())].clone()
            }
        };

        let scenario = Scenario {
            truth,
            power_linear: cfg.power_linear,
            distance_m: cfg.distance_m,
            clock_offset,
            ue_rotation,
            reflector_rotation,
            incidence,
            material,
            departure,
            arrival,
            scatter_var: cfg.scatter_var,
        };

        let degenerate = PolarizationConfig::ALL
            .iter()
            .any(|&c| path_angles(&scenario, c).is_err());
        if !degenerate {
            return Ok((scenario, resamples));
        }
        resamples += 1;
        if resamples >= MAX_DEGENERATE_RESAMPLES {
            return Err(MonteCarloError::DegenerateScenarioExhausted(resamples));
        }
    }
}

/// Per-trial decision statistics of a run, one row per variant.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub variants: Vec<Variant>,
    pub truths: Vec<Hypothesis>,
    /// `stats[v][t]` is the statistic of variant `v` at trial `t`.
    pub stats: Vec<Vec<f64>>,
    /// Total scenario resamples caused by degenerate geometry.
    pub degenerate_resamples: u64,
}

fn execute_trial(
    cfg: &ExperimentConfig,
    variants: &[Variant],
    trial: u64,
) -> Result<(Hypothesis, Vec<f64>, u32), MonteCarloError> {
    let (scenario, resamples) = sample_scenario(cfg, trial)?;
    let mut measurement_rng = lane_rng(cfg.seed, trial, LANE_MEASUREMENT);
    // The full set is synthesized once; limited-diversity variants zero the
    // masked entries through their weights, so all variants are paired.
    let set = measurement_set(&scenario, &cfg.radio, Diversity::Full, &mut measurement_rng)
        .expect("scenario was validated against degenerate projections");

    let stats = variants
        .iter()
        .map(|variant| match variant {
            Variant::Weighted {
                weighting,
                diversity,
            } => decision_statistic(&set, &weighting.build(&set, *diversity)).0,
            Variant::PhaseU => {
                let mut rng = lane_rng(cfg.seed, trial, LANE_PHASEU);
                let series =
                    phaseu_sample_series(&scenario, &cfg.radio, cfg.phaseu_samples, &mut rng)
                        .expect("scenario was validated against degenerate projections");
                phaseu_statistic(&series)
            }
        })
        .collect();
    Ok((scenario.truth, stats, resamples))
}

/// Run `cfg.num_trials` independent trials and collect one decision statistic
/// per requested variant per trial. Deterministic for a fixed seed and
/// config, regardless of the worker count.
pub fn run_trials(
    cfg: &ExperimentConfig,
    variants: &[Variant],
) -> Result<TrialTable, MonteCarloError> {
    cfg.validate()?;
    if variants.is_empty() {
        return Err(MonteCarloError::InvalidConfig(
            "no classifier variants requested".into(),
        ));
    }

    let run = || -> Result<Vec<(Hypothesis, Vec<f64>, u32)>, MonteCarloError> {
        (0..cfg.num_trials as u64)
            .into_par_iter()
            .map(|t| execute_trial(cfg, variants, t))
            .collect()
    };
    let rows = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| MonteCarloError::InvalidConfig(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    }?;

    let mut truths = Vec::with_capacity(rows.len());
    let mut stats = vec![Vec::with_capacity(rows.len()); variants.len()];
    let mut degenerate_resamples = 0u64;
    for (truth, row, resamples) in rows {
        truths.push(truth);
        for (v, s) in row.into_iter().enumerate() {
            stats[v].push(s);
        }
        degenerate_resamples += resamples as u64;
    }
    Ok(TrialTable {
        variants: variants.to_vec(),
        truths,
        stats,
        degenerate_resamples,
    })
}

/// Error rates of one classifier at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsPoint {
    /// Probability of declaring NLOS given LOS.
    pub pmd: f64,
    /// Probability of declaring LOS given NLOS.
    pub pfa: f64,
    /// Prior-weighted average error rate.
    pub aer: f64,
    pub n_los: usize,
    pub n_nlos: usize,
}

impl MetricsPoint {
    /// Binomial standard errors of (pmd, pfa).
    pub fn standard_errors(&self) -> (f64, f64) {
        let se = |p: f64, n: usize| (p * (1.0 - p) / n as f64).sqrt();
        (se(self.pmd, self.n_los), se(self.pfa, self.n_nlos))
    }
}

/// Empirical miss/false-alarm/average error rates at threshold `xi`.
pub fn metrics(
    stats: &[f64],
    truths: &[Hypothesis],
    prior_nlos: f64,
    xi: f64,
) -> Result<MetricsPoint, MonteCarloError> {
    assert_eq!(stats.len(), truths.len());
    let (mut n_los, mut n_nlos, mut miss, mut false_alarm) = (0usize, 0usize, 0usize, 0usize);
    for (s, truth) in stats.iter().zip(truths) {
        match truth {
            Hypothesis::Los => {
                n_los += 1;
                if *s > xi {
                    miss += 1;
                }
            }
            Hypothesis::Nlos => {
                n_nlos += 1;
                if *s <= xi {
                    false_alarm += 1;
                }
            }
        }
    }
    if n_los == 0 {
        return Err(MonteCarloError::MissingClass("los"));
    }
    if n_nlos == 0 {
        return Err(MonteCarloError::MissingClass("nlos"));
    }
    let pmd = miss as f64 / n_los as f64;
    let pfa = false_alarm as f64 / n_nlos as f64;
    let aer = (1.0 - prior_nlos) * pmd + prior_nlos * pfa;
    Ok(MetricsPoint {
        pmd,
        pfa,
        aer,
        n_los,
        n_nlos,
    })
}

/// Brute-force grid search for the threshold minimizing the average error
/// rate; ties resolve toward the larger threshold (favoring LOS detection).
pub fn optimize_threshold(
    stats: &[f64],
    truths: &[Hypothesis],
    prior_nlos: f64,
    grid: &[f64],
) -> Result<(f64, f64), MonteCarloError> {
    if grid.is_empty() {
        return Err(MonteCarloError::EmptyGrid);
    }
    let mut best: Option<(f64, f64)> = None;
    for &xi in grid {
        let point = metrics(stats, truths, prior_nlos, xi)?;
        if best.is_none_or(|(_, aer)| point.aer <= aer) {
            best = Some((xi, point.aer));
        }
    }
    Ok(best.unwrap())
}

/// The varying axis of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Sweep the decision threshold over the config's grid; one simulation.
    Threshold,
    /// Sweep the path power gain over the given dB values.
    PowerDb(Vec<f64>),
    /// Sweep the scattering phase-noise power (rad²).
    ScatterVar(Vec<f64>),
    /// Sweep the number of transmitted tones.
    Tones(Vec<usize>),
}

/// One output row of a sweep: the error rates of one variant at one axis
/// point, plus the optimal threshold over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub variant: String,
    pub pmd: f64,
    pub pfa: f64,
    pub aer: f64,
    pub xi_opt: f64,
    pub aer_opt: f64,
    pub n_trials: usize,
    pub seed: u64,
}

fn rows_at_optimum(
    cfg: &ExperimentConfig,
    table: &TrialTable,
    grid: &[f64],
    axis: f64,
) -> Result<Vec<SweepRow>, MonteCarloError> {
    table
        .variants
        .iter()
        .zip(&table.stats)
        .map(|(variant, stats)| {
            let (xi_opt, aer_opt) = optimize_threshold(stats, &table.truths, cfg.prior_nlos, grid)?;
            let point = metrics(stats, &table.truths, cfg.prior_nlos, xi_opt)?;
            Ok(SweepRow {
                axis,
                variant: variant.label(),
                pmd: point.pmd,
                pfa: point.pfa,
                aer: point.aer,
                xi_opt,
                aer_opt,
                n_trials: cfg.num_trials,
                seed: cfg.seed,
            })
        })
        .collect()
}

/// Run the sweep: one row per axis point per variant. The same master seed is
/// reused at every axis point, so curves are paired across the axis.
pub fn sweep(
    cfg: &ExperimentConfig,
    axis: &SweepAxis,
    variants: &[Variant],
) -> Result<Vec<SweepRow>, MonteCarloError> {
    let grid = cfg.xi_grid.values();
    match axis {
        SweepAxis::Threshold => {
            let table = run_trials(cfg, variants)?;
            let mut rows = Vec::with_capacity(grid.len() * variants.len());
            let optima: Vec<(f64, f64)> = table
                .stats
                .iter()
                .map(|stats| optimize_threshold(stats, &table.truths, cfg.prior_nlos, &grid))
                .collect::<Result<_, _>>()?;
            for &xi in &grid {
                for ((variant, stats), (xi_opt, aer_opt)) in
                    table.variants.iter().zip(&table.stats).zip(&optima)
                {
                    let point = metrics(stats, &table.truths, cfg.prior_nlos, xi)?;
                    rows.push(SweepRow {
                        axis: xi,
                        variant: variant.label(),
                        pmd: point.pmd,
                        pfa: point.pfa,
                        aer: point.aer,
                        xi_opt: *xi_opt,
                        aer_opt: *aer_opt,
                        n_trials: cfg.num_trials,
                        seed: cfg.seed,
                    });
                }
            }
            Ok(rows)
        }
        SweepAxis::PowerDb(points) => {
            if points.is_empty() {
                return Err(MonteCarloError::EmptyGrid);
            }
            let mut rows = Vec::new();
            for &db in points {
                let point_cfg = ExperimentConfig {
                    power_linear: 10f64.powf(db / 10.0),
                    ..cfg.clone()
                };
                let table = run_trials(&point_cfg, variants)?;
                rows.extend(rows_at_optimum(&point_cfg, &table, &grid, db)?);
            }
            Ok(rows)
        }
        SweepAxis::ScatterVar(points) => {
            if points.is_empty() {
                return Err(MonteCarloError::EmptyGrid);
            }
            let mut rows = Vec::new();
            for &var in points {
                let point_cfg = ExperimentConfig {
                    scatter_var: var,
                    ..cfg.clone()
                };
                let table = run_trials(&point_cfg, variants)?;
                rows.extend(rows_at_optimum(&point_cfg, &table, &grid, var)?);
            }
            Ok(rows)
        }
        SweepAxis::Tones(points) => {
            if points.is_empty() {
                return Err(MonteCarloError::EmptyGrid);
            }
            let mut rows = Vec::new();
            for &tones in points {
                let point_cfg = ExperimentConfig {
                    radio: RadioParams {
                        num_tones: tones,
                        ..cfg.radio.clone()
                    },
                    ..cfg.clone()
                };
                let table = run_trials(&point_cfg, variants)?;
                rows.extend(rows_at_optimum(&point_cfg, &table, &grid, tones as f64)?);
            }
            Ok(rows)
        }
    }
}
