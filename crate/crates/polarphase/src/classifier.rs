//! The weighted differential-phase decision statistic and decision rule.
//!
//! Pairwise differences of the measured phases across polarization
//! configurations cancel the common distance and clock terms. Under a direct
//! path the polarization-induced phases are 0 or π, so one of a small set of
//! π-offset patterns drives the differential vector to zero; under a
//! reflected path the complex reflection coefficients leave a nonzero
//! residual. The decision statistic is the minimum, over the feasible
//! patterns, of the squared weighted norm of the differential vector, stacked
//! across tones; it is compared against a threshold `ξ`.

use crate::measurement::{
    wrap_pi, wrap_tau, Diversity, Hypothesis, PhaseMeasurementSet, PhaseSampleSeries,
    ToneMeasurements,
};

/// Configuration index pairs of the six differential entries, in the order
/// `VV-VH, VV-HV, VV-HH, VH-HV, VH-HH, HV-HH` (indices into
/// [`crate::measurement::PolarizationConfig::ALL`]).
pub const DIFFERENTIAL_PAIRS: [(usize, usize); 6] =
    [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Indices of the π-offset patterns that can cancel a direct path's
/// differential vector. Of the 64 candidate patterns, exactly one of these
/// eight matches any direct-path sign configuration.
pub const RESTRICTED_NU_INDICES: [usize; 8] = [0, 11, 21, 30, 38, 45, 51, 56];

/// Number of samples per tone used by the phase-variance baseline.
pub const PHASEU_DEFAULT_SAMPLES: usize = 25;

/// The 6-bit binary pattern of `index`, most significant bit first.
///
/// Panics if `index > 63`.
pub fn nu_vector(index: usize) -> [u8; 6] {
    assert!(index < 64, "pattern index {index} out of range 0..=63");
    std::array::from_fn(|bit| ((index >> (5 - bit)) & 1) as u8)
}

/// The restricted pattern index set as a slice.
pub fn restricted_nu_set() -> &'static [usize] {
    &RESTRICTED_NU_INDICES
}

/// Differential vector of one tone for pattern `nu_index`: entry `j` is
/// `mod(φ_a - φ_b + π·ν[j], 2π)` re-wrapped to `(-π, π]`, so that noise of
/// either sign around an exact cancellation stays near zero instead of
/// jumping to 2π. Entries whose configurations are masked are zero.
pub fn differential_metric(tone: &ToneMeasurements, nu_index: usize) -> [f64; 6] {
    let nu = nu_vector(nu_index);
    std::array::from_fn(|j| {
        let (a, b) = DIFFERENTIAL_PAIRS[j];
        match (tone.configs[a], tone.configs[b]) {
            (Some(ma), Some(mb)) => {
                let offset = wrap_tau(ma.phase - mb.phase + std::f64::consts::PI * nu[j] as f64);
                wrap_pi(offset)
            }
            _ => 0.0,
        }
    })
}

/// Diagonal weights of the stacked differential vector, one row of six per
/// tone. Masked entries are exactly zero and the active entries satisfy
/// `Σ w² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub per_tone: Vec<[f64; 6]>,
}

impl WeightVector {
    pub fn norm_sqr(&self) -> f64 {
        self.per_tone.iter().flatten().map(|w| w * w).sum()
    }
}

/// Pairwise noise variances of one tone: entry `j` is the sum of the two
/// configuration variances forming differential `j`, or `None` if either
/// configuration is masked.
pub fn pairwise_variances(tone: &ToneMeasurements) -> [Option<f64>; 6] {
    std::array::from_fn(|j| {
        let (a, b) = DIFFERENTIAL_PAIRS[j];
        match (tone.configs[a], tone.configs[b]) {
            (Some(ma), Some(mb)) => Some(ma.noise_var + mb.noise_var),
            _ => None,
        }
    })
}

fn active_pairwise(set: &PhaseMeasurementSet, diversity: Diversity) -> Vec<[Option<f64>; 6]> {
    let active = diversity.active_differentials();
    set.tones
        .iter()
        .map(|tone| {
            let all = pairwise_variances(tone);
            let mut row = [None; 6];
            for &j in active {
                row[j] = Some(all[j].unwrap_or_else(|| {
                    panic!("differential {j} requires configurations missing from the set")
                }));
            }
            row
        })
        .collect()
}

/// Equal weighting: `1/sqrt(active_per_tone · tones)` on every active entry.
pub fn weights_equ(diversity: Diversity, num_tones: usize) -> WeightVector {
    let active = diversity.active_differentials();
    let w = 1.0 / ((active.len() * num_tones) as f64).sqrt();
    let mut row = [0.0; 6];
    for &j in active {
        row[j] = w;
    }
    WeightVector {
        per_tone: vec![row; num_tones],
    }
}

/// Minimum-noise-variance weighting: all weight on the single entry with the
/// globally smallest pairwise variance; ties resolve to the lowest tone, then
/// the lowest entry index.
pub fn weights_mnv(set: &PhaseMeasurementSet, diversity: Diversity) -> WeightVector {
    weights_mnv_from_variances(&active_pairwise(set, diversity))
}

/// [`weights_mnv`] on explicit per-tone pairwise variances.
pub fn weights_mnv_from_variances(pairwise: &[[Option<f64>; 6]]) -> WeightVector {
    let mut best: Option<(usize, usize, f64)> = None;
    for (t, row) in pairwise.iter().enumerate() {
        for (j, var) in row.iter().enumerate() {
            if let Some(v) = var {
                if best.is_none_or(|(_, _, b)| *v < b) {
                    best = Some((t, j, *v));
                }
            }
        }
    }
    let (bt, bj, _) = best.expect("no active differential entries");
    let mut per_tone = vec![[0.0; 6]; pairwise.len()];
    per_tone[bt][bj] = 1.0;
    WeightVector { per_tone }
}

/// Noise-variance-proportional weighting: `w = μ/σ` per active entry with
/// `μ = 1/sqrt(Σ σ^-2)`, where `σ` is the square root of the pairwise
/// variance. Noisy entries weigh less but are never dropped.
pub fn weights_nvp(set: &PhaseMeasurementSet, diversity: Diversity) -> WeightVector {
    let pairwise = active_pairwise(set, diversity);
    let sigmas: Vec<[Option<f64>; 6]> = pairwise
        .iter()
        .map(|row| row.map(|v| v.map(f64::sqrt)))
        .collect();
    weights_nvp_from_sigmas(&sigmas)
}

/// [`weights_nvp`] on explicit per-tone pairwise standard deviations.
pub fn weights_nvp_from_sigmas(sigmas: &[[Option<f64>; 6]]) -> WeightVector {
    let inv_sq_sum: f64 = sigmas
        .iter()
        .flatten()
        .flatten()
        .map(|s| 1.0 / (s * s))
        .sum();
    let mu = 1.0 / inv_sq_sum.sqrt();
    let per_tone = sigmas
        .iter()
        .map(|row| row.map(|s| s.map_or(0.0, |s| mu / s)))
        .collect();
    WeightVector { per_tone }
}

/// The three weighting schemes for the differential entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Equal weights, noise-agnostic.
    Equ,
    /// All weight on the minimum-variance entry.
    Mnv,
    /// Weights inversely proportional to the noise standard deviations.
    Nvp,
}

impl Weighting {
    /// Build the weight vector for `set` restricted to `diversity`'s entries.
    pub fn build(self, set: &PhaseMeasurementSet, diversity: Diversity) -> WeightVector {
        match self {
            Weighting::Equ => weights_equ(diversity, set.num_tones()),
            Weighting::Mnv => weights_mnv(set, diversity),
            Weighting::Nvp => weights_nvp(set, diversity),
        }
    }
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weighting::Equ => "equ",
            Weighting::Mnv => "mnv",
            Weighting::Nvp => "nvp",
        })
    }
}

/// Outcome of one classification.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecisionRecord {
    /// `min_i ‖W Δ̂_i‖²` in rad².
    pub statistic: f64,
    /// Pattern index attaining the minimum.
    pub nu_index: usize,
    pub decision: Hypothesis,
    /// Threshold `ξ` used, rad².
    pub threshold: f64,
    /// Ground truth, when known.
    pub truth: Option<Hypothesis>,
}

/// `min_i ‖W Δ̂_i‖²` over the restricted pattern set, with the same pattern
/// applied to every tone, and the index attaining it (lowest index on ties).
pub fn decision_statistic(set: &PhaseMeasurementSet, weights: &WeightVector) -> (f64, usize) {
    assert_eq!(
        weights.per_tone.len(),
        set.tones.len(),
        "weights do not match the tone count"
    );
    let mut best = (f64::INFINITY, 0);
    for &i in &RESTRICTED_NU_INDICES {
        let mut total = 0.0;
        for (tone, w_row) in set.tones.iter().zip(&weights.per_tone) {
            let delta = differential_metric(tone, i);
            for (w, d) in w_row.iter().zip(delta) {
                if *w != 0.0 {
                    total += (w * d) * (w * d);
                }
            }
        }
        if total < best.0 {
            best = (total, i);
        }
    }
    best
}

/// Threshold the decision statistic: LOS if `statistic ≤ ξ`, NLOS otherwise.
pub fn decide(set: &PhaseMeasurementSet, weights: &WeightVector, xi: f64) -> DecisionRecord {
    let (statistic, nu_index) = decision_statistic(set, weights);
    let decision = if statistic <= xi {
        Hypothesis::Los
    } else {
        Hypothesis::Nlos
    };
    DecisionRecord {
        statistic,
        nu_index,
        decision,
        threshold: xi,
        truth: None,
    }
}

/// Mean direction of a set of phases.
pub fn circular_mean(phases: &[f64]) -> f64 {
    let (sin_sum, cos_sum) = phases
        .iter()
        .fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
    sin_sum.atan2(cos_sum)
}

/// Sample variance of the residuals wrapped about the circular mean,
/// normalized by `n - 1`.
pub fn circular_sample_variance(phases: &[f64]) -> f64 {
    assert!(phases.len() >= 2, "variance needs at least two samples");
    let mean = circular_mean(phases);
    let sum_sq: f64 = phases.iter().map(|p| wrap_pi(p - mean).powi(2)).sum();
    sum_sq / (phases.len() - 1) as f64
}

/// Phase-variance baseline statistic: the per-tone circular sample variances
/// combined with weights proportional to the inverse true noise variances
/// (`Σ u_f = 1`).
pub fn phaseu_statistic(series: &PhaseSampleSeries) -> f64 {
    let inv_sum: f64 = series.noise_vars.iter().map(|v| 1.0 / v).sum();
    series
        .tone_phases
        .iter()
        .zip(&series.noise_vars)
        .map(|(phases, var)| (1.0 / var) / inv_sum * circular_sample_variance(phases))
        .sum()
}

/// Threshold the baseline statistic: LOS if it is at most `xi`.
pub fn phaseu_decide(series: &PhaseSampleSeries, xi: f64) -> (f64, Hypothesis) {
    let statistic = phaseu_statistic(series);
    let decision = if statistic <= xi {
        Hypothesis::Los
    } else {
        Hypothesis::Nlos
    };
    (statistic, decision)
}
