//! Command-line front end: parse an experiment description, run the requested
//! sweep, and emit a CSV table plus a human-readable summary on stderr.
//!
//! Every sweep writes the same nine-column schema
//! (`axis,variant,pmd,pfa,aer,xi_opt,aer_opt,n_trials,seed`) with LF line
//! endings and floats at nine significant digits, so repeated seeded runs are
//! byte identical. A `--config` file supplies `key=value` defaults for the
//! same keys as the flags; explicit flags win.

use std::collections::HashMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::classifier::{decide, DecisionRecord, Weighting};
use crate::measurement::{
    measurement_set, Diversity, Hypothesis, Measurement, PhaseMeasurementSet, RadioParams,
    Scenario, ToneMeasurements,
};
use crate::montecarlo::{
    sweep, ExperimentConfig, MaterialPolicy, SweepAxis, SweepRow, ThresholdGrid, Variant,
};
use crate::polarization::{find_material, parse_materials_file, Material};

/// CSV header shared by all sweep outputs.
pub const CSV_HEADER: &str = "axis,variant,pmd,pfa,aer,xi_opt,aer_opt,n_trials,seed";

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl From<crate::MonteCarloError> for CliError {
    fn from(e: crate::MonteCarloError) -> Self {
        match e {
            crate::MonteCarloError::InvalidConfig(_)
            | crate::MonteCarloError::NoTrials
            | crate::MonteCarloError::EmptyGrid => CliError::Config(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "polarphase",
    version,
    about = "LOS/NLOS identification from polarization-diverse carrier-phase measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the decision threshold at a fixed power (error-rate curves).
    SweepThreshold(SweepThresholdArgs),
    /// Sweep the path power gain; reports the optimum per point.
    SweepPower(SweepPowerArgs),
    /// Sweep the NLOS scattering phase-noise power.
    SweepScatter(SweepScatterArgs),
    /// Sweep the number of transmitted tones.
    SweepTones(SweepTonesArgs),
    /// Classify a single trial described as JSON.
    ClassifyOne(ClassifyOneArgs),
    /// List the known reflector materials as CSV.
    Materials(MaterialsArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Number of Monte Carlo trials [default: 20000]
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; fully determines the output bytes [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Prior probability of NLOS [default: 0.5]
    #[arg(long)]
    prior: Option<f64>,
    /// Reflector material name, or 'random' to draw per trial [default: random]
    #[arg(long)]
    material: Option<String>,
    /// Smallest threshold of the log-spaced grid, rad² [default: 1e-6]
    #[arg(long)]
    xi_min: Option<f64>,
    /// Largest threshold of the grid, rad² [default: 10]
    #[arg(long)]
    xi_max: Option<f64>,
    /// Number of grid points [default: 60]
    #[arg(long)]
    xi_points: Option<usize>,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    workers: Option<usize>,
    /// Extra materials file: one name,eps_r,kappa per line, '#' comments
    #[arg(long)]
    materials_file: Option<PathBuf>,
    /// key=value file supplying defaults for these flags; flags override
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepThresholdArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Path power gain in dB [default: -100]
    #[arg(long, allow_negative_numbers = true)]
    power_db: Option<f64>,
    /// Scattering phase-noise power in rad² [default: 0]
    #[arg(long)]
    scatter_var: Option<f64>,
    /// Number of tones transmitted [default: 1]
    #[arg(long)]
    tones: Option<usize>,
    /// Weighting scheme: equ, mnv, or nvp [default: nvp]
    #[arg(long)]
    weighting: Option<String>,
    /// Polarization diversity: full, tx, or rx [default: full]
    #[arg(long)]
    diversity: Option<String>,
}

#[derive(Args, Debug)]
struct SweepPowerArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First power grid point in dB [default: -140]
    #[arg(long, allow_negative_numbers = true)]
    power_min_db: Option<f64>,
    /// Last power grid point in dB [default: -70]
    #[arg(long, allow_negative_numbers = true)]
    power_max_db: Option<f64>,
    /// Power grid step in dB [default: 5]
    #[arg(long)]
    power_step_db: Option<f64>,
    /// Scattering phase-noise power in rad² [default: 0]
    #[arg(long)]
    scatter_var: Option<f64>,
    /// Number of tones transmitted [default: 1]
    #[arg(long)]
    tones: Option<usize>,
    /// Comma-separated variants (<weighting>-<full|tx|rx> or phaseu), or 'all'
    #[arg(long)]
    variants: Option<String>,
}

#[derive(Args, Debug)]
struct SweepScatterArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Path power gain in dB [default: -100]
    #[arg(long, allow_negative_numbers = true)]
    power_db: Option<f64>,
    /// Comma-separated scatter variances in rad² [default: 1e-4,1e-3,1e-2,1e-1]
    #[arg(long)]
    scatter_grid: Option<String>,
    /// Number of tones transmitted [default: 1]
    #[arg(long)]
    tones: Option<usize>,
    /// Comma-separated variants, or 'all'
    #[arg(long)]
    variants: Option<String>,
}

#[derive(Args, Debug)]
struct SweepTonesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Path power gain in dB [default: -100]
    #[arg(long, allow_negative_numbers = true)]
    power_db: Option<f64>,
    /// Scattering phase-noise power in rad² [default: 1e-3]
    #[arg(long)]
    scatter_var: Option<f64>,
    /// Comma-separated tone counts [default: 1,2,4,8]
    #[arg(long)]
    tones_grid: Option<String>,
    /// Comma-separated variants, or 'all'
    #[arg(long)]
    variants: Option<String>,
}

#[derive(Args, Debug)]
struct ClassifyOneArgs {
    /// JSON trial description; see the README for the schema
    #[arg(long)]
    json: String,
    /// Extra materials file for material lookups
    #[arg(long)]
    materials_file: Option<PathBuf>,
    /// Output CSV path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MaterialsArgs {
    /// Extra materials file to include in the listing
    #[arg(long)]
    materials_file: Option<PathBuf>,
    /// Output CSV path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Keys accepted in `--config` files, across all subcommands.
const CONFIG_KEYS: &[&str] = &[
    "trials",
    "seed",
    "prior",
    "material",
    "xi-min",
    "xi-max",
    "xi-points",
    "workers",
    "materials-file",
    "out",
    "power-db",
    "scatter-var",
    "tones",
    "weighting",
    "diversity",
    "power-min-db",
    "power-max-db",
    "power-step-db",
    "scatter-grid",
    "tones-grid",
    "variants",
];

/// Defaults loaded from a `--config` file.
#[derive(Debug)]
struct FileDefaults(HashMap<String, String>);

impl FileDefaults {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut map = HashMap::new();
        let Some(path) = path else {
            return Ok(Self(map));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("--config: cannot read {}: {e}", path.display())))?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "--config: {}:{}: expected key=value",
                    path.display(),
                    idx + 1
                )));
            };
            let key = key.trim().to_string();
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "--config: {}:{}: unknown key '{key}'",
                    path.display(),
                    idx + 1
                )));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    /// Flag value if set, else the file value, else the default.
    fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => self.parse_key(key).map(|v| v.unwrap_or(default)),
        }
    }

    fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.parse_key(key),
        }
    }

    fn parse_key<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.0
            .get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|e| CliError::Config(format!("--config: key '{key}': {e}")))
            })
            .transpose()
    }
}

fn load_materials(file: Option<&Path>) -> Result<Vec<Material>, CliError> {
    let mut table = Material::builtin_table();
    if let Some(path) = file {
        let extra = parse_materials_file(&path.display().to_string())
            .map_err(|e| CliError::Config(format!("--materials-file: {e}")))?;
        for material in extra {
            // File entries shadow built-ins of the same name.
            table.retain(|m| !m.name.eq_ignore_ascii_case(&material.name));
            table.push(material);
        }
    }
    Ok(table)
}

fn parse_material_policy(raw: &str, table: &[Material]) -> Result<MaterialPolicy, CliError> {
    if raw.eq_ignore_ascii_case("random") {
        return Ok(MaterialPolicy::RandomFromTable);
    }
    let material =
        find_material(raw, table).map_err(|e| CliError::Config(format!("--material: {e}")))?;
    Ok(MaterialPolicy::Fixed(material.name.clone()))
}

fn parse_weighting(raw: &str) -> Result<Weighting, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "equ" => Ok(Weighting::Equ),
        "mnv" => Ok(Weighting::Mnv),
        "nvp" => Ok(Weighting::Nvp),
        other => Err(CliError::Config(format!(
            "--weighting: expected equ, mnv, or nvp, got '{other}'"
        ))),
    }
}

fn parse_diversity(raw: &str) -> Result<Diversity, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "full" => Ok(Diversity::Full),
        "tx" | "transmit" => Ok(Diversity::Transmit),
        "rx" | "receive" => Ok(Diversity::Receive),
        other => Err(CliError::Config(format!(
            "--diversity: expected full, tx, or rx, got '{other}'"
        ))),
    }
}

fn parse_variants(raw: &str) -> Result<Vec<Variant>, CliError> {
    if raw.eq_ignore_ascii_case("all") {
        return Ok(Variant::standard_set());
    }
    raw.split(',')
        .map(|item| {
            Variant::from_str(item).map_err(|e| CliError::Config(format!("--variants: {e}")))
        })
        .collect()
}

fn parse_list<T: FromStr>(raw: &str, flag: &str) -> Result<Vec<T>, CliError>
where
    T::Err: Display,
{
    raw.split(',')
        .map(|item| {
            item.trim()
                .parse::<T>()
                .map_err(|e| CliError::Config(format!("{flag}: bad entry '{item}': {e}")))
        })
        .collect()
}

struct ResolvedCommon {
    cfg: ExperimentConfig,
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<(ResolvedCommon, FileDefaults), CliError> {
        let file = FileDefaults::load(self.config.as_deref())?;

        let materials_file = match &self.materials_file {
            Some(p) => Some(p.clone()),
            None => file.parse_key::<PathBuf>("materials-file")?,
        };
        let materials = load_materials(materials_file.as_deref())?;

        let material_raw = file.resolve(self.material.clone(), "material", "random".to_string())?;
        let material_policy = parse_material_policy(&material_raw, &materials)?;

        let xi_grid = ThresholdGrid {
            min: file.resolve(self.xi_min, "xi-min", 1e-6)?,
            max: file.resolve(self.xi_max, "xi-max", 10.0)?,
            points: file.resolve(self.xi_points, "xi-points", 60)?,
        };

        let cfg = ExperimentConfig {
            num_trials: file.resolve(self.trials, "trials", 20_000)?,
            seed: file.resolve(self.seed, "seed", 1)?,
            prior_nlos: file.resolve(self.prior, "prior", 0.5)?,
            material_policy,
            materials,
            xi_grid,
            workers: file.resolve_opt(self.workers, "workers")?,
            ..ExperimentConfig::default()
        };

        let out = match &self.out {
            Some(p) => Some(p.clone()),
            None => file.parse_key::<PathBuf>("out")?,
        };
        Ok((ResolvedCommon { cfg, out }, file))
    }
}

fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// Serialize sweep rows as CSV. Refuses an empty table before touching the
/// destination.
pub fn emit_csv(rows: &[SweepRow], destination: Option<&Path>) -> Result<(), std::io::Error> {
    if rows.is_empty() {
        return Err(std::io::Error::other("refusing to write an empty table"));
    }
    let mut text = String::with_capacity(rows.len() * 96);
    text.push_str(CSV_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            format_float(row.axis),
            row.variant,
            format_float(row.pmd),
            format_float(row.pfa),
            format_float(row.aer),
            format_float(row.xi_opt),
            format_float(row.aer_opt),
            row.n_trials,
            row.seed,
        ));
    }
    write_output(&text, destination)
}

fn write_output(text: &str, destination: Option<&Path>) -> Result<(), std::io::Error> {
    match destination {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| std::io::Error::new(e.kind(), format!("writing {}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn print_summary(rows: &[SweepRow]) {
    let mut best: Vec<(String, &SweepRow)> = Vec::new();
    for row in rows {
        match best.iter_mut().find(|(label, _)| *label == row.variant) {
            Some((_, held)) if row.aer_opt >= held.aer_opt => {}
            Some((_, held)) => *held = row,
            None => best.push((row.variant.clone(), row)),
        }
    }
    for (label, row) in &best {
        eprintln!(
            "{label}: aer_opt={:.4} at xi_opt={:.3e} (axis={})",
            row.aer_opt, row.xi_opt, row.axis
        );
    }
}

/// Validate the experiment and report failures under the flag that set the
/// offending field.
fn check_config(cfg: &ExperimentConfig) -> Result<(), CliError> {
    cfg.validate().map_err(|e| {
        let msg = e.to_string();
        let flag = [
            ("num_trials", "--trials"),
            ("prior", "--prior"),
            ("threshold grid", "--xi-min/--xi-max/--xi-points"),
            ("num_tones", "--tones"),
            ("power", "--power-db"),
            ("scatter", "--scatter-var"),
            ("material", "--material"),
        ]
        .iter()
        .find(|(needle, _)| msg.contains(needle))
        .map(|(_, flag)| *flag);
        match flag {
            Some(flag) => CliError::Config(format!("{flag}: {msg}")),
            None => CliError::from(e),
        }
    })
}

fn run_sweep(
    cfg: &ExperimentConfig,
    axis: &SweepAxis,
    variants: &[Variant],
    out: Option<&Path>,
) -> Result<(), CliError> {
    check_config(cfg)?;
    let rows = sweep(cfg, axis, variants)?;
    emit_csv(&rows, out).map_err(|e| CliError::Io(e.to_string()))?;
    print_summary(&rows);
    Ok(())
}

fn db_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if step <= 0.0 {
        return Err(CliError::Config(format!(
            "--power-step-db must be positive, got {step}"
        )));
    }
    if max < min {
        return Err(CliError::Config(format!(
            "--power-max-db ({max}) must be at least --power-min-db ({min})"
        )));
    }
    let mut grid = Vec::new();
    let mut value = min;
    while value <= max + 1e-9 {
        grid.push(value);
        value += step;
    }
    Ok(grid)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SweepThreshold(args) => {
            let (mut resolved, file) = args.common.resolve()?;
            let power_db = file.resolve(args.power_db, "power-db", -100.0)?;
            resolved.cfg.power_linear = 10f64.powf(power_db / 10.0);
            resolved.cfg.scatter_var = file.resolve(args.scatter_var, "scatter-var", 0.0)?;
            resolved.cfg.radio.num_tones = file.resolve(args.tones, "tones", 1)?;
            let weighting =
                parse_weighting(&file.resolve(args.weighting, "weighting", "nvp".to_string())?)?;
            let diversity =
                parse_diversity(&file.resolve(args.diversity, "diversity", "full".to_string())?)?;
            let variants = [Variant::weighted(weighting, diversity)];
            run_sweep(
                &resolved.cfg,
                &SweepAxis::Threshold,
                &variants,
                resolved.out.as_deref(),
            )
        }
        Command::SweepPower(args) => {
            let (mut resolved, file) = args.common.resolve()?;
            resolved.cfg.scatter_var = file.resolve(args.scatter_var, "scatter-var", 0.0)?;
            resolved.cfg.radio.num_tones = file.resolve(args.tones, "tones", 1)?;
            let grid = db_grid(
                file.resolve(args.power_min_db, "power-min-db", -140.0)?,
                file.resolve(args.power_max_db, "power-max-db", -70.0)?,
                file.resolve(args.power_step_db, "power-step-db", 5.0)?,
            )?;
            let variants =
                parse_variants(&file.resolve(args.variants, "variants", "all".to_string())?)?;
            run_sweep(
                &resolved.cfg,
                &SweepAxis::PowerDb(grid),
                &variants,
                resolved.out.as_deref(),
            )
        }
        Command::SweepScatter(args) => {
            let (mut resolved, file) = args.common.resolve()?;
            let power_db = file.resolve(args.power_db, "power-db", -100.0)?;
            resolved.cfg.power_linear = 10f64.powf(power_db / 10.0);
            resolved.cfg.radio.num_tones = file.resolve(args.tones, "tones", 1)?;
            let grid_raw = file.resolve(
                args.scatter_grid,
                "scatter-grid",
                "1e-4,1e-3,1e-2,1e-1".to_string(),
            )?;
            let grid = parse_list::<f64>(&grid_raw, "--scatter-grid")?;
            let variants =
                parse_variants(&file.resolve(args.variants, "variants", "all".to_string())?)?;
            run_sweep(
                &resolved.cfg,
                &SweepAxis::ScatterVar(grid),
                &variants,
                resolved.out.as_deref(),
            )
        }
        Command::SweepTones(args) => {
            let (mut resolved, file) = args.common.resolve()?;
            let power_db = file.resolve(args.power_db, "power-db", -100.0)?;
            resolved.cfg.power_linear = 10f64.powf(power_db / 10.0);
            resolved.cfg.scatter_var = file.resolve(args.scatter_var, "scatter-var", 1e-3)?;
            let grid_raw = file.resolve(args.tones_grid, "tones-grid", "1,2,4,8".to_string())?;
            let grid = parse_list::<usize>(&grid_raw, "--tones-grid")?;
            let variants =
                parse_variants(&file.resolve(args.variants, "variants", "all".to_string())?)?;
            run_sweep(
                &resolved.cfg,
                &SweepAxis::Tones(grid),
                &variants,
                resolved.out.as_deref(),
            )
        }
        Command::ClassifyOne(args) => classify_one(&args),
        Command::Materials(args) => {
            let table = load_materials(args.materials_file.as_deref())?;
            let mut text = String::from("name,eps_r,kappa\n");
            for m in &table {
                text.push_str(&format!("{},{},{}\n", m.name, m.eps_r, m.kappa));
            }
            write_output(&text, args.out.as_deref()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

// --- classify-one ----------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyPayload {
    /// Decision threshold in rad².
    xi: f64,
    #[serde(default = "default_weighting")]
    weighting: Weighting,
    /// Seed for measurement synthesis in scenario mode.
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    diversity: Option<Diversity>,
    #[serde(default)]
    scenario: Option<ScenarioPayload>,
    #[serde(default)]
    measurements: Option<MeasurementsPayload>,
    #[serde(default)]
    radio: Option<RadioParams>,
}

fn default_weighting() -> Weighting {
    Weighting::Nvp
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioPayload {
    truth: Hypothesis,
    power_db: f64,
    #[serde(default = "default_distance")]
    distance_m: f64,
    #[serde(default)]
    clock_offset: f64,
    ue_rotation: [f64; 3],
    #[serde(default)]
    reflector_rotation: [f64; 3],
    #[serde(default)]
    incidence: f64,
    #[serde(default)]
    material: Option<String>,
    departure: [f64; 2],
    arrival: [f64; 2],
    #[serde(default)]
    scatter_var: f64,
}

fn default_distance() -> f64 {
    10.0
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementsPayload {
    diversity: Diversity,
    tones: Vec<TonePayload>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct TonePayload {
    /// Phases in `[0, 2π)` in `VV, VH, HV, HH` order; `null` where masked.
    phases: [Option<f64>; 4],
    /// Noise variances in rad², same layout.
    noise_vars: [Option<f64>; 4],
}

fn classify_one(args: &ClassifyOneArgs) -> Result<(), CliError> {
    let payload: ClassifyPayload =
        serde_json::from_str(&args.json).map_err(|e| CliError::Config(format!("--json: {e}")))?;
    if payload.xi <= 0.0 || payload.xi.is_nan() {
        return Err(CliError::Config(format!(
            "--json: xi must be positive, got {}",
            payload.xi
        )));
    }

    let (set, truth) = match (&payload.scenario, &payload.measurements) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "--json: provide either 'scenario' or 'measurements', not both".to_string(),
            ))
        }
        (None, None) => {
            return Err(CliError::Config(
                "--json: one of 'scenario' or 'measurements' is required".to_string(),
            ))
        }
        (None, Some(m)) => {
            if payload.diversity.is_some_and(|d| d != m.diversity) {
                return Err(CliError::Config(
                    "--json: 'diversity' conflicts with 'measurements.diversity'".to_string(),
                ));
            }
            (build_measurement_set(m)?, None)
        }
        (Some(s), None) => {
            let table = load_materials(args.materials_file.as_deref())?;
            let scenario = build_scenario(s, &table)?;
            let radio = payload.radio.clone().unwrap_or_default();
            radio.validate().map_err(CliError::Config)?;
            let diversity = payload.diversity.unwrap_or(Diversity::Full);
            let mut rng =
                <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(payload.seed);
            let set = measurement_set(&scenario, &radio, diversity, &mut rng)
                .map_err(|e| CliError::Config(format!("--json: {e}")))?;
            (set, Some(scenario.truth))
        }
    };

    let weights = payload.weighting.build(&set, set.diversity);
    let mut record = decide(&set, &weights, payload.xi);
    record.truth = truth;

    let text = decision_csv(&record);
    write_output(&text, args.out.as_deref()).map_err(|e| CliError::Io(e.to_string()))
}

fn build_measurement_set(payload: &MeasurementsPayload) -> Result<PhaseMeasurementSet, CliError> {
    if payload.tones.is_empty() {
        return Err(CliError::Config(
            "--json: measurements need at least one tone".to_string(),
        ));
    }
    let mut tones = Vec::with_capacity(payload.tones.len());
    for (idx, tone) in payload.tones.iter().enumerate() {
        let mut configs = [None; 4];
        for (c, slot) in configs.iter_mut().enumerate() {
            *slot = match (tone.phases[c], tone.noise_vars[c]) {
                (Some(phase), Some(noise_var)) => {
                    if !(0.0..std::f64::consts::TAU).contains(&phase) {
                        return Err(CliError::Config(format!(
                            "--json: tone {idx} phase {phase} outside [0, 2*pi)"
                        )));
                    }
                    if noise_var <= 0.0 || noise_var.is_nan() {
                        return Err(CliError::Config(format!(
                            "--json: tone {idx} noise variance must be positive"
                        )));
                    }
                    Some(Measurement { phase, noise_var })
                }
                (None, None) => None,
                _ => {
                    return Err(CliError::Config(format!(
                        "--json: tone {idx} has mismatched phase/variance masks"
                    )))
                }
            };
        }
        tones.push(ToneMeasurements { configs });
    }
    let set = PhaseMeasurementSet {
        diversity: payload.diversity,
        tones,
    };
    for &c in payload.diversity.active_configs() {
        if set.tones.iter().any(|t| t.configs[c].is_none()) {
            return Err(CliError::Config(format!(
                "--json: diversity '{}' requires configuration index {c} on every tone",
                payload.diversity
            )));
        }
    }
    Ok(set)
}

fn build_scenario(payload: &ScenarioPayload, table: &[Material]) -> Result<Scenario, CliError> {
    let material = match &payload.material {
        Some(name) => find_material(name, table)
            .map_err(|e| CliError::Config(format!("--json: {e}")))?
            .clone(),
        // LOS trials never consult the material; any placeholder works.
        None => table[0].clone(),
    };
    if payload.material.is_none() && payload.truth == Hypothesis::Nlos {
        return Err(CliError::Config(
            "--json: NLOS scenarios need a 'material'".to_string(),
        ));
    }
    Ok(Scenario {
        truth: payload.truth,
        power_linear: 10f64.powf(payload.power_db / 10.0),
        distance_m: payload.distance_m,
        clock_offset: payload.clock_offset,
        ue_rotation: crate::geometry::EulerAngles::new(
            payload.ue_rotation[0],
            payload.ue_rotation[1],
            payload.ue_rotation[2],
        ),
        reflector_rotation: crate::geometry::EulerAngles::new(
            payload.reflector_rotation[0],
            payload.reflector_rotation[1],
            payload.reflector_rotation[2],
        ),
        incidence: payload.incidence,
        material,
        departure: crate::geometry::DirectionAngles::new(
            payload.departure[0],
            payload.departure[1],
        ),
        arrival: crate::geometry::DirectionAngles::new(payload.arrival[0], payload.arrival[1]),
        scatter_var: payload.scatter_var,
    })
}

fn decision_csv(record: &DecisionRecord) -> String {
    format!(
        "statistic,nu_index,decision,xi,truth\n{},{},{},{},{}\n",
        format_float(record.statistic),
        record.nu_index,
        record.decision,
        format_float(record.threshold),
        record
            .truth
            .map_or_else(|| "unknown".to_string(), |t| t.to_string()),
    )
}

/// Parse `argv` and run the corresponding command; returns the process exit
/// code (0 success, 2 configuration error, 1 runtime/IO error).
pub fn run_from<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version displays are successes.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// [`run_from`] on the process arguments.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}
