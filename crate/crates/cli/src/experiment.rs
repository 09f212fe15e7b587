//! Monte-Carlo experiment runner: sweeps a parameter over a scenario,
//! runs every requested filter over seeded observation sequences, and
//! collects per-step and aggregate results.

use std::time::Instant;

use nalgebra::Vector2;
use rayon::prelude::*;
use serde::Serialize;

use mscphd::filters::{
    extract_estimates, predict, FilterConfig, FilterMode, FilterState,
};
use mscphd::gaussian::ReductionParams;
use mscphd::ospa::{ospa, OspaParams};
use mscphd::partition::{GreedyParams, SensorOrder};
use mscphd::sim::{generate_measurements, mix_seed, simulate_tracks, Scenario, Trajectory};

const TAG_FRAMES: u64 = 11;
const TAG_ORDER: u64 = 12;

/// Parameter swept across experiment repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    PdVariableSensor,
    WMax,
    PMax,
    NumSensors,
    ClutterRate,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self, String> {
        match name {
            "p_d_variable_sensor" => Ok(Self::PdVariableSensor),
            "w_max" => Ok(Self::WMax),
            "p_max" => Ok(Self::PMax),
            "num_sensors" => Ok(Self::NumSensors),
            "clutter_rate" => Ok(Self::ClutterRate),
            other => Err(format!(
                "unknown sweep parameter `{other}` (expected p_d_variable_sensor, w_max, p_max, \
                 num_sensors or clutter_rate)"
            )),
        }
    }
}

/// Parses `name=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> Result<(SweepParam, Vec<f64>), String> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| format!("sweep spec `{spec}` must look like name=v1,v2,..."))?;
    let param = SweepParam::parse(name)?;
    let values: Vec<f64> = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad sweep value `{v}`: {e}")))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("sweep needs at least one value".into());
    }
    Ok((param, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    Wall,
    Off,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub scenario_path: String,
    #[serde(skip)]
    pub scenario: Scenario,
    pub filters: Vec<FilterName>,
    pub runs: usize,
    pub seed: u64,
    pub w_max: usize,
    pub p_max: usize,
    pub exact: bool,
    pub random_order: bool,
    pub timing: Timing,
    pub sweep: Option<(SweepParam, Vec<f64>)>,
    pub n_max: usize,
    pub ospa_cutoff: f64,
    pub ospa_power: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.scenario.validate()?;
        if self.runs == 0 {
            return Err("runs must be at least 1".into());
        }
        if self.filters.is_empty() {
            return Err("at least one filter is required".into());
        }
        if self.w_max == 0 || self.p_max == 0 {
            return Err("beam widths must be at least 1".into());
        }
        if let Some((param, values)) = &self.sweep {
            for &v in values {
                match param {
                    SweepParam::PdVariableSensor => {
                        if !(0.0..=1.0).contains(&v) {
                            return Err(format!("swept detection probability {v} out of [0, 1]"));
                        }
                    }
                    SweepParam::WMax | SweepParam::PMax => {
                        if v < 1.0 || v.fract() != 0.0 {
                            return Err(format!("swept beam width {v} must be a positive integer"));
                        }
                    }
                    SweepParam::NumSensors => {
                        if v < 1.0
                            || v.fract() != 0.0
                            || v as usize > self.scenario.sensors.len()
                        {
                            return Err(format!(
                                "swept sensor count {v} must be an integer in [1, {}]",
                                self.scenario.sensors.len()
                            ));
                        }
                        if self.scenario.sensor_permutation.is_some() {
                            return Err(
                                "num_sensors sweep cannot be combined with sensor_permutation"
                                    .into(),
                            );
                        }
                    }
                    SweepParam::ClutterRate => {
                        if v < 0.0 {
                            return Err(format!("swept clutter rate {v} must be nonnegative"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Filter selector as it appears on the command line and in the CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FilterName {
    Gphd,
    Gcphd,
    Icphd,
    Iccphd,
}

impl FilterName {
    pub fn mode(&self) -> FilterMode {
        match self {
            FilterName::Gphd => FilterMode::GPhd,
            FilterName::Gcphd => FilterMode::GCphd,
            FilterName::Icphd => FilterMode::IcPhd,
            FilterName::Iccphd => FilterMode::IcCphd,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FilterName::Gphd => "gphd",
            FilterName::Gcphd => "gcphd",
            FilterName::Icphd => "icphd",
            FilterName::Iccphd => "iccphd",
        }
    }
}

/// Estimate positions per step of one run.
pub type EstimateLog = Vec<Vec<(f64, f64)>>;

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub sweep_value: String,
    pub filter: &'static str,
    pub run: usize,
    pub step: usize,
    pub true_n: usize,
    pub est_n: usize,
    pub ospa: f64,
    pub update_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRecord {
    pub sweep_value: String,
    pub filter: &'static str,
    pub mean_ospa: f64,
    pub mean_update_ms: f64,
    pub runs: usize,
}

pub struct ExperimentResult {
    pub per_step: Vec<StepRecord>,
    pub aggregates: Vec<AggregateRecord>,
    /// Estimate positions of the first run of the first filter at the
    /// first sweep value, for optional track linking.
    pub first_run_estimates: EstimateLog,
}

fn apply_sweep(scenario: &Scenario, param: SweepParam, value: f64) -> Scenario {
    let mut s = scenario.clone();
    match param {
        SweepParam::PdVariableSensor => {
            let idx = s.variable_sensor.unwrap_or(s.sensors.len() - 1);
            s.sensors[idx].set_detection_prob(value);
        }
        SweepParam::NumSensors => {
            s.sensors.truncate(value as usize);
            if let Some(v) = s.variable_sensor {
                if v >= s.sensors.len() {
                    s.variable_sensor = None;
                }
            }
        }
        SweepParam::ClutterRate => {
            for sensor in &mut s.sensors {
                sensor.set_clutter_rate(value);
            }
        }
        // Beam widths live in the filter config, not the scenario.
        SweepParam::WMax | SweepParam::PMax => {}
    }
    s
}

fn sweep_label(sweep: &Option<(SweepParam, Vec<f64>)>, idx: usize) -> String {
    match sweep {
        Some((_, values)) => format!("{}", values[idx]),
        None => String::new(),
    }
}

/// Runs the full experiment grid. Runs fan out over worker threads;
/// results are merged in run order so output is independent of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, String> {
    let sweep_values: Vec<Option<f64>> = match &config.sweep {
        Some((_, values)) => values.iter().copied().map(Some).collect(),
        None => vec![None],
    };

    let mut per_step = Vec::new();
    let mut aggregates = Vec::new();
    let mut first_run_estimates = Vec::new();

    for (sweep_idx, sweep_value) in sweep_values.iter().enumerate() {
        let scenario = match (&config.sweep, sweep_value) {
            (Some((param, _)), Some(v)) => apply_sweep(&config.scenario, *param, *v),
            _ => config.scenario.clone(),
        };
        let label = sweep_label(&config.sweep, sweep_idx);

        let mut w_max = config.w_max;
        let mut p_max = config.p_max;
        if let (Some((SweepParam::WMax, _)), Some(v)) = (&config.sweep, sweep_value) {
            w_max = *v as usize;
        }
        if let (Some((SweepParam::PMax, _)), Some(v)) = (&config.sweep, sweep_value) {
            p_max = *v as usize;
        }

        let tracks = simulate_tracks(&scenario);

        for (fi, filter) in config.filters.iter().enumerate() {
            let runs: Result<Vec<(Vec<StepRecord>, EstimateLog)>, String> = (0
                ..config.runs)
                .into_par_iter()
                .map(|run| {
                    run_once(
                        config,
                        &scenario,
                        &tracks,
                        *filter,
                        w_max,
                        p_max,
                        run,
                        sweep_idx,
                        &label,
                    )
                })
                .collect();
            let mut runs = runs?;
            if sweep_idx == 0 && fi == 0 {
                first_run_estimates = std::mem::take(&mut runs[0].1);
            }

            let n: f64 = runs.iter().map(|(r, _)| r.len()).sum::<usize>() as f64;
            let mean_ospa = runs.iter().flat_map(|(r, _)| r).map(|r| r.ospa).sum::<f64>() / n;
            let mean_update_ms =
                runs.iter().flat_map(|(r, _)| r).map(|r| r.update_ms).sum::<f64>() / n;
            aggregates.push(AggregateRecord {
                sweep_value: label.clone(),
                filter: filter.label(),
                mean_ospa,
                mean_update_ms,
                runs: config.runs,
            });
            per_step.extend(runs.into_iter().flat_map(|(r, _)| r));
        }
    }

    Ok(ExperimentResult { per_step, aggregates, first_run_estimates })
}

#[allow(clippy::too_many_arguments)]
fn run_once(
    config: &ExperimentConfig,
    scenario: &Scenario,
    tracks: &[Trajectory],
    filter: FilterName,
    w_max: usize,
    p_max: usize,
    run: usize,
    sweep_idx: usize,
    label: &str,
) -> Result<(Vec<StepRecord>, EstimateLog), String> {
    let mode = filter.mode();
    let frames = generate_measurements(
        scenario,
        tracks,
        mix_seed(config.seed, &[TAG_FRAMES, sweep_idx as u64, run as u64]),
    );
    let birth = scenario.birth.build(config.n_max);
    let mut filter_config = FilterConfig {
        survival_prob: 0.99,
        motion: scenario.motion.build(),
        sensors: scenario.build_sensor_models(),
        greedy: GreedyParams { w_max, p_max, sensor_order: SensorOrder::Ascending },
        reduction: ReductionParams::default(),
        n_max: config.n_max,
        mode,
        exact_update: config.exact,
    };
    let ospa_params = OspaParams::new(config.ospa_cutoff, config.ospa_power);

    let mut state = FilterState::initial(mode, config.n_max);
    let mut records = Vec::with_capacity(frames.len());
    let mut estimate_log = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let step = i + 1;
        if config.random_order {
            filter_config.greedy.sensor_order = SensorOrder::Seeded(mix_seed(
                config.seed,
                &[TAG_ORDER, sweep_idx as u64, run as u64, step as u64],
            ));
        }

        let predicted = predict(&state, &filter_config, &birth);
        let start = Instant::now();
        state = match mode {
            FilterMode::GCphd => {
                mscphd::filters::gcphd_update(&predicted, frame, &filter_config)
            }
            FilterMode::GPhd => mscphd::filters::gphd_update(&predicted, frame, &filter_config),
            FilterMode::IcCphd => {
                mscphd::filters::ic_cphd_update(&predicted, frame, &filter_config)
            }
            FilterMode::IcPhd => mscphd::filters::ic_phd_update(&predicted, frame, &filter_config),
        }
        .map_err(|e| format!("{} update failed at run {run} step {step}: {e}", filter.label()))?;
        let update_ms = match config.timing {
            Timing::Wall => start.elapsed().as_secs_f64() * 1e3,
            Timing::Off => 0.0,
        };

        let (est_n, estimates) = extract_estimates(&state, mode);
        let truth: Vec<Vector2<f64>> =
            tracks.iter().filter_map(|t| t.position_at(step)).collect();
        let est_pos: Vec<Vector2<f64>> =
            estimates.iter().map(|e| Vector2::new(e[0], e[1])).collect();
        let err = ospa(&truth, &est_pos, &ospa_params);

        records.push(StepRecord {
            sweep_value: label.to_string(),
            filter: filter.label(),
            run,
            step,
            true_n: truth.len(),
            est_n,
            ospa: err,
            update_ms,
        });
        estimate_log.push(est_pos.iter().map(|p| (p[0], p[1])).collect());
    }
    Ok((records, estimate_log))
}

/// CSV with the fixed per-step schema. Floats use the shortest
/// round-trippable representation so re-reading reproduces them exactly.
pub fn per_step_csv(records: &[StepRecord]) -> String {
    let mut out = String::from("sweep_value,filter,run,step,true_n,est_n,ospa,update_ms\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.sweep_value, r.filter, r.run, r.step, r.true_n, r.est_n, r.ospa, r.update_ms
        ));
    }
    out
}

pub fn aggregate_csv(records: &[AggregateRecord]) -> String {
    let mut out = String::from("sweep_value,filter,mean_ospa,mean_update_ms,runs\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.sweep_value, r.filter, r.mean_ospa, r.mean_update_ms, r.runs
        ));
    }
    out
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub config: &'a ExperimentConfig,
    pub aggregates: &'a [AggregateRecord],
}
