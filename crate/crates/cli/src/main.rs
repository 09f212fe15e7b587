//! Command-line experiment driver for the multisensor tracking filters.
//!
//! Loads a scenario file, runs Monte-Carlo batches of the selected
//! filters (optionally sweeping one parameter), and writes per-step and
//! aggregate CSVs plus a JSON summary.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on runtime
//! errors.

mod experiment;
mod tracks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use experiment::{
    aggregate_csv, parse_sweep, per_step_csv, run_experiment, ExperimentConfig, FilterName,
    Summary, Timing,
};
use mscphd::sim::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OrderArg {
    /// Process sensors in their listed order.
    Fixed,
    /// Draw a fresh seeded sensor permutation per component and step.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TimingArg {
    /// Record wall-clock update times.
    Wall,
    /// Write zeros in the timing column, making outputs byte-reproducible.
    Off,
}

#[derive(Parser, Debug)]
#[command(name = "mscphd", about = "Multisensor CPHD/PHD tracking experiments")]
struct Args {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,

    /// Filter(s) to run; repeat the flag to compare several.
    #[arg(long = "filter", value_enum, required = true)]
    filters: Vec<FilterName>,

    /// Monte-Carlo runs per filter and sweep value.
    #[arg(long, default_value_t = 1)]
    runs: usize,

    /// Root seed for observation generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Maximum measurement subsets retained per Gaussian component.
    #[arg(long, default_value_t = 6)]
    wmax: usize,

    /// Maximum partitions retained.
    #[arg(long, default_value_t = 6)]
    pmax: usize,

    /// Sweep specification, e.g. `p_d_variable_sensor=0.2,0.4,0.6` or
    /// `w_max=1,2,4,6`.
    #[arg(long)]
    sweep: Option<String>,

    /// Use exact partition enumeration when the frame is small enough.
    #[arg(long)]
    exact: bool,

    /// Sensor processing order for the greedy subset construction.
    #[arg(long, value_enum, default_value_t = OrderArg::Fixed)]
    order: OrderArg,

    /// Wall-clock timing or reproducible zeros in the `update_ms` column.
    #[arg(long, value_enum, default_value_t = TimingArg::Wall)]
    timing: TimingArg,

    /// Cardinality truncation for the CPHD filters.
    #[arg(long, default_value_t = 20)]
    nmax: usize,

    /// OSPA cutoff c.
    #[arg(long = "ospa-c", default_value_t = 100.0)]
    ospa_c: f64,

    /// OSPA power p.
    #[arg(long = "ospa-p", default_value_t = 1.0)]
    ospa_p: f64,

    /// Also write `tracks.csv`: estimates of the first run of the first
    /// filter joined across time by nearest-neighbor linking.
    #[arg(long)]
    tracks: bool,

    /// Linking gate in position units for `--tracks`.
    #[arg(long = "track-gate", default_value_t = 100.0)]
    track_gate: f64,

    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

fn load_config(args: &Args) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| format!("cannot read scenario {}: {e}", args.scenario.display()))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| format!("scenario {}: {e}", args.scenario.display()))?;
    let sweep = args.sweep.as_deref().map(parse_sweep).transpose()?;
    let config = ExperimentConfig {
        scenario_path: args.scenario.display().to_string(),
        scenario,
        filters: args.filters.clone(),
        runs: args.runs,
        seed: args.seed,
        w_max: args.wmax,
        p_max: args.pmax,
        exact: args.exact,
        random_order: args.order == OrderArg::Random,
        timing: match args.timing {
            TimingArg::Wall => Timing::Wall,
            TimingArg::Off => Timing::Off,
        },
        sweep,
        n_max: args.nmax,
        ospa_cutoff: args.ospa_c,
        ospa_power: args.ospa_p,
    };
    config.validate()?;
    Ok(config)
}

fn write_outputs(
    out: &PathBuf,
    args: &Args,
    config: &ExperimentConfig,
    result: &experiment::ExperimentResult,
) -> Result<(), String> {
    std::fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let write = |name: &str, contents: String| -> Result<(), String> {
        let path = out.join(name);
        std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
    };
    write("per_step.csv", per_step_csv(&result.per_step))?;
    write("aggregate.csv", aggregate_csv(&result.aggregates))?;
    let summary = Summary { config, aggregates: &result.aggregates };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
    write("summary.json", json + "\n")?;
    if args.tracks {
        let linked = tracks::link_tracks(&result.first_run_estimates, args.track_gate);
        write("tracks.csv", tracks::tracks_csv(&linked))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();

    let config = match load_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };

    match run_experiment(&config) {
        Ok(result) => {
            if let Err(e) = write_outputs(&args.out, &args, &config, &result) {
                eprintln!("runtime error: {e}");
                return ExitCode::from(3);
            }
            for agg in &result.aggregates {
                println!(
                    "{}{}{}: mean OSPA {:.3}, mean update {:.3} ms over {} runs",
                    agg.filter,
                    if agg.sweep_value.is_empty() { "" } else { " @ " },
                    agg.sweep_value,
                    agg.mean_ospa,
                    agg.mean_update_ms,
                    agg.runs
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(3)
        }
    }
}
