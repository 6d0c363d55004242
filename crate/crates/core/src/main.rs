use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use proxloc::harness::{self, ExperimentConfig};
use proxloc::Error;

/// Simulate proximity-factor localization in a random sensor field.
///
/// Every option can also be given as `key = value` in a config file passed
/// with --config; flags override the file, the file overrides defaults.
/// With --sweep, one experiment is run per node count and aggregated into
/// sweep.csv.
#[derive(Debug, Parser)]
#[command(name = "proxloc", version)]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Number of deployed nodes.
    #[arg(long)]
    nodes: Option<String>,
    /// Field width in meters.
    #[arg(long)]
    field_width: Option<String>,
    /// Field height in meters.
    #[arg(long)]
    field_height: Option<String>,
    /// Radio range in meters; also the error normalizer.
    #[arg(long)]
    radio_range: Option<String>,
    /// Fraction of nodes deployed as initial beacons.
    #[arg(long)]
    beacon_fraction: Option<String>,
    /// Initial beacon placement: random | grid.
    #[arg(long)]
    beacon_strategy: Option<String>,
    /// Reception law: ideal | linear-ramp | shadowing.
    #[arg(long)]
    model: Option<String>,
    /// Linear ramp: fraction of the range with certain reception.
    #[arg(long)]
    ramp_inner: Option<String>,
    /// Shadowing: fade standard deviation in dB.
    #[arg(long)]
    shadow_sigma: Option<String>,
    /// Shadowing: path-loss exponent.
    #[arg(long)]
    shadow_exponent: Option<String>,
    /// Beacon period in seconds.
    #[arg(long)]
    beacon_period: Option<String>,
    /// Sampling window in seconds.
    #[arg(long)]
    sample_time: Option<String>,
    /// Descending factor thresholds, comma separated, ending at 0.
    #[arg(long)]
    thresholds: Option<String>,
    /// Smallest usable threshold band.
    #[arg(long)]
    min_bucket: Option<String>,
    /// Upper bound on localization rounds.
    #[arg(long)]
    max_rounds: Option<String>,
    /// Also run the single-shot centroid baseline.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    baseline: Option<String>,
    /// Baseline factor threshold (percent).
    #[arg(long)]
    cm_threshold: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,
    /// Replications per node count.
    #[arg(long)]
    reps: Option<String>,
    /// Node counts to sweep, comma separated.
    #[arg(long)]
    sweep: Option<String>,
    /// Heatmap cell size in meters.
    #[arg(long)]
    cell_size: Option<String>,
    /// CDF bin width (normalized error).
    #[arg(long)]
    cdf_bin: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long)]
    jobs: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("nodes", &self.nodes),
            ("field-width", &self.field_width),
            ("field-height", &self.field_height),
            ("radio-range", &self.radio_range),
            ("beacon-fraction", &self.beacon_fraction),
            ("beacon-strategy", &self.beacon_strategy),
            ("model", &self.model),
            ("ramp-inner", &self.ramp_inner),
            ("shadow-sigma", &self.shadow_sigma),
            ("shadow-exponent", &self.shadow_exponent),
            ("beacon-period", &self.beacon_period),
            ("sample-time", &self.sample_time),
            ("thresholds", &self.thresholds),
            ("min-bucket", &self.min_bucket),
            ("max-rounds", &self.max_rounds),
            ("baseline", &self.baseline),
            ("cm-threshold", &self.cm_threshold),
            ("seed", &self.seed),
            ("reps", &self.reps),
            ("sweep", &self.sweep),
            ("cell-size", &self.cell_size),
            ("cdf-bin", &self.cdf_bin),
            ("out", &self.out),
            ("jobs", &self.jobs),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }

    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in self.overrides() {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = cli.resolve()?;
    if cfg.sweep.is_empty() {
        let reps = harness::run_experiment(&cfg)?;
        for r in &reps {
            let mean = r.stats.map(|s| format!("{:.4}", s.mean)).unwrap_or_else(|| "-".into());
            println!(
                "rep {:>3}: settled {:>4}  blind {:>4}  rounds {:>3}  mean error {mean}",
                r.rep,
                r.count(proxloc::Role::Settled),
                r.count(proxloc::Role::Blind),
                r.outcome.rounds_executed,
            );
        }
    } else {
        for row in harness::run_sweep(&cfg)? {
            let mean = row.mean_err.map(|m| format!("{m:.4}")).unwrap_or_else(|| "-".into());
            println!(
                "n {:>5}: mean error {mean}  mean blind {:.2}  ({} reps)",
                row.n_nodes, row.mean_blind, row.n_reps
            );
        }
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("proxloc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
