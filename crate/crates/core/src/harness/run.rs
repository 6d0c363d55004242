//! Single experiments, sweeps and their on-disk artifacts.
//!
//! ```text
//! <out>/manifest.cfg          resolved configuration
//! <out>/summary.csv           one row per replication
//! <out>/cdf.csv, heatmap.csv  pooled over replications
//! <out>/rep_NNN/              nodes.csv, cdf.csv, heatmap.csv, plot files
//! ```
//!
//! A sweep writes one such directory per node count (`n_NNNN/`) plus
//! `sweep.csv` and its own `manifest.cfg`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::format::{opt, sig6};
use super::plot;
use crate::error::{Error, Result};
use crate::field::{assign_initial_beacons, build_connectivity, deploy_uniform, Node, Position, Role};
use crate::localize::{run_baseline, run_rounds, LocalizationOutcome};
use crate::metrics::{self, error_cdf, error_samples, error_stats, ErrorStats, Heatmap};
use crate::rng::Streams;

pub const MANIFEST: &str = "manifest.cfg";

/// Seed of replication `rep` under `master`.
pub fn rep_seed(master: u64, rep: usize) -> u64 {
    Streams::new(master).derive_seed(&format!("rep/{rep}"))
}

/// Everything one replication produces, kept in memory at full precision.
#[derive(Debug, Clone)]
pub struct RepResult {
    pub rep: usize,
    pub seed: u64,
    pub outcome: LocalizationOutcome,
    /// Settled nodes' normalized errors in node order.
    pub errors: Vec<f64>,
    pub stats: Option<ErrorStats>,
    /// Baseline estimate per node when the baseline is enabled.
    pub baseline: Option<Vec<Option<Position>>>,
}

impl RepResult {
    pub fn n_nodes(&self) -> usize {
        self.outcome.nodes.len()
    }

    pub fn count(&self, role: Role) -> usize {
        self.outcome.count(role)
    }
}

/// Deploys, assigns beacons, localizes and scores one replication.
pub fn simulate_rep(cfg: &ExperimentConfig, n_nodes: usize, rep: usize) -> Result<RepResult> {
    let seed = rep_seed(cfg.seed, rep);
    let streams = Streams::new(seed);
    let field = cfg.field(n_nodes, seed);
    field.validate()?;
    let params = cfg.round_params()?;

    let mut nodes = deploy_uniform(&field)?;
    assign_initial_beacons(
        &mut nodes,
        cfg.beacon_fraction,
        cfg.beacon_strategy,
        (cfg.field_width, cfg.field_height),
        &streams,
    )?;
    let graph = build_connectivity(&nodes, cfg.radio_range);
    let outcome = run_rounds(&nodes, &graph, &params, &streams);
    let errors: Vec<f64> = error_samples(&outcome.nodes, cfg.radio_range)?
        .into_iter()
        .map(|s| s.err_norm)
        .collect();
    let stats = if errors.is_empty() { None } else { Some(error_stats(&errors)?) };
    let baseline = cfg.baseline.then(|| {
        run_baseline(&nodes, &graph, &params.model, &params.sampling, cfg.cm_threshold, &streams)
    });
    Ok(RepResult {
        rep,
        seed,
        outcome,
        errors,
        stats,
        baseline,
    })
}

/// Runs `f` on a pool of `jobs` threads (0 = all cores).
fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    Ok(pool.install(f))
}

/// Simulates every replication of every node count. Results come back in
/// `(count, rep)` order whatever the scheduling.
pub fn simulate_all(cfg: &ExperimentConfig) -> Result<Vec<(usize, Vec<RepResult>)>> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> = cfg
        .node_counts()
        .into_iter()
        .flat_map(|n| (0..cfg.reps).map(move |r| (n, r)))
        .collect();
    let results: Vec<RepResult> = with_pool(cfg.jobs, || {
        tasks
            .par_iter()
            .map(|&(n, r)| simulate_rep(cfg, n, r))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut grouped = Vec::new();
    let mut it = results.into_iter();
    for n in cfg.node_counts() {
        grouped.push((n, it.by_ref().take(cfg.reps).collect()));
    }
    Ok(grouped)
}

/// One aggregated sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_nodes: usize,
    pub n_reps: usize,
    pub mean_err: Option<f64>,
    pub mode_err: Option<f64>,
    pub var_err: Option<f64>,
    pub std_err: Option<f64>,
    pub mean_blind: f64,
}

/// Across-replication means of the per-run statistics (runs with no
/// settled node are skipped), the mode of the pooled errors, and the mean
/// blind count.
pub fn aggregate(n_nodes: usize, reps: &[RepResult]) -> SweepRow {
    let stats: Vec<&ErrorStats> = reps.iter().filter_map(|r| r.stats.as_ref()).collect();
    let mean_of = |f: fn(&ErrorStats) -> f64| {
        (!stats.is_empty()).then(|| stats.iter().map(|s| f(s)).sum::<f64>() / stats.len() as f64)
    };
    let pooled: Vec<f64> = reps.iter().flat_map(|r| r.errors.iter().copied()).collect();
    SweepRow {
        n_nodes,
        n_reps: reps.len(),
        mean_err: mean_of(|s| s.mean),
        mode_err: metrics::mode_1dp(&pooled).ok(),
        var_err: mean_of(|s| s.variance),
        std_err: mean_of(|s| s.stddev),
        mean_blind: reps.iter().map(|r| r.count(Role::Blind) as f64).sum::<f64>() / reps.len().max(1) as f64,
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const NODES_HEADER: &[&str] = &[
    "node_id", "true_x", "true_y", "role", "est_x", "est_y", "err_norm", "settled_round",
];
pub const SUMMARY_HEADER: &[&str] = &[
    "rep", "seed", "n_nodes", "n_initial_beacons", "n_settled", "n_blind", "mean_err", "mode_err", "var_err",
    "std_err", "rounds",
];
pub const CDF_HEADER: &[&str] = &["err_bin_upper", "cum_fraction"];
pub const HEATMAP_HEADER: &[&str] = &["cell_x", "cell_y", "mean_err", "count"];
pub const SWEEP_HEADER: &[&str] = &["n_nodes", "n_reps", "mean_err", "mode_err", "var_err", "std_err", "mean_blind"];

fn node_row(n: &Node, est: Option<Position>, radio_range: f64, role: &str, round: Option<u32>) -> Vec<String> {
    let err = est.map(|e| crate::field::distance(n.pos, e) / radio_range);
    vec![
        n.id.to_string(),
        sig6(n.pos.x),
        sig6(n.pos.y),
        role.to_string(),
        opt(est.map(|e| e.x)),
        opt(est.map(|e| e.y)),
        opt(err),
        round.map(|r| r.to_string()).unwrap_or_default(),
    ]
}

fn write_nodes(path: &Path, r: &RepResult, radio_range: f64) -> Result<()> {
    write_rows(
        path,
        NODES_HEADER,
        r.outcome
            .nodes
            .iter()
            .map(|n| node_row(n, n.est, radio_range, n.role.as_str(), n.settled_round)),
    )
}

fn write_baseline_nodes(path: &Path, r: &RepResult, estimates: &[Option<Position>], radio_range: f64) -> Result<()> {
    write_rows(
        path,
        NODES_HEADER,
        r.outcome.nodes.iter().zip(estimates).map(|(n, &est)| {
            let role = match (n.role, est) {
                (Role::InitialBeacon, _) => "beacon",
                (_, Some(_)) => "settled",
                (_, None) => "blind",
            };
            node_row(n, est, radio_range, role, est.map(|_| 1))
        }),
    )
}

fn summary_row(r: &RepResult) -> Vec<String> {
    let s = r.stats;
    vec![
        r.rep.to_string(),
        r.seed.to_string(),
        r.n_nodes().to_string(),
        r.count(Role::InitialBeacon).to_string(),
        r.count(Role::Settled).to_string(),
        r.count(Role::Blind).to_string(),
        opt(s.map(|s| s.mean)),
        opt(s.map(|s| s.mode_1dp)),
        opt(s.map(|s| s.variance)),
        opt(s.map(|s| s.stddev)),
        r.outcome.rounds_executed.to_string(),
    ]
}

fn baseline_summary_row(r: &RepResult, estimates: &[Option<Position>], radio_range: f64) -> Vec<String> {
    let errors: Vec<f64> = r
        .outcome
        .nodes
        .iter()
        .zip(estimates)
        .filter_map(|(n, e)| e.map(|e| crate::field::distance(n.pos, e) / radio_range))
        .collect();
    let s = error_stats(&errors).ok();
    let settled = errors.len();
    let beacons = r.count(Role::InitialBeacon);
    vec![
        r.rep.to_string(),
        r.seed.to_string(),
        r.n_nodes().to_string(),
        beacons.to_string(),
        settled.to_string(),
        (r.n_nodes() - beacons - settled).to_string(),
        opt(s.map(|s| s.mean)),
        opt(s.map(|s| s.mode_1dp)),
        opt(s.map(|s| s.variance)),
        opt(s.map(|s| s.stddev)),
        "1".to_string(),
    ]
}

fn write_cdf(path: &Path, errors: &[f64], bin: f64) -> Result<()> {
    let rows = if errors.is_empty() { Vec::new() } else { error_cdf(errors, bin)? };
    write_rows(path, CDF_HEADER, rows.into_iter().map(|(e, f)| vec![sig6(e), sig6(f)]))
}

fn write_heatmap(path: &Path, map: &Heatmap) -> Result<()> {
    write_rows(
        path,
        HEATMAP_HEADER,
        map.iter()
            .map(|(cx, cy, c)| vec![cx.to_string(), cy.to_string(), opt(c.mean()), c.count.to_string()]),
    )
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes one experiment directory from already simulated replications.
pub fn write_experiment(cfg: &ExperimentConfig, n_nodes: usize, reps: &[RepResult], dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let single = ExperimentConfig {
        nodes: n_nodes,
        sweep: Vec::new(),
        ..cfg.clone()
    };
    write_text(&dir.join(MANIFEST), &single.to_manifest())?;

    let mut pooled_map = Heatmap::new(cfg.field_width, cfg.field_height, cfg.cell_size)?;
    for r in reps {
        let rep_dir = dir.join(format!("rep_{:03}", r.rep));
        create_dir(&rep_dir)?;
        write_nodes(&rep_dir.join("nodes.csv"), r, cfg.radio_range)?;
        write_cdf(&rep_dir.join("cdf.csv"), &r.errors, cfg.cdf_bin)?;
        let map = metrics::geographic_error_grid(
            &r.outcome.nodes,
            (cfg.field_width, cfg.field_height),
            cfg.radio_range,
            cfg.cell_size,
        )?;
        for s in error_samples(&r.outcome.nodes, cfg.radio_range)? {
            pooled_map.add(r.outcome.nodes[s.node_id].pos, s.err_norm);
        }
        write_heatmap(&rep_dir.join("heatmap.csv"), &map)?;
        if let Some(est) = &r.baseline {
            write_baseline_nodes(&rep_dir.join("baseline_nodes.csv"), r, est, cfg.radio_range)?;
        }
        plot::emit_run_plots(&rep_dir)?;
    }

    write_rows(&dir.join("summary.csv"), SUMMARY_HEADER, reps.iter().map(summary_row))?;
    if cfg.baseline {
        write_rows(
            &dir.join("baseline_summary.csv"),
            SUMMARY_HEADER,
            reps.iter()
                .filter_map(|r| r.baseline.as_ref().map(|e| baseline_summary_row(r, e, cfg.radio_range))),
        )?;
    }
    let pooled: Vec<f64> = reps.iter().flat_map(|r| r.errors.iter().copied()).collect();
    write_cdf(&dir.join("cdf.csv"), &pooled, cfg.cdf_bin)?;
    write_heatmap(&dir.join("heatmap.csv"), &pooled_map)?;
    plot::emit_pooled_plots(dir)?;
    Ok(())
}

fn sweep_row(row: &SweepRow) -> Vec<String> {
    vec![
        row.n_nodes.to_string(),
        row.n_reps.to_string(),
        opt(row.mean_err),
        opt(row.mode_err),
        opt(row.var_err),
        opt(row.std_err),
        sig6(row.mean_blind),
    ]
}

/// Directory name of one node count inside a sweep.
pub fn count_dir(n_nodes: usize) -> String {
    format!("n_{n_nodes:04}")
}

/// Runs a single experiment (`sweep` empty) into `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RepResult>> {
    if !cfg.sweep.is_empty() {
        return Err(Error::config("sweep", "use run_sweep for node-count sweeps"));
    }
    let mut all = simulate_all(cfg)?;
    let (n, reps) = all.pop().expect("one node count");
    write_experiment(cfg, n, &reps, &cfg.out)?;
    Ok(reps)
}

/// Runs every node count of `cfg.sweep` and writes `sweep.csv`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if cfg.sweep.is_empty() {
        return Err(Error::config("sweep", "no node counts given"));
    }
    let all = simulate_all(cfg)?;
    create_dir(&cfg.out)?;
    write_text(&cfg.out.join(MANIFEST), &cfg.to_manifest())?;
    let mut rows = Vec::new();
    for (n, reps) in &all {
        write_experiment(cfg, *n, reps, &cfg.out.join(count_dir(*n)))?;
        rows.push(aggregate(*n, reps));
    }
    write_rows(&cfg.out.join("sweep.csv"), SWEEP_HEADER, rows.iter().map(sweep_row))?;
    plot::emit_sweep_plots(&cfg.out)?;
    Ok(rows)
}

/// Runs whichever of [`run_experiment`] / [`run_sweep`] the config asks for
/// and returns the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<PathBuf> {
    if cfg.sweep.is_empty() {
        run_experiment(cfg)?;
    } else {
        run_sweep(cfg)?;
    }
    Ok(cfg.out.clone())
}
