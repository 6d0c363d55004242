use std::fs;
use std::path::Path;
use std::process::Command;

use proxloc::harness::{self, plot, ExperimentConfig};
use proxloc::Error;

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn data_lines(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "), "{} lacks a header", path.display());
    lines
        .map(|l| l.split_whitespace().map(|f| f.parse::<f64>().unwrap()).collect())
        .collect()
}

fn small(out: &Path) -> ExperimentConfig {
    ExperimentConfig { nodes: 250, reps: 3, out: out.to_path_buf(), ..Default::default() }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_proxloc"))
}

#[test]
fn table1_defaults_write_400_node_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { out: tmp.path().to_path_buf(), ..Default::default() };
    harness::run_experiment(&cfg).unwrap();
    let (header, rows) = read_csv(&tmp.path().join("rep_000/nodes.csv"));
    assert_eq!(header.join(","), "node_id,true_x,true_y,role,est_x,est_y,err_norm,settled_round");
    assert_eq!(rows.len(), 400);
    for row in &rows {
        let settled = row[3] == "settled";
        assert_eq!(settled, !row[4].is_empty());
        assert_eq!(settled, !row[6].is_empty());
        assert_eq!(settled, !row[7].is_empty());
    }
    let beacons = rows.iter().filter(|r| r[3] == "beacon").count();
    assert_eq!(beacons, 80);
}

#[test]
fn summary_has_one_row_per_replication_and_matches_nodes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(tmp.path());
    let reps = harness::run_experiment(&cfg).unwrap();
    let (header, rows) = read_csv(&tmp.path().join("summary.csv"));
    assert_eq!(
        header.join(","),
        "rep,seed,n_nodes,n_initial_beacons,n_settled,n_blind,mean_err,mode_err,var_err,std_err,rounds"
    );
    assert_eq!(rows.len(), 3);
    for (row, rep) in rows.iter().zip(&reps) {
        let n: usize = row[2].parse().unwrap();
        let parts: usize = row[3].parse::<usize>().unwrap() + row[4].parse::<usize>().unwrap() + row[5].parse::<usize>().unwrap();
        assert_eq!(n, parts);
        assert_eq!(row[1], rep.seed.to_string());

        // mean error recomputed from the node file's err_norm column
        let (_, nodes) = read_csv(&tmp.path().join(format!("rep_{:03}/nodes.csv", rep.rep)));
        let errs: Vec<f64> = nodes.iter().filter(|r| !r[6].is_empty()).map(|r| r[6].parse().unwrap()).collect();
        assert_eq!(errs.len(), row[4].parse::<usize>().unwrap());
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let reported: f64 = row[6].parse().unwrap();
        assert!((mean - reported).abs() <= 1e-5 * reported.max(1.0), "{mean} vs {reported}");
    }
}

#[test]
fn cdf_heatmap_and_plot_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(tmp.path());
    let reps = harness::run_experiment(&cfg).unwrap();
    let settled = reps[0].errors.len();

    let rep = tmp.path().join("rep_000");
    let (h, cdf) = read_csv(&rep.join("cdf.csv"));
    assert_eq!(h.join(","), "err_bin_upper,cum_fraction");
    assert_eq!(cdf.last().unwrap()[1], "1");

    let (h, heat) = read_csv(&rep.join("heatmap.csv"));
    assert_eq!(h.join(","), "cell_x,cell_y,mean_err,count");
    assert_eq!(heat.len(), 100);
    let total: usize = heat.iter().map(|r| r[3].parse::<usize>().unwrap()).sum();
    assert_eq!(total, settled);
    for r in &heat {
        assert_eq!(r[3] == "0", r[2].is_empty(), "empty cells carry no mean");
    }

    let errors = data_lines(&rep.join("plot_errors.dat"));
    assert_eq!(errors.len(), settled);
    let cdf_plot = data_lines(&rep.join("plot_cdf.dat"));
    assert!(cdf_plot.windows(2).all(|w| w[0][0] < w[1][0]));
    assert_eq!(cdf_plot.last().unwrap()[1], 1.0);
    let heat_plot = data_lines(&rep.join("plot_heatmap.dat"));
    assert_eq!(heat_plot.len(), 100);
    assert!(heat_plot.iter().all(|r| r.len() == 3));

    // pooled files at the experiment root
    let (_, pooled) = read_csv(&tmp.path().join("heatmap.csv"));
    let pooled_total: usize = pooled.iter().map(|r| r[3].parse::<usize>().unwrap()).sum();
    assert_eq!(pooled_total, reps.iter().map(|r| r.errors.len()).sum::<usize>());
}

#[test]
fn sweep_layout_and_aggregate_consistency() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        sweep: vec![100, 200],
        reps: 4,
        out: tmp.path().to_path_buf(),
        ..Default::default()
    };
    let rows = harness::run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 2);
    let run_dirs = ["n_0100", "n_0200"]
        .iter()
        .flat_map(|d| fs::read_dir(tmp.path().join(d)).unwrap())
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("rep_"))
        .count();
    assert_eq!(run_dirs, 8);

    let (header, sweep) = read_csv(&tmp.path().join("sweep.csv"));
    assert_eq!(header.join(","), "n_nodes,n_reps,mean_err,mode_err,var_err,std_err,mean_blind");
    assert_eq!(sweep.len(), 2);
    for row in &sweep {
        let (_, summary) = read_csv(&tmp.path().join(format!("n_{:04}/summary.csv", row[0].parse::<usize>().unwrap())));
        assert_eq!(row[1], summary.len().to_string());
        for (col, scol) in [(2, 6), (4, 8), (5, 9)] {
            let vals: Vec<f64> = summary.iter().filter(|r| !r[scol].is_empty()).map(|r| r[scol].parse().unwrap()).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let got: f64 = row[col].parse().unwrap();
            assert!((mean - got).abs() <= 1e-5 * got.abs().max(1e-3), "col {col}: {mean} vs {got}");
        }
        let blind = summary.iter().map(|r| r[5].parse::<f64>().unwrap()).sum::<f64>() / summary.len() as f64;
        assert!((blind - row[6].parse::<f64>().unwrap()).abs() < 1e-4);
    }
    assert_eq!(data_lines(&tmp.path().join("plot_error_stats.dat")).len(), 2);
    assert_eq!(data_lines(&tmp.path().join("plot_blind.dat")).len(), 2);
}

#[test]
fn single_count_single_rep_aggregate_equals_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { sweep: vec![300], reps: 1, out: tmp.path().to_path_buf(), ..Default::default() };
    harness::run_sweep(&cfg).unwrap();
    let (_, sweep) = read_csv(&tmp.path().join("sweep.csv"));
    let (_, summary) = read_csv(&tmp.path().join("n_0300/summary.csv"));
    assert_eq!(&sweep[0][2..6], &summary[0][6..10]);
    assert_eq!(sweep[0][6], summary[0][5]);
}

#[test]
fn manifest_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let cfg = ExperimentConfig {
        nodes: 180,
        reps: 2,
        model: harness::ModelKind::LogNormalShadowing,
        thresholds: vec![85.0, 45.0, 0.0],
        baseline: true,
        seed: 77,
        out: first.clone(),
        ..Default::default()
    };
    harness::run_experiment(&cfg).unwrap();

    let second = tmp.path().join("second");
    let status = bin()
        .arg("--config")
        .arg(first.join("manifest.cfg"))
        .arg("--out")
        .arg(&second)
        .arg("--jobs")
        .arg("2")
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for entry in walk(&first) {
        let rel = entry.strip_prefix(&first).unwrap();
        assert_eq!(fs::read(&entry).unwrap(), fs::read(second.join(rel)).unwrap(), "{}", rel.display());
    }
    assert!(first.join("rep_000/baseline_nodes.csv").exists());
    let (_, base) = read_csv(&first.join("baseline_summary.csv"));
    assert_eq!(base.len(), 2);
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = vec![];
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn cli_flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("run.cfg");
    fs::write(&conf, "# small run\nnodes = 150\nreps = 2\nseed = 5\n").unwrap();
    let out = tmp.path().join("o");
    let res = bin().args(["--config"]).arg(&conf).args(["--reps", "1", "--out"]).arg(&out).output().unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let manifest = fs::read_to_string(out.join("manifest.cfg")).unwrap();
    assert!(manifest.contains("nodes = 150\n"));
    assert!(manifest.contains("reps = 1\n"));
    assert!(manifest.contains("seed = 5\n"));
    assert!(manifest.contains("model = linear-ramp\n"));
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let res = bin().args(["--beacon-fraction", "0.004", "--out"]).arg(tmp.path().join("x")).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("beacon-fraction"));

    let res = bin().args(["--radio-range", "far"]).output().unwrap();
    assert_eq!(res.status.code(), Some(2));

    let res = bin().args(["--no-such-flag"]).output().unwrap();
    assert_eq!(res.status.code(), Some(2));

    let blocker = tmp.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let res = bin().args(["--nodes", "100", "--out"]).arg(blocker.join("sub")).output().unwrap();
    assert_eq!(res.status.code(), Some(3));

    let res = bin().arg("--config").arg(tmp.path().join("missing.cfg")).output().unwrap();
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn cli_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let res = bin()
        .args(["--sweep", "100,150", "--reps", "2", "--baseline", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(tmp.path().join("sweep.csv").exists());
    assert!(tmp.path().join("n_0150/baseline_summary.csv").exists());
}

#[test]
fn plot_emission_needs_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(matches!(plot::emit_run_plots(tmp.path()), Err(Error::Io { .. })));
    assert!(matches!(plot::emit_sweep_plots(tmp.path()), Err(Error::Io { .. })));
}

#[test]
fn unwritable_output_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = small(&blocker.join("out"));
    let err = harness::run_experiment(&cfg).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err}");
    assert_eq!(err.exit_code(), 3);
}
