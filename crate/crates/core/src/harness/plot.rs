//! Whitespace-delimited plot data derived from the CSV artifacts.
//!
//! Every file starts with one `#` line naming its columns and holds two or
//! three numeric columns, ready for gnuplot. Empty heatmap cells are
//! written as `NaN`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| to_io(path, e))?;
    let header = r
        .headers()
        .map_err(|e| to_io(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()
        .map_err(|e| to_io(path, e))?;
    Ok((header, rows))
}

fn to_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}"))),
    }
}

fn column(path: &Path, header: &[String], name: &str) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| {
        Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("missing column `{name}`")),
        )
    })
}

/// Extracts `columns` from the CSV at `src` into `dst`; empty fields
/// become `NaN`.
fn extract(src: &Path, dst: &Path, columns: &[&str]) -> Result<usize> {
    let (header, rows) = read_csv(src)?;
    let idx = columns
        .iter()
        .map(|c| column(src, &header, c))
        .collect::<Result<Vec<_>>>()?;
    let mut out = format!("# {}\n", columns.join(" "));
    let mut written = 0;
    for row in &rows {
        let fields: Vec<&str> = idx.iter().map(|&i| row[i].as_str()).collect();
        let line: Vec<&str> = fields.iter().map(|f| if f.is_empty() { "NaN" } else { f }).collect();
        writeln!(out, "{}", line.join(" ")).expect("write to string");
        written += 1;
    }
    fs::write(dst, out).map_err(|e| Error::io(dst, e))?;
    Ok(written)
}

/// Per-node error series of the settled nodes only.
fn error_series(src: &Path, dst: &Path) -> Result<usize> {
    let (header, rows) = read_csv(src)?;
    let id = column(src, &header, "node_id")?;
    let err = column(src, &header, "err_norm")?;
    let mut out = String::from("# node_id err_norm\n");
    let mut written = 0;
    for row in rows.iter().filter(|r| !r[err].is_empty()) {
        writeln!(out, "{} {}", row[id], row[err]).expect("write to string");
        written += 1;
    }
    fs::write(dst, out).map_err(|e| Error::io(dst, e))?;
    Ok(written)
}

/// Plot files for one replication directory: `plot_errors.dat`,
/// `plot_cdf.dat` and `plot_heatmap.dat`.
pub fn emit_run_plots(dir: &Path) -> Result<()> {
    error_series(&dir.join("nodes.csv"), &dir.join("plot_errors.dat"))?;
    emit_pooled_plots(dir)
}

/// CDF and heatmap plot files for a directory holding `cdf.csv` and
/// `heatmap.csv`.
pub fn emit_pooled_plots(dir: &Path) -> Result<()> {
    extract(&dir.join("cdf.csv"), &dir.join("plot_cdf.dat"), &["err_bin_upper", "cum_fraction"])?;
    extract(
        &dir.join("heatmap.csv"),
        &dir.join("plot_heatmap.dat"),
        &["cell_x", "cell_y", "mean_err"],
    )?;
    Ok(())
}

/// Error statistics and blind counts against node count, from `sweep.csv`.
pub fn emit_sweep_plots(dir: &Path) -> Result<()> {
    let src = dir.join("sweep.csv");
    extract(&src, &dir.join("plot_error_stats.dat"), &["n_nodes", "mean_err", "std_err"])?;
    extract(&src, &dir.join("plot_blind.dat"), &["n_nodes", "mean_blind"])?;
    Ok(())
}
