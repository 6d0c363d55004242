//! Localization error and its summaries.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{distance, Node, Position, Role};

/// Distance between true and estimated position, in units of radio range.
pub fn localization_error(actual: Position, estimated: Position, radio_range: f64) -> Result<f64> {
    if !(radio_range > 0.0) {
        return Err(Error::Domain(format!("radio range must be positive, got {radio_range}")));
    }
    Ok(distance(actual, estimated) / radio_range)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub node_id: usize,
    pub err_norm: f64,
}

/// Normalized errors of every settled node, in node order.
pub fn error_samples(nodes: &[Node], radio_range: f64) -> Result<Vec<ErrorSample>> {
    nodes
        .iter()
        .filter(|n| n.role == Role::Settled)
        .map(|n| {
            let est = n.est.expect("settled nodes carry an estimate");
            Ok(ErrorSample {
                node_id: n.id,
                err_norm: localization_error(n.pos, est, radio_range)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub mean: f64,
    pub mode_1dp: f64,
    /// Population variance.
    pub variance: f64,
    pub stddev: f64,
}

/// Rounds half-up to tenths, returning the count of tenths.
pub fn tenths(x: f64) -> i64 {
    (x * 10.0 + 0.5).floor() as i64
}

/// Most frequent one-decimal value; ties go to the smaller value.
pub fn mode_1dp(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("mode of an empty sample".into()));
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &s in samples {
        *counts.entry(tenths(s)).or_default() += 1;
    }
    // BTreeMap iterates ascending, and max_by_key keeps the last maximum,
    // so scan in reverse to keep the smallest key among ties.
    let (&t, _) = counts.iter().rev().max_by_key(|(_, &c)| c).expect("nonempty");
    Ok(t as f64 / 10.0)
}

pub fn error_stats(samples: &[f64]) -> Result<ErrorStats> {
    if samples.is_empty() {
        return Err(Error::Domain("error statistics of an empty sample".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    Ok(ErrorStats {
        mean,
        mode_1dp: mode_1dp(samples)?,
        variance,
        stddev: variance.sqrt(),
    })
}

/// Empirical CDF evaluated at `bin_width, 2 * bin_width, ...` up to the
/// first edge at or above the largest sample.
pub fn error_cdf(samples: &[f64], bin_width: f64) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::Domain("CDF of an empty sample".into()));
    }
    if !(bin_width > 0.0) {
        return Err(Error::Domain(format!("bin width must be positive, got {bin_width}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let max = *sorted.last().expect("nonempty");
    let n = sorted.len();

    let mut bins = ((max / bin_width).ceil() as usize).max(1);
    while (bins as f64) * bin_width < max {
        bins += 1;
    }
    let mut out = Vec::with_capacity(bins);
    let mut below = 0;
    for k in 1..=bins {
        let edge = k as f64 * bin_width;
        while below < n && sorted[below] <= edge {
            below += 1;
        }
        out.push((edge, below as f64 / n as f64));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCell {
    pub sum: f64,
    pub count: usize,
}

impl HeatCell {
    /// Mean error, or `None` for an empty cell.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

/// Mean error per field cell. Cells are `cell_size` squares from the
/// origin; the last row and column may be partial.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub cell_size: f64,
    pub cols: usize,
    pub rows: usize,
    cells: Vec<HeatCell>,
}

impl Heatmap {
    pub fn new(width: f64, height: f64, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) {
            return Err(Error::config("cell-size", "must be positive"));
        }
        let cols = ((width / cell_size).ceil() as usize).max(1);
        let rows = ((height / cell_size).ceil() as usize).max(1);
        Ok(Heatmap {
            cell_size,
            cols,
            rows,
            cells: vec![HeatCell { sum: 0.0, count: 0 }; cols * rows],
        })
    }

    /// Cell index along one axis. A coordinate on a shared edge belongs to
    /// the lower cell; anything past the far edge folds into the last cell.
    fn axis_index(&self, v: f64, len: usize) -> usize {
        let k = (v / self.cell_size).ceil() as i64 - 1;
        k.clamp(0, len as i64 - 1) as usize
    }

    pub fn add(&mut self, pos: Position, err: f64) {
        let cx = self.axis_index(pos.x, self.cols);
        let cy = self.axis_index(pos.y, self.rows);
        let cell = &mut self.cells[cy * self.cols + cx];
        cell.sum += err;
        cell.count += 1;
    }

    pub fn cell(&self, cx: usize, cy: usize) -> HeatCell {
        self.cells[cy * self.cols + cx]
    }

    /// `(cell_x, cell_y, cell)` row by row.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, HeatCell)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, c)| (i % self.cols, i / self.cols, *c))
    }

    pub fn total_count(&self) -> usize {
        self.cells.iter().map(|c| c.count).sum()
    }
}

/// Bins every settled node's error by the cell holding its true position.
pub fn geographic_error_grid(
    nodes: &[Node],
    field: (f64, f64),
    radio_range: f64,
    cell_size: f64,
) -> Result<Heatmap> {
    let mut map = Heatmap::new(field.0, field.1, cell_size)?;
    for s in error_samples(nodes, radio_range)? {
        map.add(nodes[s.node_id].pos, s.err_norm);
    }
    Ok(map)
}

pub fn count_blind(nodes: &[Node]) -> usize {
    nodes.iter().filter(|n| n.role == Role::Blind).count()
}
