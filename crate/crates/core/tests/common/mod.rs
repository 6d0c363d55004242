//! Straight-line reference localizer used as an oracle: all-pairs
//! neighbor search, no graph, no shared estimator code. Only the random
//! stream derivation is shared with the library, since both must consume
//! the same draws.

#![allow(dead_code)]

use proxloc::rng::Streams;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefModel {
    Ideal { r: f64 },
    Ramp { r: f64, rho: f64 },
    Shadow { r: f64, sigma: f64, n: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefNode {
    pub x: f64,
    pub y: f64,
    pub beacon: bool,
    pub est: Option<(f64, f64)>,
    pub round: Option<u32>,
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

fn range(m: RefModel) -> f64 {
    match m {
        RefModel::Ideal { r } | RefModel::Ramp { r, .. } | RefModel::Shadow { r, .. } => r,
    }
}

fn count_received(m: RefModel, d: f64, slots: u32, rng: &mut proxloc::rng::Pcg64) -> u32 {
    let mut got = 0;
    for _ in 0..slots {
        let ok = match m {
            RefModel::Ideal { r } => {
                let p = if d <= r { 1.0 } else { 0.0 };
                rng.random::<f64>() < p
            }
            RefModel::Ramp { r, rho } => {
                let p = if d > r {
                    0.0
                } else if d <= rho * r {
                    1.0
                } else {
                    (r - d) / (r - rho * r)
                };
                rng.random::<f64>() < p
            }
            RefModel::Shadow { r, sigma, n } => {
                let z: f64 = rng.sample(StandardNormal);
                let margin = if d == 0.0 { f64::INFINITY } else { 10.0 * n * (r / d).log10() };
                margin + sigma * z >= 0.0
            }
        };
        if ok {
            got += 1;
        }
    }
    got
}

/// `(beacon id, x, y, factor)` rows to an estimate, following the band,
/// cascade, centroid and fusion rules literally.
pub fn estimate(rows: &[(usize, f64, f64, f64)], bounds: &[f64], min: usize) -> Option<(f64, f64)> {
    if rows.len() < 3 {
        return None;
    }
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut bands: Vec<Vec<(usize, f64, f64, f64)>> = vec![vec![]; bounds.len()];
    for row in &rows {
        let mut k = 0;
        while bounds[k] > row.3 {
            k += 1;
        }
        bands[k].push(*row);
    }
    for k in 0..bands.len() - 1 {
        if !bands[k].is_empty() && bands[k].len() < min {
            let m = bands[k].clone();
            bands[k].clear();
            bands[k + 1].extend(m);
        }
    }
    let last = bands.len() - 1;
    if !bands[last].is_empty() && bands[last].len() < min {
        let mut k = last;
        let mut target = None;
        while k > 0 {
            k -= 1;
            if !bands[k].is_empty() {
                target = Some(k);
                break;
            }
        }
        let t = target?;
        let m = bands[last].clone();
        bands[last].clear();
        bands[t].extend(m);
    }
    let mut parts = vec![];
    for band in bands.iter_mut().filter(|b| !b.is_empty()) {
        band.sort_by(|a, b| a.0.cmp(&b.0));
        let n = band.len() as f64;
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sf = 0.0;
        for r in band.iter() {
            sx += r.1;
            sy += r.2;
            sf += r.3;
        }
        parts.push((sx / n, sy / n, sf / n));
    }
    if parts.len() == 1 {
        return Some((parts[0].0, parts[0].1));
    }
    let mut wx = 0.0;
    let mut wy = 0.0;
    let mut w = 0.0;
    for p in &parts {
        wx += p.2 * p.0;
        wy += p.2 * p.1;
        w += p.2;
    }
    Some((wx / w, wy / w))
}

/// Synchronous rounds until a round settles nobody or `max_rounds`.
pub fn run(
    nodes: &[RefNode],
    model: RefModel,
    slots: u32,
    bounds: &[f64],
    min: usize,
    max_rounds: u32,
    seed: u64,
) -> (Vec<RefNode>, u32) {
    let streams = Streams::new(seed);
    let r = range(model);
    let mut nodes = nodes.to_vec();
    let mut executed = 0;
    for round in 1..=max_rounds {
        executed = round;
        let snapshot = nodes.clone();
        let mut settled = vec![];
        for i in 0..snapshot.len() {
            if snapshot[i].beacon || snapshot[i].est.is_some() {
                continue;
            }
            let mut rng = streams.reception(round, i);
            let mut rows = vec![];
            for j in 0..snapshot.len() {
                let advertised = if snapshot[j].beacon {
                    Some((snapshot[j].x, snapshot[j].y))
                } else {
                    snapshot[j].est
                };
                let Some(adv) = advertised else { continue };
                let d = dist((snapshot[i].x, snapshot[i].y), (snapshot[j].x, snapshot[j].y));
                if j == i || d > r {
                    continue;
                }
                let got = count_received(model, d, slots, &mut rng);
                if got > 0 {
                    rows.push((j, adv.0, adv.1, 100.0 * got as f64 / slots as f64));
                }
            }
            if let Some(e) = estimate(&rows, bounds, min) {
                settled.push((i, e));
            }
        }
        for &(i, e) in &settled {
            nodes[i].est = Some(e);
            nodes[i].round = Some(round);
        }
        if settled.is_empty() {
            break;
        }
    }
    (nodes, executed)
}
