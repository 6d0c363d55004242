//! Proximity-factor localization.
//!
//! A dumb node listens to every beacon in range for one sampling window
//! and scores each heard beacon with its proximity factor, the percentage
//! of that beacon's transmissions it received. Heard beacons are split
//! into bands by a descending list of factor thresholds, each band with at
//! least three members yields the centroid of its beacons' advertised
//! positions, and the band centroids are fused by their mean factors.
//! Nodes that localize become beacons themselves in the next round and
//! advertise their estimate.

use crate::error::{Error, Result};
use crate::field::{ConnectivityGraph, Node, Position, Role};
use crate::radio::{sample_beacon_counts, ReceptionModel, SamplingParams};
use crate::rng::Streams;

/// Fewest heard beacons a node needs before it attempts an estimate.
pub const MIN_HEARD_BEACONS: usize = 3;

/// One row of a dumb node's beacon table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximityRecord {
    pub beacon_id: usize,
    pub advertised: Position,
    pub received: u32,
    pub transmitted: u32,
    pub factor: f64,
}

impl ProximityRecord {
    pub fn new(beacon_id: usize, advertised: Position, received: u32, transmitted: u32) -> Result<Self> {
        if received > transmitted {
            return Err(Error::Domain(format!(
                "received {received} beacons out of {transmitted} transmitted"
            )));
        }
        Ok(ProximityRecord {
            beacon_id,
            advertised,
            received,
            transmitted,
            factor: proximity_factor(received, transmitted)?,
        })
    }

    /// Record with a factor given directly, for estimator-level use.
    pub fn with_factor(beacon_id: usize, advertised: Position, factor: f64) -> Self {
        ProximityRecord {
            beacon_id,
            advertised,
            received: 0,
            transmitted: 0,
            factor,
        }
    }
}

/// `100 * received / transmitted`, evaluated as `(100 * received) / transmitted`
/// in f64.
pub fn proximity_factor(received: u32, transmitted: u32) -> Result<f64> {
    if transmitted == 0 {
        return Err(Error::Domain("no beacons transmitted in the sampling window".into()));
    }
    if received > transmitted {
        return Err(Error::Domain(format!(
            "received {received} beacons out of {transmitted} transmitted"
        )));
    }
    Ok(100.0 * received as f64 / transmitted as f64)
}

/// Descending factor thresholds; a record belongs to the band of the
/// largest bound not exceeding its factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdScheme {
    lower_bounds: Vec<f64>,
    min_bucket_size: usize,
}

impl Default for ThresholdScheme {
    fn default() -> Self {
        ThresholdScheme {
            lower_bounds: vec![90.0, 70.0, 50.0, 30.0, 0.0],
            min_bucket_size: 3,
        }
    }
}

impl ThresholdScheme {
    pub fn new(lower_bounds: Vec<f64>, min_bucket_size: usize) -> Result<Self> {
        if min_bucket_size < MIN_HEARD_BEACONS {
            return Err(Error::config("min-bucket", "must be at least 3"));
        }
        match lower_bounds.last() {
            Some(&last) if last == 0.0 => {}
            _ => return Err(Error::config("thresholds", "last threshold must be exactly 0")),
        }
        if lower_bounds[0] >= 100.0 || lower_bounds.iter().any(|b| !(0.0..=100.0).contains(b)) {
            return Err(Error::config("thresholds", "thresholds must lie in [0, 100) "));
        }
        if lower_bounds.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::config("thresholds", "thresholds must be strictly decreasing"));
        }
        Ok(ThresholdScheme {
            lower_bounds,
            min_bucket_size,
        })
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower_bounds
    }

    pub fn min_bucket_size(&self) -> usize {
        self.min_bucket_size
    }

    fn band_of(&self, factor: f64) -> usize {
        self.lower_bounds
            .iter()
            .position(|&b| b <= factor)
            .unwrap_or(self.lower_bounds.len() - 1)
    }
}

/// A surviving band of records. `index` is the position of its lower
/// bound in the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Bucket {
    pub index: usize,
    pub lower_bound: f64,
    pub members: Vec<ProximityRecord>,
}

/// Splits records into threshold bands, highest first.
///
/// Bands smaller than the scheme's minimum cascade into the next lower
/// band; if the lowest band is still short afterwards it joins the
/// nearest nonempty band above it. Empty bands are dropped. Members are
/// sorted by beacon id.
pub fn bucket_by_thresholds(records: &[ProximityRecord], scheme: &ThresholdScheme) -> Vec<Bucket> {
    let bands = scheme.lower_bounds.len();
    let min = scheme.min_bucket_size;
    let mut buckets: Vec<Vec<ProximityRecord>> = vec![Vec::new(); bands];
    for rec in records {
        buckets[scheme.band_of(rec.factor)].push(*rec);
    }

    for k in 0..bands - 1 {
        if !buckets[k].is_empty() && buckets[k].len() < min {
            let moved = std::mem::take(&mut buckets[k]);
            buckets[k + 1].extend(moved);
        }
    }
    let last = bands - 1;
    if !buckets[last].is_empty() && buckets[last].len() < min {
        match (0..last).rev().find(|&k| !buckets[k].is_empty()) {
            Some(k) => {
                let moved = std::mem::take(&mut buckets[last]);
                buckets[k].extend(moved);
            }
            None => return Vec::new(),
        }
    }

    buckets
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(index, mut members)| {
            members.sort_by(|a, b| {
                a.beacon_id
                    .cmp(&b.beacon_id)
                    .then(a.advertised.x.total_cmp(&b.advertised.x))
                    .then(a.advertised.y.total_cmp(&b.advertised.y))
                    .then(a.factor.total_cmp(&b.factor))
            });
            Bucket {
                index,
                lower_bound: scheme.lower_bounds[index],
                members,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketEstimate {
    pub index: usize,
    pub centroid: Position,
    pub mean_factor: f64,
    pub size: usize,
}

/// Unweighted centroid of the members' advertised positions, and their
/// mean factor. Sums run in member order.
pub fn bucket_centroid(bucket: &Bucket) -> BucketEstimate {
    let n = bucket.members.len();
    assert!(n > 0, "empty bucket");
    let (sx, sy, sf) = bucket.members.iter().fold((0.0, 0.0, 0.0), |(sx, sy, sf), r| {
        (sx + r.advertised.x, sy + r.advertised.y, sf + r.factor)
    });
    let nf = n as f64;
    BucketEstimate {
        index: bucket.index,
        centroid: Position::new(sx / nf, sy / nf),
        mean_factor: sf / nf,
        size: n,
    }
}

/// Mean-factor weighted average of the band centroids.
pub fn fuse_estimates(estimates: &[BucketEstimate]) -> Result<Position> {
    match estimates {
        [] => Err(Error::Domain("no bucket estimates to fuse".into())),
        [only] => Ok(only.centroid),
        _ => {
            let (wx, wy, w) = estimates.iter().fold((0.0, 0.0, 0.0), |(wx, wy, w), e| {
                (
                    wx + e.mean_factor * e.centroid.x,
                    wy + e.mean_factor * e.centroid.y,
                    w + e.mean_factor,
                )
            });
            if w <= 0.0 {
                return Err(Error::Domain("all bucket weights are zero".into()));
            }
            Ok(Position::new(wx / w, wy / w))
        }
    }
}

/// Full per-node estimator. `None` when fewer than three beacons were
/// heard or no band survives bucketing.
pub fn localize_node(records: &[ProximityRecord], scheme: &ThresholdScheme) -> Option<Position> {
    if records.len() < MIN_HEARD_BEACONS {
        return None;
    }
    let estimates: Vec<BucketEstimate> = bucket_by_thresholds(records, scheme)
        .iter()
        .map(bucket_centroid)
        .collect();
    if estimates.is_empty() {
        return None;
    }
    Some(fuse_estimates(&estimates).expect("heard beacons have positive factors"))
}

/// Centroid of every beacon whose factor exceeds `cm_threshold`.
pub fn bulusu_centroid(records: &[ProximityRecord], cm_threshold: f64) -> Option<Position> {
    let mut picked: Vec<&ProximityRecord> = records.iter().filter(|r| r.factor > cm_threshold).collect();
    if picked.is_empty() {
        return None;
    }
    picked.sort_by_key(|r| r.beacon_id);
    let n = picked.len() as f64;
    let (sx, sy) = picked
        .iter()
        .fold((0.0, 0.0), |(sx, sy), r| (sx + r.advertised.x, sy + r.advertised.y));
    Some(Position::new(sx / n, sy / n))
}

/// Result of running rounds to a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationOutcome {
    pub nodes: Vec<Node>,
    pub rounds_executed: u32,
    /// Nodes settled in each executed round.
    pub settled_per_round: Vec<usize>,
}

impl LocalizationOutcome {
    pub fn count(&self, role: Role) -> usize {
        self.nodes.iter().filter(|n| n.role == role).count()
    }
}

/// Parameters shared by every node's sampling and estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundParams {
    pub model: ReceptionModel,
    pub sampling: SamplingParams,
    pub scheme: ThresholdScheme,
    pub max_rounds: u32,
}

/// Samples one window at node `i` against every beacon neighbor in
/// `advertised`, in ascending beacon id, keeping beacons heard at least once.
pub fn listen(
    i: usize,
    graph: &ConnectivityGraph,
    advertised: &[Option<Position>],
    model: &ReceptionModel,
    sampling: &SamplingParams,
    rng: &mut crate::rng::Pcg64,
) -> Vec<ProximityRecord> {
    graph
        .neighbors(i)
        .iter()
        .zip(graph.weights(i))
        .filter_map(|(&j, &d)| {
            let pos = advertised[j]?;
            let (received, transmitted) = sample_beacon_counts(model, d, sampling, rng);
            (received > 0).then(|| {
                ProximityRecord::new(j, pos, received, transmitted).expect("window counts are consistent")
            })
        })
        .collect()
}

/// Runs synchronous localization rounds.
///
/// Node ids must equal their index in `nodes` and in `graph`. Each round,
/// every dumb node samples a fresh window (stream `reception/<round>/<id>`)
/// against the beacon set frozen at the start of the round, and all nodes
/// that obtain an estimate settle together when the round ends. The loop
/// stops after a round that settles nobody or after `max_rounds`; nodes
/// still dumb then become blind.
pub fn run_rounds(
    nodes: &[Node],
    graph: &ConnectivityGraph,
    params: &RoundParams,
    streams: &Streams,
) -> LocalizationOutcome {
    assert_eq!(nodes.len(), graph.node_count(), "graph built over a different node set");
    let mut nodes = nodes.to_vec();
    let mut settled_per_round = Vec::new();
    let mut rounds_executed = 0;

    for round in 1..=params.max_rounds.max(1) {
        rounds_executed = round;
        let advertised: Vec<Option<Position>> = nodes.iter().map(Node::advertised).collect();
        let settled: Vec<(usize, Position)> = nodes
            .iter()
            .filter(|n| n.role == Role::Dumb)
            .filter_map(|n| {
                let mut rng = streams.reception(round, n.id);
                let records = listen(n.id, graph, &advertised, &params.model, &params.sampling, &mut rng);
                localize_node(&records, &params.scheme).map(|p| (n.id, p))
            })
            .collect();

        settled_per_round.push(settled.len());
        for &(i, est) in &settled {
            let node = &mut nodes[i];
            node.role = Role::Settled;
            node.est = Some(est);
            node.settled_round = Some(round);
        }
        if settled.is_empty() {
            break;
        }
    }

    for node in nodes.iter_mut().filter(|n| n.role == Role::Dumb) {
        node.role = Role::Blind;
    }
    LocalizationOutcome {
        nodes,
        rounds_executed,
        settled_per_round,
    }
}

/// Single-shot centroid baseline: every non-beacon node listens once
/// (stream `baseline/<id>`) to the initial beacons only.
pub fn run_baseline(
    nodes: &[Node],
    graph: &ConnectivityGraph,
    model: &ReceptionModel,
    sampling: &SamplingParams,
    cm_threshold: f64,
    streams: &Streams,
) -> Vec<Option<Position>> {
    let advertised: Vec<Option<Position>> = nodes
        .iter()
        .map(|n| (n.role == Role::InitialBeacon).then_some(n.pos))
        .collect();
    nodes
        .iter()
        .map(|n| {
            if n.role == Role::InitialBeacon {
                return None;
            }
            let mut rng = streams.baseline(n.id);
            let records = listen(n.id, graph, &advertised, model, sampling, &mut rng);
            bulusu_centroid(&records, cm_threshold)
        })
        .collect()
}
