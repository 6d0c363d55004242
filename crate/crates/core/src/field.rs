//! Sensor-field geometry, random deployment, connectivity graph and
//! initial beacon selection.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, Streams};

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn translate(self, dx: f64, dy: f64) -> Self {
        Position::new(self.x + dx, self.y + dy)
    }
}

/// Euclidean distance.
pub fn distance(a: Position, b: Position) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    InitialBeacon,
    Dumb,
    Settled,
    Blind,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::InitialBeacon => "beacon",
            Role::Dumb => "dumb",
            Role::Settled => "settled",
            Role::Blind => "blind",
        }
    }

    pub fn is_beacon(self) -> bool {
        matches!(self, Role::InitialBeacon | Role::Settled)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    /// Ground-truth position.
    pub pos: Position,
    pub role: Role,
    /// Estimated position; present only for settled nodes.
    pub est: Option<Position>,
    /// Round (1-based) in which the node settled.
    pub settled_round: Option<u32>,
}

impl Node {
    pub fn dumb(id: usize, pos: Position) -> Self {
        Node {
            id,
            pos,
            role: Role::Dumb,
            est: None,
            settled_round: None,
        }
    }

    pub fn beacon(id: usize, pos: Position) -> Self {
        Node {
            role: Role::InitialBeacon,
            ..Node::dumb(id, pos)
        }
    }

    /// Position carried in this node's beacon messages, if it is a beacon.
    pub fn advertised(&self) -> Option<Position> {
        match self.role {
            Role::InitialBeacon => Some(self.pos),
            Role::Settled => self.est,
            Role::Dumb | Role::Blind => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeaconStrategy {
    #[default]
    Random,
    GridJitter,
}

impl BeaconStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            BeaconStrategy::Random => "random",
            BeaconStrategy::GridJitter => "grid",
        }
    }
}

impl std::str::FromStr for BeaconStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" => Ok(BeaconStrategy::Random),
            "grid" | "grid-jitter" => Ok(BeaconStrategy::GridJitter),
            other => Err(format!("unknown beacon strategy `{other}` (expected random|grid)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub width: f64,
    pub height: f64,
    pub node_count: usize,
    pub radio_range: f64,
    pub beacon_fraction: f64,
    pub seed: u64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            width: 100.0,
            height: 100.0,
            node_count: 400,
            radio_range: 10.0,
            beacon_fraction: 0.2,
            seed: 1,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::config("field-width", "must be a positive number"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::config("field-height", "must be a positive number"));
        }
        if self.node_count == 0 {
            return Err(Error::config("nodes", "must be at least 1"));
        }
        if !(self.radio_range > 0.0 && self.radio_range.is_finite()) {
            return Err(Error::config("radio-range", "must be a positive number"));
        }
        if !(self.beacon_fraction > 0.0 && self.beacon_fraction < 1.0) {
            return Err(Error::config("beacon-fraction", "must lie in (0, 1)"));
        }
        initial_beacon_count(self.node_count, self.beacon_fraction)?;
        Ok(())
    }
}

/// `round(fraction * node_count)`, rejected when below 3.
pub fn initial_beacon_count(node_count: usize, fraction: f64) -> Result<usize> {
    let count = (fraction * node_count as f64).round() as usize;
    if count < 3 {
        return Err(Error::config(
            "beacon-fraction",
            format!("{fraction} of {node_count} nodes gives {count} initial beacons; at least 3 are required"),
        ));
    }
    if count > node_count {
        return Err(Error::config("beacon-fraction", "more beacons than nodes"));
    }
    Ok(count)
}

/// Draws `node_count` positions uniformly over the field, `x` then `y`
/// per node, from the `deploy` stream. All nodes start out dumb.
pub fn deploy_uniform(cfg: &FieldConfig) -> Result<Vec<Node>> {
    if !(cfg.width > 0.0 && cfg.height > 0.0) {
        return Err(Error::config("field-width", "field dimensions must be positive"));
    }
    if cfg.node_count == 0 {
        return Err(Error::config("nodes", "must be at least 1"));
    }
    let mut rng = Streams::new(cfg.seed).stream(rng::DEPLOY);
    let nodes = (0..cfg.node_count)
        .map(|id| {
            let x = rng.random::<f64>() * cfg.width;
            let y = rng.random::<f64>() * cfg.height;
            Node::dumb(id, Position::new(x, y))
        })
        .collect();
    Ok(nodes)
}

/// Undirected unit-disc graph: `i` and `j` are adjacent iff their true
/// distance is at most the radio range.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityGraph {
    adjacency: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
}

impl ConnectivityGraph {
    /// Neighbor ids of `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Edge lengths parallel to [`Self::neighbors`].
    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }
}

/// Builds the connectivity graph with a uniform bucket grid of side `r`,
/// so only the 3x3 surrounding cells are searched for each node.
pub fn build_connectivity(nodes: &[Node], r: f64) -> ConnectivityGraph {
    assert!(r > 0.0, "radio range must be positive");
    let n = nodes.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut weights = vec![Vec::new(); n];
    if n == 0 {
        return ConnectivityGraph { adjacency, weights };
    }

    let (min_x, min_y) = nodes.iter().fold((f64::INFINITY, f64::INFINITY), |(mx, my), nd| {
        (mx.min(nd.pos.x), my.min(nd.pos.y))
    });
    let cell_of = |p: Position| -> (i64, i64) {
        (((p.x - min_x) / r).floor() as i64, ((p.y - min_y) / r).floor() as i64)
    };
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> = Default::default();
    for (i, nd) in nodes.iter().enumerate() {
        grid.entry(cell_of(nd.pos)).or_default().push(i);
    }

    for (i, a) in nodes.iter().enumerate() {
        let (cx, cy) = cell_of(a.pos);
        let mut found: Vec<(usize, f64)> = Vec::new();
        for gx in cx - 1..=cx + 1 {
            for gy in cy - 1..=cy + 1 {
                let Some(bucket) = grid.get(&(gx, gy)) else { continue };
                for &j in bucket {
                    if j == i {
                        continue;
                    }
                    let d = distance(a.pos, nodes[j].pos);
                    if d <= r {
                        found.push((j, d));
                    }
                }
            }
        }
        found.sort_by_key(|&(j, _)| j);
        adjacency[i] = found.iter().map(|&(j, _)| j).collect();
        weights[i] = found.iter().map(|&(_, d)| d).collect();
    }
    ConnectivityGraph { adjacency, weights }
}

/// Flags `round(beacon_fraction * n)` nodes as initial beacons.
///
/// `Random` samples without replacement from the `beacons` stream.
/// `GridJitter` lays a `g x g` virtual grid over the bounding box of the
/// field (`g = ceil(sqrt(B))`), walks its cells row by row from the
/// bottom-left, and takes for each cell the not-yet-chosen node nearest
/// the cell center (ties to the lower id) until `B` beacons are chosen.
pub fn assign_initial_beacons(
    nodes: &mut [Node],
    beacon_fraction: f64,
    strategy: BeaconStrategy,
    field: (f64, f64),
    streams: &Streams,
) -> Result<()> {
    let n = nodes.len();
    let count = initial_beacon_count(n, beacon_fraction)?;
    let chosen: Vec<usize> = match strategy {
        BeaconStrategy::Random => {
            let mut rng = streams.stream(rng::BEACONS);
            rand::seq::index::sample(&mut rng, n, count).into_vec()
        }
        BeaconStrategy::GridJitter => grid_picks(nodes, count, field),
    };
    for i in chosen {
        nodes[i].role = Role::InitialBeacon;
        nodes[i].est = None;
        nodes[i].settled_round = None;
    }
    Ok(())
}

fn grid_picks(nodes: &[Node], count: usize, (width, height): (f64, f64)) -> Vec<usize> {
    let g = (count as f64).sqrt().ceil() as usize;
    let mut taken = vec![false; nodes.len()];
    let mut picks = Vec::with_capacity(count);
    'cells: for row in 0..g {
        for col in 0..g {
            if picks.len() == count {
                break 'cells;
            }
            let center = Position::new(
                (col as f64 + 0.5) * width / g as f64,
                (row as f64 + 0.5) * height / g as f64,
            );
            let best = nodes
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken[*i])
                .map(|(i, nd)| (i, distance(nd.pos, center)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            if let Some((i, _)) = best {
                taken[i] = true;
                picks.push(i);
            }
        }
    }
    picks
}
