//! Experiment configuration and its flat `key = value` text form.
//!
//! The same key names are used by the config file, the emitted manifest
//! and the command-line flags (`--<key>`). Values are layered: defaults,
//! then the config file, then flags.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::{self, BeaconStrategy, FieldConfig};
use crate::localize::{RoundParams, ThresholdScheme};
use crate::radio::{Law, ReceptionModel, SamplingParams};

/// Every recognised key, in manifest order.
pub const KEYS: &[&str] = &[
    "nodes",
    "field-width",
    "field-height",
    "radio-range",
    "beacon-fraction",
    "beacon-strategy",
    "model",
    "ramp-inner",
    "shadow-sigma",
    "shadow-exponent",
    "beacon-period",
    "sample-time",
    "thresholds",
    "min-bucket",
    "max-rounds",
    "baseline",
    "cm-threshold",
    "seed",
    "reps",
    "sweep",
    "cell-size",
    "cdf-bin",
    "out",
    "jobs",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    IdealDisc,
    LinearRamp,
    LogNormalShadowing,
}

impl ModelKind {
    fn as_str(self) -> &'static str {
        match self {
            ModelKind::IdealDisc => "ideal",
            ModelKind::LinearRamp => "linear-ramp",
            ModelKind::LogNormalShadowing => "shadowing",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ideal" | "ideal-disc" => Some(ModelKind::IdealDisc),
            "linear-ramp" | "ramp" => Some(ModelKind::LinearRamp),
            "shadowing" | "log-normal" => Some(ModelKind::LogNormalShadowing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nodes: usize,
    pub field_width: f64,
    pub field_height: f64,
    pub radio_range: f64,
    pub beacon_fraction: f64,
    pub beacon_strategy: BeaconStrategy,
    pub model: ModelKind,
    pub ramp_inner: f64,
    pub shadow_sigma: f64,
    pub shadow_exponent: f64,
    pub beacon_period: f64,
    pub sample_time: f64,
    pub thresholds: Vec<f64>,
    pub min_bucket: usize,
    pub max_rounds: u32,
    pub baseline: bool,
    pub cm_threshold: f64,
    pub seed: u64,
    pub reps: usize,
    /// Node counts for a sweep; empty for a single experiment.
    pub sweep: Vec<usize>,
    pub cell_size: f64,
    pub cdf_bin: f64,
    pub out: PathBuf,
    /// Worker threads; 0 picks the machine's parallelism.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            nodes: 400,
            field_width: 100.0,
            field_height: 100.0,
            radio_range: 10.0,
            beacon_fraction: 0.2,
            beacon_strategy: BeaconStrategy::Random,
            model: ModelKind::LinearRamp,
            ramp_inner: 0.1,
            shadow_sigma: 4.0,
            shadow_exponent: 3.0,
            beacon_period: 1.0,
            sample_time: 100.0,
            thresholds: vec![90.0, 70.0, 50.0, 30.0, 0.0],
            min_bucket: 3,
            max_rounds: 100,
            baseline: false,
            cm_threshold: 90.0,
            seed: 1,
            reps: 1,
            sweep: Vec::new(),
            cell_size: 10.0,
            cdf_bin: 0.05,
            out: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "nodes" => self.nodes = parse_num(key, value)?,
            "field-width" => self.field_width = parse_num(key, value)?,
            "field-height" => self.field_height = parse_num(key, value)?,
            "radio-range" => self.radio_range = parse_num(key, value)?,
            "beacon-fraction" => self.beacon_fraction = parse_num(key, value)?,
            "beacon-strategy" => {
                self.beacon_strategy = value.parse().map_err(|e: String| Error::config(key, e))?
            }
            "model" => {
                self.model = ModelKind::parse(value).ok_or_else(|| {
                    Error::config(key, format!("unknown model `{value}` (expected ideal|linear-ramp|shadowing)"))
                })?
            }
            "ramp-inner" => self.ramp_inner = parse_num(key, value)?,
            "shadow-sigma" => self.shadow_sigma = parse_num(key, value)?,
            "shadow-exponent" => self.shadow_exponent = parse_num(key, value)?,
            "beacon-period" => self.beacon_period = parse_num(key, value)?,
            "sample-time" => self.sample_time = parse_num(key, value)?,
            "thresholds" => self.thresholds = parse_list(key, value)?,
            "min-bucket" => self.min_bucket = parse_num(key, value)?,
            "max-rounds" => self.max_rounds = parse_num(key, value)?,
            "baseline" => self.baseline = parse_num(key, value)?,
            "cm-threshold" => self.cm_threshold = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "reps" => self.reps = parse_num(key, value)?,
            "sweep" => self.sweep = parse_list(key, value)?,
            "cell-size" => self.cell_size = parse_num(key, value)?,
            "cdf-bin" => self.cdf_bin = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "jobs" => self.jobs = parse_num(key, value)?,
            other => return Err(Error::config(other, "unknown configuration key")),
        }
        Ok(())
    }

    /// Applies a config file body: `key = value` lines, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(line, format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text)
    }

    /// Resolved experiment parameters in manifest form. Run-location keys
    /// (`out`, `jobs`) are left out so a manifest reproduces the same bytes
    /// wherever it is re-run.
    pub fn to_manifest(&self) -> String {
        let mut s = String::from("# proxloc resolved configuration\n");
        let mut line = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        line("nodes", self.nodes.to_string());
        line("field-width", self.field_width.to_string());
        line("field-height", self.field_height.to_string());
        line("radio-range", self.radio_range.to_string());
        line("beacon-fraction", self.beacon_fraction.to_string());
        line("beacon-strategy", self.beacon_strategy.as_str().to_string());
        line("model", self.model.as_str().to_string());
        line("ramp-inner", self.ramp_inner.to_string());
        line("shadow-sigma", self.shadow_sigma.to_string());
        line("shadow-exponent", self.shadow_exponent.to_string());
        line("beacon-period", self.beacon_period.to_string());
        line("sample-time", self.sample_time.to_string());
        line("thresholds", join(&self.thresholds));
        line("min-bucket", self.min_bucket.to_string());
        line("max-rounds", self.max_rounds.to_string());
        line("baseline", self.baseline.to_string());
        line("cm-threshold", self.cm_threshold.to_string());
        line("seed", self.seed.to_string());
        line("reps", self.reps.to_string());
        line("sweep", join(&self.sweep));
        line("cell-size", self.cell_size.to_string());
        line("cdf-bin", self.cdf_bin.to_string());
        s
    }

    pub fn field(&self, nodes: usize, seed: u64) -> FieldConfig {
        FieldConfig {
            width: self.field_width,
            height: self.field_height,
            node_count: nodes,
            radio_range: self.radio_range,
            beacon_fraction: self.beacon_fraction,
            seed,
        }
    }

    pub fn reception_model(&self) -> ReceptionModel {
        let law = match self.model {
            ModelKind::IdealDisc => Law::IdealDisc,
            ModelKind::LinearRamp => Law::LinearRamp {
                inner_fraction: self.ramp_inner,
            },
            ModelKind::LogNormalShadowing => Law::LogNormalShadowing {
                sigma_db: self.shadow_sigma,
                pathloss_exponent: self.shadow_exponent,
            },
        };
        ReceptionModel {
            law,
            radio_range: self.radio_range,
        }
    }

    pub fn sampling(&self) -> SamplingParams {
        SamplingParams {
            beacon_period: self.beacon_period,
            sample_time: self.sample_time,
        }
    }

    pub fn round_params(&self) -> Result<RoundParams> {
        Ok(RoundParams {
            model: self.reception_model(),
            sampling: self.sampling(),
            scheme: ThresholdScheme::new(self.thresholds.clone(), self.min_bucket)?,
            max_rounds: self.max_rounds,
        })
    }

    /// Node counts this configuration runs: the sweep list, or `nodes`.
    pub fn node_counts(&self) -> Vec<usize> {
        if self.sweep.is_empty() {
            vec![self.nodes]
        } else {
            self.sweep.clone()
        }
    }

    /// Checks every invariant, naming the offending key on failure.
    pub fn validate(&self) -> Result<()> {
        if !self.sweep.is_empty() {
            if self.sweep.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config("sweep", "node counts must be distinct and ascending"));
            }
            if self.sweep[0] == 0 {
                return Err(Error::config("sweep", "node counts must be positive"));
            }
        }
        for n in self.node_counts() {
            self.field(n, self.seed).validate()?;
        }
        match self.model {
            ModelKind::LinearRamp if !(0.0..1.0).contains(&self.ramp_inner) => {
                return Err(Error::config("ramp-inner", "must lie in [0, 1)"));
            }
            ModelKind::LogNormalShadowing if !(self.shadow_sigma > 0.0) => {
                return Err(Error::config("shadow-sigma", "must be positive"));
            }
            ModelKind::LogNormalShadowing if !(self.shadow_exponent > 0.0) => {
                return Err(Error::config("shadow-exponent", "must be positive"));
            }
            _ => {}
        }
        if !(self.beacon_period > 0.0) {
            return Err(Error::config("beacon-period", "must be positive"));
        }
        if !self.sampling().is_valid() {
            return Err(Error::config("sample-time", "must be at least one beacon period"));
        }
        ThresholdScheme::new(self.thresholds.clone(), self.min_bucket)?;
        if self.max_rounds < 1 {
            return Err(Error::config("max-rounds", "must be at least 1"));
        }
        if !(self.cm_threshold > 0.0 && self.cm_threshold < 100.0) {
            return Err(Error::config("cm-threshold", "must lie in (0, 100)"));
        }
        if self.reps < 1 {
            return Err(Error::config("reps", "must be at least 1"));
        }
        if !(self.cell_size > 0.0) {
            return Err(Error::config("cell-size", "must be positive"));
        }
        if !(self.cdf_bin > 0.0) {
            return Err(Error::config("cdf-bin", "must be positive"));
        }
        Ok(())
    }

    pub fn initial_beacons(&self, nodes: usize) -> Result<usize> {
        field::initial_beacon_count(nodes, self.beacon_fraction)
    }
}
