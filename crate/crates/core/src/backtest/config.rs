//! Flat key-value run configuration.
//!
//! One `key = value` per line, `#` starts a comment, lists are comma
//! separated. Exactly one data source must be given: `data_csv` (optionally
//! with `instrument`) or the full set of `gbm_*` keys.
//!
//! ```text
//! # data
//! gbm_s0 = 100
//! gbm_mu = 0
//! gbm_sigma = 0.002
//! gbm_dt = 1
//! gbm_n = 1000000
//! gbm_seed = 42
//!
//! thresholds = 0.001,0.002,0.004
//! look_backs = 3,5,8
//! epsilon = 0
//! unit_size = 1
//! vol_window_ns = 3600000000000
//! sync_band_kappa = 1
//! cost_per_trade = 0
//! sampling_interval_ns = 3600000000000
//! output_dir = out
//! ```
//!
//! Everything except the data source, `thresholds` and `output_dir` has the
//! default shown in [`RunConfig::DEFAULT_LOOK_BACKS`] and friends.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{AgentConfig, DeltaEngineConfig};
use crate::intrinsic::Threshold;
use crate::tick::{GbmParams, Nanos};
use crate::trend::LookBack;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {0}")]
    ParseError(usize),
    #[error("invalid value for `{field}`: {reason}")]
    ValidationError { field: String, reason: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::ValidationError {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv { path: PathBuf, instrument: String },
    Gbm(GbmParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data_source: DataSource,
    /// Strictly increasing.
    pub thresholds: Vec<Threshold>,
    pub look_backs: Vec<LookBack>,
    pub epsilon: f64,
    pub unit_size: f64,
    pub vol_window: Nanos,
    pub sync_band_kappa: f64,
    pub cost_per_trade: f64,
    pub sampling_interval: Nanos,
    pub output_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "data_csv",
    "instrument",
    "gbm_s0",
    "gbm_mu",
    "gbm_sigma",
    "gbm_dt",
    "gbm_n",
    "gbm_seed",
    "thresholds",
    "look_backs",
    "epsilon",
    "unit_size",
    "vol_window_ns",
    "sync_band_kappa",
    "cost_per_trade",
    "sampling_interval_ns",
    "output_dir",
];

const GBM_KEYS: &[&str] = &[
    "gbm_s0",
    "gbm_mu",
    "gbm_sigma",
    "gbm_dt",
    "gbm_n",
    "gbm_seed",
];

impl RunConfig {
    pub const DEFAULT_LOOK_BACKS: [usize; 3] = [3, 5, 8];
    pub const DEFAULT_EPSILON: f64 = 0.0;
    pub const DEFAULT_UNIT_SIZE: f64 = 1.0;
    pub const DEFAULT_VOL_WINDOW: Nanos = 3_600_000_000_000;
    pub const DEFAULT_SYNC_BAND_KAPPA: f64 = 1.0;
    pub const DEFAULT_COST_PER_TRADE: f64 = 0.0;
    pub const DEFAULT_SAMPLING_INTERVAL: Nanos = 3_600_000_000_000;

    /// A config with defaults for everything but data, thresholds and output.
    pub fn new(data_source: DataSource, thresholds: Vec<Threshold>, output_dir: PathBuf) -> Self {
        Self {
            data_source,
            thresholds,
            look_backs: Self::DEFAULT_LOOK_BACKS
                .iter()
                .map(|&n| LookBack::new(n).expect("default look-backs are valid"))
                .collect(),
            epsilon: Self::DEFAULT_EPSILON,
            unit_size: Self::DEFAULT_UNIT_SIZE,
            vol_window: Self::DEFAULT_VOL_WINDOW,
            sync_band_kappa: Self::DEFAULT_SYNC_BAND_KAPPA,
            cost_per_trade: Self::DEFAULT_COST_PER_TRADE,
            sampling_interval: Self::DEFAULT_SAMPLING_INTERVAL,
            output_dir,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.thresholds.is_empty() {
            return Err(invalid("thresholds", "at least one threshold is required"));
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("thresholds", "must be strictly increasing"));
        }
        if self.look_backs.is_empty() {
            return Err(invalid("look_backs", "at least one look-back is required"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(invalid("epsilon", "must be a non-negative number"));
        }
        if !(self.unit_size.is_finite() && self.unit_size > 0.0) {
            return Err(invalid("unit_size", "must be positive"));
        }
        if self.vol_window <= 0 {
            return Err(invalid("vol_window_ns", "must be positive"));
        }
        if !(self.sync_band_kappa.is_finite() && self.sync_band_kappa > 0.0) {
            return Err(invalid("sync_band_kappa", "must be positive"));
        }
        if !(self.cost_per_trade.is_finite() && self.cost_per_trade >= 0.0) {
            return Err(invalid("cost_per_trade", "must be non-negative"));
        }
        if self.sampling_interval <= 0 {
            return Err(invalid("sampling_interval_ns", "must be positive"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(invalid("output_dir", "must not be empty"));
        }
        if let DataSource::Gbm(p) = &self.data_source {
            p.validate().map_err(|e| invalid("gbm", e.to_string()))?;
        }
        Ok(())
    }

    pub fn engine_config(&self) -> DeltaEngineConfig {
        DeltaEngineConfig {
            agents: self
                .thresholds
                .iter()
                .map(|&threshold| AgentConfig {
                    threshold,
                    look_backs: self.look_backs.clone(),
                    epsilon: self.epsilon,
                    vol_window: self.vol_window,
                    sync_band_kappa: self.sync_band_kappa,
                })
                .collect(),
            unit_size: self.unit_size,
            cost_per_trade: self.cost_per_trade,
        }
    }

    /// Serializes back to the flat format; `load_config` of the result is `self`.
    pub fn to_flat_string(&self) -> String {
        self.to_string()
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        match &self.data_source {
            DataSource::Csv { path, instrument } => {
                writeln!(s, "data_csv = {}", path.display())?;
                writeln!(s, "instrument = {instrument}")?;
            }
            DataSource::Gbm(p) => {
                writeln!(s, "gbm_s0 = {}", p.s0)?;
                writeln!(s, "gbm_mu = {}", p.mu)?;
                writeln!(s, "gbm_sigma = {}", p.sigma)?;
                writeln!(s, "gbm_dt = {}", p.dt)?;
                writeln!(s, "gbm_n = {}", p.n)?;
                writeln!(s, "gbm_seed = {}", p.seed)?;
            }
        }
        let look_backs: Vec<usize> = self.look_backs.iter().map(|l| l.size()).collect();
        writeln!(s, "thresholds = {}", join(&self.thresholds))?;
        writeln!(s, "look_backs = {}", join(&look_backs))?;
        writeln!(s, "epsilon = {}", self.epsilon)?;
        writeln!(s, "unit_size = {}", self.unit_size)?;
        writeln!(s, "vol_window_ns = {}", self.vol_window)?;
        writeln!(s, "sync_band_kappa = {}", self.sync_band_kappa)?;
        writeln!(s, "cost_per_trade = {}", self.cost_per_trade)?;
        writeln!(s, "sampling_interval_ns = {}", self.sampling_interval)?;
        writeln!(s, "output_dir = {}", self.output_dir.display())?;
        f.write_str(&s)
    }
}

fn parse_value<T: FromStr>(
    raw: &BTreeMap<&str, &str>,
    key: &str,
) -> Result<Option<T>, ConfigError> {
    match raw.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| invalid(key, format!("cannot parse `{v}`"))),
    }
}

fn parse_list<T: FromStr>(
    raw: &BTreeMap<&str, &str>,
    key: &str,
) -> Result<Option<Vec<T>>, ConfigError> {
    let Some(v) = raw.get(key) else {
        return Ok(None);
    };
    v.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse()
                .map_err(|_| invalid(key, format!("cannot parse list item `{item}`")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

/// Parses and validates a flat config.
pub fn load_config(source: &str) -> Result<RunConfig, ConfigError> {
    let mut raw: BTreeMap<&str, &str> = BTreeMap::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or(ConfigError::ParseError(line_no))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::ParseError(line_no));
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        if raw.insert(key, value).is_some() {
            return Err(ConfigError::ParseError(line_no));
        }
    }

    let has_csv = raw.contains_key("data_csv");
    let gbm_given = GBM_KEYS.iter().filter(|k| raw.contains_key(*k)).count();
    let data_source = match (has_csv, gbm_given) {
        (true, 0) => {
            let path = PathBuf::from(raw["data_csv"]);
            let instrument = match raw.get("instrument") {
                Some(i) => i.to_string(),
                None => path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "UNKNOWN".to_string()),
            };
            DataSource::Csv { path, instrument }
        }
        (false, n) if n == GBM_KEYS.len() => {
            if raw.contains_key("instrument") {
                return Err(invalid("instrument", "only valid with data_csv"));
            }
            let req = |k: &str| -> Result<f64, ConfigError> { Ok(parse_value(&raw, k)?.unwrap()) };
            DataSource::Gbm(GbmParams {
                s0: req("gbm_s0")?,
                mu: req("gbm_mu")?,
                sigma: req("gbm_sigma")?,
                dt: req("gbm_dt")?,
                n: parse_value(&raw, "gbm_n")?.unwrap(),
                seed: parse_value(&raw, "gbm_seed")?.unwrap(),
            })
        }
        (false, 0) => return Err(invalid("data_csv", "a data source is required")),
        (true, _) => {
            return Err(invalid(
                "data_csv",
                "give either data_csv or gbm_* keys, not both",
            ))
        }
        (false, _) => return Err(invalid("gbm", "all gbm_* keys are required")),
    };

    let thresholds: Vec<f64> =
        parse_list(&raw, "thresholds")?.ok_or_else(|| invalid("thresholds", "required"))?;
    let thresholds = thresholds
        .into_iter()
        .map(|t| Threshold::new(t).map_err(|e| invalid("thresholds", e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let output_dir = PathBuf::from(
        *raw.get("output_dir")
            .ok_or_else(|| invalid("output_dir", "required"))?,
    );

    let mut config = RunConfig::new(data_source, thresholds, output_dir);
    if let Some(lbs) = parse_list::<usize>(&raw, "look_backs")? {
        config.look_backs = lbs
            .into_iter()
            .map(|n| LookBack::new(n).map_err(|e| invalid("look_backs", e.to_string())))
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = parse_value(&raw, "epsilon")? {
        config.epsilon = v;
    }
    if let Some(v) = parse_value(&raw, "unit_size")? {
        config.unit_size = v;
    }
    if let Some(v) = parse_value(&raw, "vol_window_ns")? {
        config.vol_window = v;
    }
    if let Some(v) = parse_value(&raw, "sync_band_kappa")? {
        config.sync_band_kappa = v;
    }
    if let Some(v) = parse_value(&raw, "cost_per_trade")? {
        config.cost_per_trade = v;
    }
    if let Some(v) = parse_value(&raw, "sampling_interval_ns")? {
        config.sampling_interval = v;
    }
    config.validate()?;
    Ok(config)
}
