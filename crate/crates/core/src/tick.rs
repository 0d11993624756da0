//! Tick data: the CSV loader and a seeded geometric Brownian motion generator.
//!
//! The CSV format is exactly
//!
//! ```text
//! timestamp,price
//! 1000,100
//! 2000,101.5
//! ```
//!
//! with integer nanosecond timestamps, `.` as the decimal separator and `\n`
//! line endings. Timestamps must be non-decreasing; bursts of equal timestamps
//! are kept in arrival order. No filtering of gaps or outliers is applied.

use std::io::{BufRead, Write};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Nanoseconds since the Unix epoch.
pub type Nanos = i64;

pub const NANOS_PER_SECOND: f64 = 1e9;

pub const CSV_HEADER: &str = "timestamp,price";

#[derive(Debug, Error, PartialEq)]
pub enum TickError {
    #[error("malformed row at line {0}")]
    MalformedRow(usize),
    #[error("timestamp at line {0} is earlier than the previous row")]
    NonMonotonicTimestamp(usize),
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("invalid GBM parameters: {0}")]
    InvalidParams(String),
    #[error("invalid tick series: {0}")]
    InvalidSeries(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// One timestamped mid-price observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub timestamp: Nanos,
    pub price: f64,
}

impl Tick {
    pub fn new(timestamp: Nanos, price: f64) -> Self {
        Self { timestamp, price }
    }
}

/// An ordered, non-empty sequence of ticks for a single instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    instrument: String,
    ticks: Vec<Tick>,
}

impl TickSeries {
    /// Builds a series, checking positivity of prices and timestamp ordering.
    pub fn new(instrument: impl Into<String>, ticks: Vec<Tick>) -> Result<Self, TickError> {
        if ticks.is_empty() {
            return Err(TickError::EmptyInput);
        }
        for (i, t) in ticks.iter().enumerate() {
            if !(t.price.is_finite() && t.price > 0.0) {
                return Err(TickError::InvalidSeries(format!(
                    "tick {i} has non-positive price {}",
                    t.price
                )));
            }
            if i > 0 && t.timestamp < ticks[i - 1].timestamp {
                return Err(TickError::InvalidSeries(format!(
                    "tick {i} goes back in time"
                )));
            }
        }
        Ok(Self {
            instrument: instrument.into(),
            ticks,
        })
    }

    /// Convenience constructor for tests and examples: tick `i` is stamped `i` seconds.
    pub fn from_prices(instrument: impl Into<String>, prices: &[f64]) -> Result<Self, TickError> {
        let ticks = prices
            .iter()
            .enumerate()
            .map(|(i, &p)| Tick::new(i as Nanos * 1_000_000_000, p))
            .collect();
        Self::new(instrument, ticks)
    }

    pub fn instrument(&self) -> &str {
        &self.instrument
    }

    pub fn ticks(&self) -> &[Tick] {
        &self.ticks
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn first(&self) -> Tick {
        self.ticks[0]
    }

    pub fn last(&self) -> Tick {
        self.ticks[self.ticks.len() - 1]
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.ticks.iter().map(|t| t.price)
    }

    /// Writes the series in the tick CSV format. Prices use the shortest
    /// decimal representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for t in &self.ticks {
            writeln!(out, "{},{}", t.timestamp, t.price)?;
        }
        out.flush()
    }
}

/// Parses the tick CSV format. Line numbers in errors are 1-based and count the header.
pub fn parse_tick_csv<R: BufRead>(source: R, instrument: &str) -> Result<TickSeries, TickError> {
    let mut lines = source.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim_end_matches('\r') == CSV_HEADER => {}
        Some(Ok(_)) => return Err(TickError::MalformedRow(1)),
        Some(Err(e)) => return Err(TickError::Io(e.to_string())),
        None => return Err(TickError::EmptyInput),
    }

    let mut ticks = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(|_| TickError::MalformedRow(line_no))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (ts, px) = line
            .split_once(',')
            .ok_or(TickError::MalformedRow(line_no))?;
        let timestamp: Nanos = ts.parse().map_err(|_| TickError::MalformedRow(line_no))?;
        let price: f64 = px.parse().map_err(|_| TickError::MalformedRow(line_no))?;
        if !(price.is_finite() && price > 0.0) {
            return Err(TickError::MalformedRow(line_no));
        }
        if let Some(prev) = ticks.last() {
            let prev: &Tick = prev;
            if timestamp < prev.timestamp {
                return Err(TickError::NonMonotonicTimestamp(line_no));
            }
        }
        ticks.push(Tick::new(timestamp, price));
    }

    if ticks.is_empty() {
        return Err(TickError::EmptyInput);
    }
    Ok(TickSeries {
        instrument: instrument.to_string(),
        ticks,
    })
}

/// Parameters of a geometric Brownian motion path.
///
/// `mu` is drift per second and `sigma` volatility per square-root second;
/// `dt` is the step in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub s0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub dt: f64,
    pub n: usize,
    pub seed: u64,
}

impl GbmParams {
    pub fn validate(&self) -> Result<(), TickError> {
        let bad = |msg: &str| Err(TickError::InvalidParams(msg.to_string()));
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return bad("s0 must be positive");
        }
        if !self.mu.is_finite() {
            return bad("mu must be finite");
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad("sigma must be non-negative");
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        Ok(())
    }
}

/// Standard normal draws from a fixed, portable algorithm.
///
/// Uniforms come from ChaCha20 (`rand_chacha`, seeded with `seed_from_u64`,
/// whose output stream is stable across releases): the top 53 bits of each
/// `u64` give `u = (k + 0.5) / 2^53`, which lies strictly inside (0, 1).
/// Pairs of uniforms are turned into pairs of normals with the basic
/// Box-Muller transform `r = sqrt(-2 ln u1)`, `z0 = r cos(2 pi u2)`,
/// `z1 = r sin(2 pi u2)`; both outputs are used, `z0` first.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Generates `n + 1` ticks of an exact-discretisation GBM path.
///
/// Tick `i` is stamped `round(i * dt * 1e9)` ns and
/// `S[i+1] = S[i] * exp((mu - sigma^2 / 2) dt + sigma sqrt(dt) Z[i])`
/// with `Z` drawn from [`NormalStream`].
pub fn generate_gbm(params: &GbmParams) -> Result<TickSeries, TickError> {
    params.validate()?;
    let drift = (params.mu - 0.5 * params.sigma * params.sigma) * params.dt;
    let diffusion = params.sigma * params.dt.sqrt();
    let mut normals = NormalStream::new(params.seed);

    let mut ticks = Vec::with_capacity(params.n + 1);
    let mut price = params.s0;
    ticks.push(Tick::new(0, price));
    for i in 1..=params.n {
        let z = normals.next_normal();
        price *= (drift + diffusion * z).exp();
        let timestamp = (i as f64 * params.dt * NANOS_PER_SECOND).round() as Nanos;
        ticks.push(Tick::new(timestamp, price));
    }
    // Positivity can only fail on overflow/underflow of extreme parameters.
    TickSeries::new(format!("GBM-{}", params.seed), ticks)
}
