//! Intrinsic-time dissection of a price series into directional changes and
//! overshoots at a relative threshold.
//!
//! A [`DissectionState`] is a small state machine fed one tick at a time.
//! Thresholds are multiplicative: an upward directional change fires when
//! `p >= low * (1 + delta)` and a downward one when `p <= high * (1 - delta)`,
//! where `low`/`high` is the running extreme since the last change. Boundary
//! ties trigger. After a change, overshoot events fire each time the price
//! moves a further factor `(1 + delta)` (or `(1 - delta)`) past the anchor,
//! which starts at the confirming price and advances multiplicatively.
//!
//! The first `delta` move away from the initial price only sets the mode; it
//! emits nothing, and no overshoots are reported until the first real
//! directional change.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tick::{Nanos, Tick, TickSeries};

#[derive(Debug, Error, PartialEq)]
pub enum DissectionError {
    #[error("threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("tick at {got} ns arrived after a tick at {last} ns")]
    StaleTick { last: Nanos, got: Nanos },
    #[error("price must be positive and finite, got {0}")]
    InvalidPrice(f64),
}

/// A relative price-move size, `0 < delta < 1` (0.01 is 1%).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(delta: f64) -> Result<Self, DissectionError> {
        if delta.is_finite() && delta > 0.0 && delta < 1.0 {
            Ok(Self(delta))
        } else {
            Err(DissectionError::InvalidThreshold(delta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    fn up_factor(self) -> f64 {
        1.0 + self.0
    }

    #[inline]
    fn down_factor(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for Threshold {
    type Error = DissectionError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Threshold> for f64 {
    fn from(t: Threshold) -> f64 {
        t.0
    }
}

// NaN is excluded by construction, so the total order is safe.
impl Eq for Threshold {}

impl PartialOrd for Threshold {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Threshold {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "UP",
            Direction::Down => "DOWN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    DirectionalChange,
    Overshoot,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::DirectionalChange => "DC",
            EventKind::Overshoot => "OS",
        }
    }
}

/// One intrinsic-time tick at a given threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicEvent {
    pub kind: EventKind,
    pub direction: Direction,
    pub threshold: Threshold,
    /// Price of the tick that confirmed the event.
    pub price: f64,
    pub timestamp: Nanos,
    /// Position in this threshold's event stream, starting at 0.
    pub ordinal: u64,
}

impl IntrinsicEvent {
    pub fn is_dc(&self) -> bool {
        self.kind == EventKind::DirectionalChange
    }

    pub fn is_overshoot(&self, direction: Direction) -> bool {
        self.kind == EventKind::Overshoot && self.direction == direction
    }
}

/// Current trend of a dissection. `Unset` until the first `delta` move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Unset,
    Up,
    Down,
}

impl Mode {
    pub fn direction(self) -> Option<Direction> {
        match self {
            Mode::Unset => None,
            Mode::Up => Some(Direction::Up),
            Mode::Down => Some(Direction::Down),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissectionState {
    threshold: Threshold,
    mode: Mode,
    extreme_price: f64,
    os_reference_price: f64,
    next_ordinal: u64,
    // Running bounds while the mode is still unset.
    unset_low: f64,
    unset_high: f64,
    last_timestamp: Nanos,
}

impl DissectionState {
    pub fn new(threshold: Threshold, first_tick: Tick) -> Self {
        let p = first_tick.price;
        Self {
            threshold,
            mode: Mode::Unset,
            extreme_price: p,
            os_reference_price: p,
            next_ordinal: 0,
            unset_low: p,
            unset_high: p,
            last_timestamp: first_tick.timestamp,
        }
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Max (mode `Up`) or min (mode `Down`) price since the last directional change.
    pub fn extreme_price(&self) -> f64 {
        self.extreme_price
    }

    pub fn os_reference_price(&self) -> f64 {
        self.os_reference_price
    }

    pub fn next_ordinal(&self) -> u64 {
        self.next_ordinal
    }

    /// Ordinal of the most recently emitted event, if any.
    pub fn last_ordinal(&self) -> Option<u64> {
        self.next_ordinal.checked_sub(1)
    }

    /// Feeds one tick and returns the events it confirms.
    pub fn update(&mut self, tick: Tick) -> Result<Vec<IntrinsicEvent>, DissectionError> {
        let mut out = Vec::new();
        self.update_into(tick, &mut out)?;
        Ok(out)
    }

    /// Like [`update`](Self::update) but appends to `out`; returns how many events were added.
    pub fn update_into(
        &mut self,
        tick: Tick,
        out: &mut Vec<IntrinsicEvent>,
    ) -> Result<usize, DissectionError> {
        if tick.timestamp < self.last_timestamp {
            return Err(DissectionError::StaleTick {
                last: self.last_timestamp,
                got: tick.timestamp,
            });
        }
        if !(tick.price.is_finite() && tick.price > 0.0) {
            return Err(DissectionError::InvalidPrice(tick.price));
        }
        self.last_timestamp = tick.timestamp;

        let before = out.len();
        let p = tick.price;
        let up = self.threshold.up_factor();
        let down = self.threshold.down_factor();

        match self.mode {
            Mode::Unset => {
                self.unset_low = self.unset_low.min(p);
                self.unset_high = self.unset_high.max(p);
                if p >= self.unset_low * up {
                    self.set_mode(Mode::Up, p);
                } else if p <= self.unset_high * down {
                    self.set_mode(Mode::Down, p);
                }
            }
            Mode::Up => {
                if p <= self.extreme_price * down {
                    self.emit(out, EventKind::DirectionalChange, Direction::Down, tick);
                    self.set_mode(Mode::Down, p);
                } else {
                    if p > self.extreme_price {
                        self.extreme_price = p;
                    }
                    if self.next_ordinal > 0 {
                        while p >= self.os_reference_price * up {
                            self.os_reference_price *= up;
                            self.emit(out, EventKind::Overshoot, Direction::Up, tick);
                        }
                    }
                }
            }
            Mode::Down => {
                if p >= self.extreme_price * up {
                    self.emit(out, EventKind::DirectionalChange, Direction::Up, tick);
                    self.set_mode(Mode::Up, p);
                } else {
                    if p < self.extreme_price {
                        self.extreme_price = p;
                    }
                    if self.next_ordinal > 0 {
                        while p <= self.os_reference_price * down {
                            self.os_reference_price *= down;
                            self.emit(out, EventKind::Overshoot, Direction::Down, tick);
                        }
                    }
                }
            }
        }
        Ok(out.len() - before)
    }

    fn set_mode(&mut self, mode: Mode, price: f64) {
        self.mode = mode;
        self.extreme_price = price;
        self.os_reference_price = price;
    }

    fn emit(
        &mut self,
        out: &mut Vec<IntrinsicEvent>,
        kind: EventKind,
        direction: Direction,
        tick: Tick,
    ) {
        out.push(IntrinsicEvent {
            kind,
            direction,
            threshold: self.threshold,
            price: tick.price,
            timestamp: tick.timestamp,
            ordinal: self.next_ordinal,
        });
        self.next_ordinal += 1;
    }
}

/// Runs the dissection over a whole series.
pub fn dissect(
    series: &TickSeries,
    threshold: Threshold,
) -> Result<Vec<IntrinsicEvent>, DissectionError> {
    let mut state = DissectionState::new(threshold, series.first());
    let mut events = Vec::new();
    for &tick in series.ticks() {
        state.update_into(tick, &mut events)?;
    }
    Ok(events)
}

pub const EVENTS_CSV_HEADER: &str = "ordinal,timestamp,kind,direction,threshold,price";

pub fn write_events_csv<W: Write>(events: &[IntrinsicEvent], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{EVENTS_CSV_HEADER}")?;
    for e in events {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            e.ordinal,
            e.timestamp,
            e.kind.as_str(),
            e.direction.as_str(),
            e.threshold,
            e.price
        )?;
    }
    out.flush()
}
