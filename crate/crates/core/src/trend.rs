//! Support and resistance lines over overshoot events.
//!
//! Lines live in (event ordinal, ln price) space: resistance is fit to the
//! most recent upward overshoots and support to the most recent downward
//! ones. The x coordinate is the threshold's global event ordinal (DC and OS
//! share one counter), so extrapolating forward means forward in intrinsic
//! time. The intercept is stored at the line's anchor, the oldest ordinal in
//! the fit window.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intrinsic::{Direction, IntrinsicEvent, Threshold};
use crate::tick::Nanos;

#[derive(Debug, Error, PartialEq)]
pub enum TrendError {
    #[error("look-back must be at least 2, got {0}")]
    InvalidLookBack(usize),
    #[error("need {needed} overshoot events, only {available} available")]
    InsufficientEvents { needed: usize, available: usize },
    #[error("ordinal {ordinal} lies before the line anchor {anchor}")]
    OrdinalBeforeAnchor { ordinal: u64, anchor: u64 },
    #[error("events from more than one threshold")]
    MixedThresholds,
    #[error("all fit points share one ordinal")]
    DegenerateOrdinals,
}

/// Number of most recent same-direction overshoots used in a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct LookBack(usize);

impl LookBack {
    pub fn new(size: usize) -> Result<Self, TrendError> {
        if size >= 2 {
            Ok(Self(size))
        } else {
            Err(TrendError::InvalidLookBack(size))
        }
    }

    pub fn size(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for LookBack {
    type Error = TrendError;
    fn try_from(v: usize) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<LookBack> for usize {
    fn from(l: LookBack) -> usize {
        l.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineKind {
    Resistance,
    Support,
}

impl LineKind {
    /// Overshoot direction the line is fit on.
    pub fn source_direction(self) -> Direction {
        match self {
            LineKind::Resistance => Direction::Up,
            LineKind::Support => Direction::Down,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendLine {
    pub kind: LineKind,
    /// Log-price change per event ordinal.
    pub slope: f64,
    /// Log-price at `anchor_ordinal`.
    pub intercept: f64,
    pub anchor_ordinal: u64,
    pub n_points: usize,
    pub threshold: Threshold,
    pub look_back: LookBack,
}

impl TrendLine {
    /// Line value in log-price at `ordinal`.
    pub fn log_value_at(&self, ordinal: u64) -> Result<f64, TrendError> {
        if ordinal < self.anchor_ordinal {
            return Err(TrendError::OrdinalBeforeAnchor {
                ordinal,
                anchor: self.anchor_ordinal,
            });
        }
        Ok(self.intercept + self.slope * (ordinal - self.anchor_ordinal) as f64)
    }

    pub fn evaluate(&self, ordinal: u64) -> Result<f64, TrendError> {
        self.log_value_at(ordinal).map(f64::exp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakout {
    pub direction: Direction,
    pub line: TrendLine,
    pub price: f64,
    pub timestamp: Nanos,
    pub ordinal_at_breach: u64,
}

/// OLS of `ln price` on ordinal over `(ordinal, ln price)` points, returning
/// `(slope, intercept at the first point's ordinal)`.
pub(crate) fn fit_log_line(points: &[(u64, f64)]) -> Result<(f64, f64), TrendError> {
    let anchor = points[0].0;
    let n = points.len() as f64;
    let xs = points.iter().map(|&(o, _)| (o - anchor) as f64);
    let mx = xs.clone().sum::<f64>() / n;
    let my = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, &(_, y)) in xs.zip(points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(TrendError::DegenerateOrdinals);
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

pub(crate) fn line_from_points(
    kind: LineKind,
    look_back: LookBack,
    threshold: Threshold,
    points: &[(u64, f64)],
) -> Result<TrendLine, TrendError> {
    let (slope, intercept) = fit_log_line(points)?;
    Ok(TrendLine {
        kind,
        slope,
        intercept,
        anchor_ordinal: points[0].0,
        n_points: points.len(),
        threshold,
        look_back,
    })
}

/// Fits a line on the last `look_back` overshoots of the direction `kind` needs.
pub fn fit_trend_line(
    events: &[IntrinsicEvent],
    kind: LineKind,
    look_back: LookBack,
) -> Result<TrendLine, TrendError> {
    let threshold = match events.first() {
        Some(e) => e.threshold,
        None => {
            return Err(TrendError::InsufficientEvents {
                needed: look_back.size(),
                available: 0,
            })
        }
    };
    if events.iter().any(|e| e.threshold != threshold) {
        return Err(TrendError::MixedThresholds);
    }

    let dir = kind.source_direction();
    let mut recent: Vec<(u64, f64)> = events
        .iter()
        .rev()
        .filter(|e| e.is_overshoot(dir))
        .take(look_back.size())
        .map(|e| (e.ordinal, e.price.ln()))
        .collect();
    if recent.len() < look_back.size() {
        return Err(TrendError::InsufficientEvents {
            needed: look_back.size(),
            available: recent.len(),
        });
    }
    recent.reverse();
    line_from_points(kind, look_back, threshold, &recent)
}

pub fn evaluate_line(line: &TrendLine, ordinal: u64) -> Result<f64, TrendError> {
    line.evaluate(ordinal)
}

/// Strict breach test in log space with additive tolerance `epsilon`.
pub fn detect_breakout(
    line: &TrendLine,
    price: f64,
    ordinal: u64,
    timestamp: Nanos,
    epsilon: f64,
) -> Result<Option<Breakout>, TrendError> {
    let level = line.log_value_at(ordinal)?;
    let lp = price.ln();
    let direction = match line.kind {
        LineKind::Resistance if lp > level + epsilon => Direction::Up,
        LineKind::Support if lp < level - epsilon => Direction::Down,
        _ => return Ok(None),
    };
    Ok(Some(Breakout {
        direction,
        line: *line,
        price,
        timestamp,
        ordinal_at_breach: ordinal,
    }))
}
