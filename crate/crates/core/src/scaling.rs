//! Power-law fitting and the intrinsic-time scaling laws.
//!
//! All laws take the form `y = C x^alpha` and are fit by ordinary least
//! squares on `(ln x, ln y)`. Overshoot length is measured in log-price:
//! for each directional-change segment, `omega = |ln(p_extreme / p_dc)|`
//! where `p_dc` confirms the segment and `p_extreme` is the furthest price
//! reached before the next change. Only segments closed by a later change
//! are counted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intrinsic::{DissectionError, DissectionState, IntrinsicEvent, Threshold};
use crate::tick::{Nanos, TickSeries, NANOS_PER_SECOND};

#[derive(Debug, Error, PartialEq)]
pub enum ScalingError {
    #[error("need at least two points, got {0}")]
    InsufficientPoints(usize),
    #[error("all x values are equal")]
    DegenerateX,
    #[error("point {index} is not strictly positive: ({x}, {y})")]
    NonPositiveValue { index: usize, x: f64, y: f64 },
    #[error("threshold {0} produced no directional changes")]
    NoEvents(Threshold),
    #[error("window must be positive, got {0} ns")]
    InvalidWindow(Nanos),
    #[error("event at threshold {found} passed to an estimate for {expected}")]
    ThresholdMismatch {
        expected: Threshold,
        found: Threshold,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Dissection(#[from] DissectionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogPoint {
    pub x: f64,
    pub y: f64,
}

impl LogLogPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// A fitted `y = c * x^alpha`, with the points it was fit on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingLawFit {
    pub c: f64,
    pub alpha: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub points: Vec<LogLogPoint>,
}

impl ScalingLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.c * x.powf(self.alpha)
    }
}

pub fn fit_power_law(points: &[LogLogPoint]) -> Result<ScalingLawFit, ScalingError> {
    if points.len() < 2 {
        return Err(ScalingError::InsufficientPoints(points.len()));
    }
    for (index, p) in points.iter().enumerate() {
        if !(p.x > 0.0 && p.y > 0.0 && p.x.is_finite() && p.y.is_finite()) {
            return Err(ScalingError::NonPositiveValue {
                index,
                x: p.x,
                y: p.y,
            });
        }
    }

    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;

    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(ScalingError::DegenerateX);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();

    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(x, y)| {
                let r = y - (intercept + alpha * x);
                r * r
            })
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };

    Ok(ScalingLawFit {
        c: intercept.exp(),
        alpha,
        r_squared,
        n_points: points.len(),
        points: points.to_vec(),
    })
}

/// Directional-change count and closed-segment overshoot lengths at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStats {
    pub threshold: Threshold,
    pub dc_count: usize,
    pub os_count: usize,
    /// One `omega` per segment that was closed by a later directional change.
    pub overshoots: Vec<f64>,
}

impl SegmentStats {
    pub fn mean_overshoot(&self) -> Option<f64> {
        mean(&self.overshoots)
    }

    pub fn mean_squared_overshoot(&self) -> Option<f64> {
        if self.overshoots.is_empty() {
            return None;
        }
        Some(self.overshoots.iter().map(|w| w * w).sum::<f64>() / self.overshoots.len() as f64)
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn segment_stats(
    series: &TickSeries,
    threshold: Threshold,
) -> Result<SegmentStats, ScalingError> {
    let mut state = DissectionState::new(threshold, series.first());
    let mut buf = Vec::with_capacity(8);
    let mut dc_count = 0;
    let mut os_count = 0;
    let mut last_dc_price: Option<f64> = None;
    let mut overshoots = Vec::new();

    for &tick in series.ticks() {
        // A reversal tick cannot extend the old extreme, so the pre-update
        // extreme is the extreme of the segment being closed.
        let extreme = state.extreme_price();
        buf.clear();
        state.update_into(tick, &mut buf)?;
        for e in &buf {
            if e.is_dc() {
                dc_count += 1;
                if let Some(p_dc) = last_dc_price {
                    overshoots.push((extreme / p_dc).ln().abs());
                }
                last_dc_price = Some(e.price);
            } else {
                os_count += 1;
            }
        }
    }

    Ok(SegmentStats {
        threshold,
        dc_count,
        os_count,
        overshoots,
    })
}

fn require_thresholds(thresholds: &[Threshold]) -> Result<(), ScalingError> {
    if thresholds.len() < 2 {
        return Err(ScalingError::InsufficientPoints(thresholds.len()));
    }
    Ok(())
}

/// Fits the number of directional changes against the threshold.
pub fn dc_count_law(
    series: &TickSeries,
    thresholds: &[Threshold],
) -> Result<ScalingLawFit, ScalingError> {
    require_thresholds(thresholds)?;
    let stats = thresholds
        .iter()
        .map(|&t| segment_stats(series, t))
        .collect::<Result<Vec<_>, _>>()?;
    dc_count_law_from_stats(&stats)
}

pub fn dc_count_law_from_stats(stats: &[SegmentStats]) -> Result<ScalingLawFit, ScalingError> {
    if stats.len() < 2 {
        return Err(ScalingError::InsufficientPoints(stats.len()));
    }
    let mut points = Vec::with_capacity(stats.len());
    for s in stats {
        if s.dc_count == 0 {
            return Err(ScalingError::NoEvents(s.threshold));
        }
        points.push(LogLogPoint::new(s.threshold.value(), s.dc_count as f64));
    }
    fit_power_law(&points)
}

/// Fits the mean overshoot length against the threshold.
pub fn avg_overshoot_law(
    series: &TickSeries,
    thresholds: &[Threshold],
) -> Result<ScalingLawFit, ScalingError> {
    require_thresholds(thresholds)?;
    let stats = thresholds
        .iter()
        .map(|&t| segment_stats(series, t))
        .collect::<Result<Vec<_>, _>>()?;
    avg_overshoot_law_from_stats(&stats)
}

pub fn avg_overshoot_law_from_stats(stats: &[SegmentStats]) -> Result<ScalingLawFit, ScalingError> {
    if stats.len() < 2 {
        return Err(ScalingError::InsufficientPoints(stats.len()));
    }
    let mut points = Vec::with_capacity(stats.len());
    for s in stats {
        if s.dc_count == 0 {
            return Err(ScalingError::NoEvents(s.threshold));
        }
        // With a single change there is no closed segment; the mean is taken as 0
        // and rejected by the fit as non-positive.
        let y = s.mean_overshoot().unwrap_or(0.0);
        points.push(LogLogPoint::new(s.threshold.value(), y));
    }
    fit_power_law(&points)
}

/// Multiplier on the volatility proxy. Brownian inversion gives 1.
pub const DEFAULT_VOL_PROXY_FACTOR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityEstimate {
    /// Per square-root second.
    pub sigma_hat: f64,
    pub window_start: Nanos,
    pub window_end: Nanos,
    pub dc_count: usize,
    pub threshold: Threshold,
}

/// Volatility implied by the directional-change rate in `(window_end - window, window_end]`:
/// `sigma_hat = delta * sqrt(dc_count / window_seconds)`.
pub fn volatility_proxy(
    events: &[IntrinsicEvent],
    threshold: Threshold,
    window: Nanos,
    window_end: Nanos,
) -> Result<VolatilityEstimate, ScalingError> {
    volatility_proxy_scaled(
        events,
        threshold,
        window,
        window_end,
        DEFAULT_VOL_PROXY_FACTOR,
    )
}

pub fn volatility_proxy_scaled(
    events: &[IntrinsicEvent],
    threshold: Threshold,
    window: Nanos,
    window_end: Nanos,
    factor: f64,
) -> Result<VolatilityEstimate, ScalingError> {
    if window <= 0 {
        return Err(ScalingError::InvalidWindow(window));
    }
    let window_start = window_end - window;
    let mut dc_count = 0;
    for e in events {
        if e.threshold != threshold {
            return Err(ScalingError::ThresholdMismatch {
                expected: threshold,
                found: e.threshold,
            });
        }
        if e.is_dc() && e.timestamp > window_start && e.timestamp <= window_end {
            dc_count += 1;
        }
    }
    let seconds = window as f64 / NANOS_PER_SECOND;
    Ok(VolatilityEstimate {
        sigma_hat: factor * threshold.value() * (dc_count as f64 / seconds).sqrt(),
        window_start,
        window_end,
        dc_count,
        threshold,
    })
}

/// Mean ratio `N_DC * mean(omega^2) / realized variance` measured on GBM
/// paths sampled once per second with volatility 0.002 per root second,
/// thresholds 1e-3 and 2e-3 and hourly realized variance (20 seeds,
/// 1001..=1020, one million ticks each; per-path sd 0.14). Reproduce with the
/// `calibrate_bridging` example.
///
/// The ratio depends on how coarse the sampling is relative to the
/// threshold. When the threshold dwarfs the per-tick move, overshoot lengths
/// are exponential with mean `delta`, so `E[omega^2] = 2 delta^2` and the
/// ratio tends to [`BRIDGING_CONTINUUM_CONSTANT`] (measured 2.03 on finely
/// sampled paths). Here the per-tick move is one to two thresholds, which
/// caps the change count far below `sigma^2 T / delta^2`; the longer
/// overshoots only partly make up for it.
pub const BRIDGING_CALIBRATION: f64 = 1.38;

/// Ratio in the continuum limit (`E[omega^2] = 2 delta^2`, `N_DC = sigma^2 T / delta^2`).
pub const BRIDGING_CONTINUUM_CONSTANT: f64 = 2.0;

const DIV_EPSILON: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgingReport {
    pub threshold: Threshold,
    pub dc_count: usize,
    /// `N_DC * mean(omega^2)`, in squared log-price.
    pub lhs: f64,
    /// Sum of squared log-returns sampled every `sampling_interval`.
    pub rhs: f64,
    pub relative_error: f64,
    pub calibration_constant: f64,
    /// Relative error of `lhs / calibration_constant` against `rhs`.
    pub calibrated_relative_error: f64,
    pub sampling_interval: Nanos,
    pub n_returns: usize,
}

pub fn bridging_check(
    series: &TickSeries,
    threshold: Threshold,
    sampling_interval: Nanos,
) -> Result<BridgingReport, ScalingError> {
    bridging_check_calibrated(series, threshold, sampling_interval, BRIDGING_CALIBRATION)
}

pub fn bridging_check_calibrated(
    series: &TickSeries,
    threshold: Threshold,
    sampling_interval: Nanos,
    calibration_constant: f64,
) -> Result<BridgingReport, ScalingError> {
    if sampling_interval <= 0 {
        return Err(ScalingError::InvalidWindow(sampling_interval));
    }
    let rv = realized_variance(series, sampling_interval)?;
    let stats = segment_stats(series, threshold)?;
    Ok(bridging_from_parts(
        &stats,
        &rv,
        sampling_interval,
        calibration_constant,
    ))
}

/// Assembles a [`BridgingReport`] from precomputed segment stats and realized variance.
pub fn bridging_from_parts(
    stats: &SegmentStats,
    rv: &RealizedVariance,
    sampling_interval: Nanos,
    calibration_constant: f64,
) -> BridgingReport {
    let lhs = stats.dc_count as f64 * stats.mean_squared_overshoot().unwrap_or(0.0);
    let rhs = rv.sum_squared;
    let denom = rhs.max(DIV_EPSILON);
    BridgingReport {
        threshold: stats.threshold,
        dc_count: stats.dc_count,
        lhs,
        rhs,
        relative_error: (lhs - rhs).abs() / denom,
        calibration_constant,
        calibrated_relative_error: (lhs / calibration_constant - rhs).abs() / denom,
        sampling_interval,
        n_returns: rv.n_returns,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizedVariance {
    pub sum_squared: f64,
    pub n_returns: usize,
}

/// Sum of squared log-returns on the grid `t0, t0 + dt, ...`, taking the last
/// tick at or before each grid time. Requires at least 10 whole intervals.
pub fn realized_variance(
    series: &TickSeries,
    sampling_interval: Nanos,
) -> Result<RealizedVariance, ScalingError> {
    if sampling_interval <= 0 {
        return Err(ScalingError::InvalidWindow(sampling_interval));
    }
    let ticks = series.ticks();
    let t0 = series.first().timestamp;
    let span = series.last().timestamp - t0;
    let n_returns = (span / sampling_interval) as usize;
    if n_returns < 10 {
        return Err(ScalingError::InsufficientData(format!(
            "series spans {n_returns} sampling intervals, need at least 10"
        )));
    }

    let mut idx = 0;
    let mut sample_at = |t: Nanos| {
        while idx + 1 < ticks.len() && ticks[idx + 1].timestamp <= t {
            idx += 1;
        }
        ticks[idx].price.ln()
    };
    let mut prev = sample_at(t0);
    let mut sum_squared = 0.0;
    for k in 1..=n_returns {
        let cur = sample_at(t0 + k as Nanos * sampling_interval);
        sum_squared += (cur - prev) * (cur - prev);
        prev = cur;
    }
    Ok(RealizedVariance {
        sum_squared,
        n_returns,
    })
}
