//! Configuration, orchestration and reporting for full backtests and
//! scaling-law studies.

mod config;
mod report;

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{load_config, ConfigError, DataSource, RunConfig};
pub use report::{
    emit_reports, emit_scaling_study, emit_tick_csv, write_equity_csv, write_trades_csv,
    EQUITY_CSV_HEADER, TRADES_CSV_HEADER,
};

use crate::engine::{DeltaEngine, EngineError, TradeRecord};
use crate::intrinsic::{IntrinsicEvent, Threshold};
use crate::scaling::{
    avg_overshoot_law_from_stats, bridging_from_parts, dc_count_law_from_stats, realized_variance,
    segment_stats, BridgingReport, ScalingError, ScalingLawFit, SegmentStats, BRIDGING_CALIBRATION,
};
use crate::tick::{generate_gbm, parse_tick_csv, Nanos, TickError, TickSeries};
use crate::trend::TrendLine;

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("tick data: {0}")]
    Tick(#[from] TickError),
    #[error("engine: {0}")]
    Engine(#[from] EngineError),
    #[error("scaling: {0}")]
    Scaling(#[from] ScalingError),
    #[error("i/o error at {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl BacktestError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        BacktestError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, BacktestError::Io { .. })
    }
}

/// Either a value or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome<T> {
    Ok(T),
    Err { error: String },
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            Outcome::Err { .. } => None,
        }
    }
}

impl<T, E: std::fmt::Display> From<Result<T, E>> for Outcome<T> {
    fn from(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Err {
                error: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFits {
    pub dc_count_law: Outcome<ScalingLawFit>,
    pub avg_overshoot_law: Outcome<ScalingLawFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub threshold: Threshold,
    pub dc_count: usize,
    pub os_count: usize,
    pub mean_overshoot: Option<f64>,
    pub bridging: Outcome<BridgingReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub instrument: String,
    pub n_ticks: usize,
    pub thresholds: Vec<ThresholdSummary>,
    pub scaling_fits: ScalingFits,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquityPoint {
    pub timestamp: Nanos,
    pub realized_pnl: f64,
    pub mark_to_market: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub threshold: Threshold,
    pub dc_count: usize,
    pub os_count: usize,
    /// Ticks on which the agent was silenced while testing its lines.
    pub silenced_ticks: usize,
    pub signals: usize,
    pub contrarian_signals: usize,
    pub final_lines: Vec<TrendLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub instrument: String,
    pub n_ticks: usize,
    pub trades: Vec<TradeRecord>,
    /// One point per trade plus one at the final tick.
    pub equity_curve: Vec<EquityPoint>,
    pub agents: Vec<AgentSummary>,
    pub study: ScalingStudy,
    pub final_pnl: f64,
    pub config_echo: RunConfig,
    /// Per-threshold event streams, ascending by threshold. Written to
    /// `events_<delta>.csv`, not to `report.json`.
    #[serde(skip)]
    pub events: Vec<(Threshold, Vec<IntrinsicEvent>)>,
}

/// Loads the tick series a config points to.
pub fn load_series(config: &RunConfig) -> Result<TickSeries, BacktestError> {
    match &config.data_source {
        DataSource::Gbm(params) => Ok(generate_gbm(params)?),
        DataSource::Csv { path, instrument } => {
            let file = File::open(path).map_err(|e| BacktestError::io(path, e))?;
            Ok(parse_tick_csv(BufReader::new(file), instrument)?)
        }
    }
}

/// Event counts, overshoot statistics, bridging checks and both scaling fits.
pub fn scaling_study(
    config: &RunConfig,
    series: &TickSeries,
) -> Result<ScalingStudy, BacktestError> {
    let stats: Vec<SegmentStats> = config
        .thresholds
        .iter()
        .map(|&t| segment_stats(series, t))
        .collect::<Result<_, _>>()?;
    let rv = realized_variance(series, config.sampling_interval);

    let thresholds = stats
        .iter()
        .map(|s| ThresholdSummary {
            threshold: s.threshold,
            dc_count: s.dc_count,
            os_count: s.os_count,
            mean_overshoot: s.mean_overshoot(),
            bridging: match &rv {
                Ok(rv) => Outcome::Ok(bridging_from_parts(
                    s,
                    rv,
                    config.sampling_interval,
                    BRIDGING_CALIBRATION,
                )),
                Err(e) => Outcome::Err {
                    error: e.to_string(),
                },
            },
        })
        .collect();

    Ok(ScalingStudy {
        instrument: series.instrument().to_string(),
        n_ticks: series.len(),
        thresholds,
        scaling_fits: ScalingFits {
            dc_count_law: dc_count_law_from_stats(&stats).into(),
            avg_overshoot_law: avg_overshoot_law_from_stats(&stats).into(),
        },
    })
}

pub fn run_backtest(config: &RunConfig) -> Result<BacktestReport, BacktestError> {
    config.validate()?;
    let series = load_series(config)?;
    run_backtest_on(config, &series)
}

/// Streams `series` through one agent per threshold and the position machine.
pub fn run_backtest_on(
    config: &RunConfig,
    series: &TickSeries,
) -> Result<BacktestReport, BacktestError> {
    config.validate()?;
    log::info!(
        "backtest on {} ({} ticks, {} thresholds)",
        series.instrument(),
        series.len(),
        config.thresholds.len()
    );
    let mut engine = DeltaEngine::new(config.engine_config())?;
    let n_agents = engine.agents().len();
    let mut silenced_ticks = vec![0usize; n_agents];
    let mut signals = vec![0usize; n_agents];
    let mut contrarian = vec![0usize; n_agents];
    let mut equity_curve = Vec::new();

    for &tick in series.ticks() {
        let trade = engine.step(tick)?;
        for (i, info) in engine.last_step().iter().enumerate() {
            silenced_ticks[i] += info.silenced as usize;
            signals[i] += info.signals;
            contrarian[i] += info.contrarian_signals;
        }
        if let Some(t) = trade {
            log::debug!(
                "trade {:?} {} @ {} (delta {})",
                t.direction,
                t.size,
                t.price,
                t.triggering_threshold
            );
            equity_curve.push(EquityPoint {
                timestamp: tick.timestamp,
                realized_pnl: engine.state().realized_pnl(),
                mark_to_market: engine.mark_to_market(),
            });
        }
    }
    let last = series.last();
    let final_pnl = engine.mark_to_market();
    equity_curve.push(EquityPoint {
        timestamp: last.timestamp,
        realized_pnl: engine.state().realized_pnl(),
        mark_to_market: final_pnl,
    });

    let agents = engine
        .agents()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let dc_count = a.events().iter().filter(|e| e.is_dc()).count();
            AgentSummary {
                threshold: a.threshold(),
                dc_count,
                os_count: a.events().len() - dc_count,
                silenced_ticks: silenced_ticks[i],
                signals: signals[i],
                contrarian_signals: contrarian[i],
                final_lines: a.lines().copied().collect(),
            }
        })
        .collect();
    let events = engine
        .agents()
        .iter()
        .map(|a| (a.threshold(), a.events().to_vec()))
        .collect();

    let study = scaling_study(config, series)?;
    log::info!(
        "{} trades, final pnl {}",
        engine.state().trades().len(),
        final_pnl
    );

    Ok(BacktestReport {
        instrument: series.instrument().to_string(),
        n_ticks: series.len(),
        trades: engine.state().trades().to_vec(),
        equity_curve,
        agents,
        study,
        final_pnl,
        config_echo: config.clone(),
        events,
    })
}
