//! Intrinsic-time analytics and a contrarian multi-scale backtester.
//!
//! The crate turns a tick series into event-based time (directional changes
//! and overshoots at a set of relative thresholds), measures the scaling laws
//! that hold in that frame, and runs a trading engine whose per-threshold
//! agents fit support and resistance lines to overshoots and trade only on
//! contrarian breakouts.
//!
//! - [`tick`]: tick CSV loading and a seeded GBM generator
//! - [`intrinsic`]: the dissection state machine
//! - [`scaling`]: power-law fits, DC-count and overshoot laws, volatility proxy, bridging check
//! - [`trend`]: trend-line fitting and breakout detection
//! - [`engine`]: agents, silencing, aggregation and the position machine
//! - [`backtest`]: run configuration, orchestration and report files
//!
//! ```
//! use delta_engine::intrinsic::{dissect, Threshold};
//! use delta_engine::tick::TickSeries;
//!
//! let series = TickSeries::from_prices("EURUSD", &[100.0, 101.0, 99.99, 99.0, 100.0]).unwrap();
//! let events = dissect(&series, Threshold::new(0.01).unwrap()).unwrap();
//! assert_eq!(events.len(), 2);
//! ```

pub mod backtest;
pub mod engine;
pub mod intrinsic;
pub mod scaling;
pub mod tick;
pub mod trend;

pub use backtest::{load_config, run_backtest, BacktestReport, RunConfig};
pub use engine::{DeltaEngine, TradeRecord};
pub use intrinsic::{dissect, DissectionState, IntrinsicEvent, Threshold};
pub use tick::{generate_gbm, parse_tick_csv, GbmParams, Tick, TickSeries};
