//! The contrarian multi-scale trading core.
//!
//! One [`Agent`] runs per threshold. Each agent dissects the tick stream,
//! maintains resistance/support lines per look-back over its overshoots and
//! emits a [`Signal`] whenever the price breaches one of them. A signal is
//! *contrarian* when its direction opposes the agent's current intrinsic
//! mode. Agents whose short-run directional-change rate drifts out of a
//! relative band around their long-run rate are silenced.
//!
//! [`EngineState`] consumes signals: it trades only on contrarian ones, opens
//! `u` on the first, and afterwards flips with `2u` only on a contrarian
//! signal opposing the open position, so exposure alternates between `+u`
//! and `-u`. Trade decisions never look at PnL.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intrinsic::{
    Direction, DissectionError, DissectionState, EventKind, IntrinsicEvent, Mode, Threshold,
};
use crate::tick::{Nanos, Tick, NANOS_PER_SECOND};
use crate::trend::{detect_breakout, line_from_points, Breakout, LineKind, LookBack, TrendLine};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("invalid engine parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Dissection(#[from] DissectionError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub threshold: Threshold,
    pub look_backs: Vec<LookBack>,
    /// Breach tolerance in log-price.
    pub epsilon: f64,
    /// Rolling window for the observed directional-change rate.
    pub vol_window: Nanos,
    /// Relative band around the long-run rate outside which the agent is silenced.
    pub sync_band_kappa: f64,
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::InvalidConfig(m.to_string()));
        if self.look_backs.is_empty() {
            return bad("look_backs must not be empty");
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad("epsilon must be non-negative");
        }
        if self.vol_window <= 0 {
            return bad("vol_window must be positive");
        }
        if !(self.sync_band_kappa.is_finite() && self.sync_band_kappa > 0.0) {
            return bad("sync_band_kappa must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub agent_threshold: Threshold,
    pub direction: Direction,
    pub contrarian: bool,
    pub timestamp: Nanos,
    pub breakout: Breakout,
}

#[derive(Debug, Clone)]
struct LineSlot {
    kind: LineKind,
    look_back: LookBack,
    line: Option<TrendLine>,
}

/// Per-threshold agent state.
#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    dissection: Option<DissectionState>,
    event_history: Vec<IntrinsicEvent>,
    recent_up_os: VecDeque<(u64, f64)>,
    recent_down_os: VecDeque<(u64, f64)>,
    max_look_back: usize,
    lines: Vec<LineSlot>,
    silenced: bool,
    expected_dc_rate: f64,
    observed_dc_rate: f64,
    first_timestamp: Option<Nanos>,
    total_dc: usize,
    window_dc_times: VecDeque<Nanos>,
    last_silence_eval: Option<Nanos>,
}

impl Agent {
    pub fn new(config: AgentConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let mut look_backs = config.look_backs.clone();
        look_backs.sort();
        look_backs.dedup();
        let lines = [LineKind::Resistance, LineKind::Support]
            .into_iter()
            .flat_map(|kind| {
                look_backs.iter().map(move |&look_back| LineSlot {
                    kind,
                    look_back,
                    line: None,
                })
            })
            .collect();
        let max_look_back = look_backs.last().map_or(2, |l| l.size());
        Ok(Self {
            config,
            dissection: None,
            event_history: Vec::new(),
            recent_up_os: VecDeque::with_capacity(max_look_back + 1),
            recent_down_os: VecDeque::with_capacity(max_look_back + 1),
            max_look_back,
            lines,
            silenced: false,
            expected_dc_rate: 0.0,
            observed_dc_rate: 0.0,
            first_timestamp: None,
            total_dc: 0,
            window_dc_times: VecDeque::new(),
            last_silence_eval: None,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn threshold(&self) -> Threshold {
        self.config.threshold
    }

    pub fn mode(&self) -> Mode {
        self.dissection.as_ref().map_or(Mode::Unset, |d| d.mode())
    }

    pub fn dissection(&self) -> Option<&DissectionState> {
        self.dissection.as_ref()
    }

    pub fn events(&self) -> &[IntrinsicEvent] {
        &self.event_history
    }

    /// Currently maintained lines, resistance first, then by look-back.
    pub fn lines(&self) -> impl Iterator<Item = &TrendLine> {
        self.lines.iter().filter_map(|s| s.line.as_ref())
    }

    pub fn is_silenced(&self) -> bool {
        self.silenced
    }

    pub fn expected_dc_rate(&self) -> f64 {
        self.expected_dc_rate
    }

    pub fn observed_dc_rate(&self) -> f64 {
        self.observed_dc_rate
    }

    /// Processes one tick, appending any breakout signals to `signals`.
    ///
    /// Lines are refit when new overshoots of their direction arrive; the
    /// tick price is then tested against every line at the latest ordinal.
    pub fn on_tick(&mut self, tick: Tick, signals: &mut Vec<Signal>) -> Result<usize, EngineError> {
        let dissection = self
            .dissection
            .get_or_insert_with(|| DissectionState::new(self.config.threshold, tick));
        self.first_timestamp.get_or_insert(tick.timestamp);

        let before = self.event_history.len();
        dissection.update_into(tick, &mut self.event_history)?;
        let mode = dissection.mode();
        let ordinal = dissection.last_ordinal();

        let mut refit_up = false;
        let mut refit_down = false;
        for e in &self.event_history[before..] {
            match (e.kind, e.direction) {
                (EventKind::DirectionalChange, _) => {
                    self.total_dc += 1;
                    self.window_dc_times.push_back(e.timestamp);
                }
                (EventKind::Overshoot, Direction::Up) => {
                    push_capped(
                        &mut self.recent_up_os,
                        (e.ordinal, e.price.ln()),
                        self.max_look_back,
                    );
                    refit_up = true;
                }
                (EventKind::Overshoot, Direction::Down) => {
                    push_capped(
                        &mut self.recent_down_os,
                        (e.ordinal, e.price.ln()),
                        self.max_look_back,
                    );
                    refit_down = true;
                }
            }
        }
        if refit_up || refit_down {
            self.refit(refit_up, refit_down);
        }

        if self.silenced {
            return Ok(0);
        }
        let Some(ordinal) = ordinal else {
            return Ok(0);
        };
        let mut emitted = 0;
        for slot in &self.lines {
            let Some(line) = &slot.line else { continue };
            // Lines are anchored on emitted events, so `ordinal` is never before the anchor.
            if let Ok(Some(breakout)) = detect_breakout(
                line,
                tick.price,
                ordinal,
                tick.timestamp,
                self.config.epsilon,
            ) {
                signals.push(Signal {
                    agent_threshold: self.config.threshold,
                    direction: breakout.direction,
                    contrarian: mode.direction().is_some_and(|m| m != breakout.direction),
                    timestamp: tick.timestamp,
                    breakout,
                });
                emitted += 1;
            }
        }
        Ok(emitted)
    }

    fn refit(&mut self, up: bool, down: bool) {
        let threshold = self.config.threshold;
        for slot in &mut self.lines {
            let recent = match slot.kind {
                LineKind::Resistance if up => &self.recent_up_os,
                LineKind::Support if down => &self.recent_down_os,
                _ => continue,
            };
            let k = slot.look_back.size();
            if recent.len() < k {
                continue;
            }
            let points: Vec<(u64, f64)> = recent.iter().skip(recent.len() - k).copied().collect();
            // Ordinals are strictly increasing, so the fit is never degenerate.
            slot.line = line_from_points(slot.kind, slot.look_back, threshold, &points).ok();
        }
    }

    /// Re-evaluates the silencing flag at `now`.
    ///
    /// Until a full `vol_window` of data has been seen the agent stays active.
    pub fn silence_update(&mut self, now: Nanos) {
        self.last_silence_eval = Some(now);
        let window = self.config.vol_window;
        let cutoff = now - window;
        while self.window_dc_times.front().is_some_and(|&t| t <= cutoff) {
            self.window_dc_times.pop_front();
        }
        let Some(first) = self.first_timestamp else {
            self.silenced = false;
            return;
        };
        let elapsed = now - first;
        if elapsed < window {
            self.silenced = false;
            return;
        }
        self.observed_dc_rate =
            self.window_dc_times.len() as f64 / (window as f64 / NANOS_PER_SECOND);
        self.expected_dc_rate = self.total_dc as f64 / (elapsed as f64 / NANOS_PER_SECOND);
        self.silenced = (self.observed_dc_rate - self.expected_dc_rate).abs()
            > self.config.sync_band_kappa * self.expected_dc_rate;
    }

    /// Runs [`silence_update`](Self::silence_update) when at least
    /// `vol_window / 100` has passed since the previous evaluation.
    pub fn maybe_silence_update(&mut self, now: Nanos) -> bool {
        let cadence = (self.config.vol_window / 100).max(1);
        let due = self
            .last_silence_eval
            .is_none_or(|last| now - last >= cadence);
        if due {
            self.silence_update(now);
        }
        due
    }
}

fn push_capped(buf: &mut VecDeque<(u64, f64)>, item: (u64, f64), cap: usize) {
    if buf.len() == cap {
        buf.pop_front();
    }
    buf.push_back(item);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TradeDirection {
    Long,
    Short,
}

impl TradeDirection {
    pub fn from_signal(direction: Direction) -> Self {
        match direction {
            Direction::Up => TradeDirection::Long,
            Direction::Down => TradeDirection::Short,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TradeDirection::Long => "LONG",
            TradeDirection::Short => "SHORT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub timestamp: Nanos,
    pub direction: TradeDirection,
    pub size: f64,
    pub price: f64,
    pub triggering_threshold: Threshold,
    pub cost: f64,
}

/// Position machine and trade log.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineState {
    unit_size: f64,
    position: Option<TradeDirection>,
    open_price: Option<f64>,
    realized_pnl: f64,
    trades: Vec<TradeRecord>,
}

impl EngineState {
    pub fn new(unit_size: f64) -> Result<Self, EngineError> {
        if !(unit_size.is_finite() && unit_size > 0.0) {
            return Err(EngineError::InvalidParams(
                "unit_size must be positive".into(),
            ));
        }
        Ok(Self {
            unit_size,
            position: None,
            open_price: None,
            realized_pnl: 0.0,
            trades: Vec::new(),
        })
    }

    pub fn unit_size(&self) -> f64 {
        self.unit_size
    }

    pub fn position(&self) -> Option<TradeDirection> {
        self.position
    }

    /// Signed exposure: `0`, `+u` or `-u`.
    pub fn net_exposure(&self) -> f64 {
        match self.position {
            None => 0.0,
            Some(TradeDirection::Long) => self.unit_size,
            Some(TradeDirection::Short) => -self.unit_size,
        }
    }

    pub fn open_price(&self) -> Option<f64> {
        self.open_price
    }

    pub fn realized_pnl(&self) -> f64 {
        self.realized_pnl
    }

    pub fn trades(&self) -> &[TradeRecord] {
        &self.trades
    }

    /// Applies the trading rule to one tick's signals.
    ///
    /// `signals` are expected in ascending threshold order; the first
    /// qualifying one triggers. Costs are charged on every trade.
    pub fn aggregate_and_trade(
        &mut self,
        signals: &[Signal],
        tick: Tick,
        cost_per_trade: f64,
    ) -> Option<TradeRecord> {
        let trigger = signals
            .iter()
            .filter(|s| s.contrarian)
            .find(|s| match self.position {
                None => true,
                Some(TradeDirection::Long) => s.direction == Direction::Down,
                Some(TradeDirection::Short) => s.direction == Direction::Up,
            })?;
        let direction = TradeDirection::from_signal(trigger.direction);

        let size = match (self.position, self.open_price) {
            (Some(held), Some(open)) => {
                let sign = match held {
                    TradeDirection::Long => 1.0,
                    TradeDirection::Short => -1.0,
                };
                self.realized_pnl += sign * self.unit_size * (tick.price - open);
                2.0 * self.unit_size
            }
            _ => self.unit_size,
        };
        self.realized_pnl -= cost_per_trade;
        self.position = Some(direction);
        self.open_price = Some(tick.price);

        let record = TradeRecord {
            timestamp: tick.timestamp,
            direction,
            size,
            price: tick.price,
            triggering_threshold: trigger.agent_threshold,
            cost: cost_per_trade,
        };
        self.trades.push(record);
        Some(record)
    }

    pub fn mark_to_market(&self, price: f64) -> f64 {
        match self.open_price {
            Some(open) => self.realized_pnl + self.net_exposure() * (price - open),
            None => self.realized_pnl,
        }
    }
}

/// What one agent did on the latest tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentTickInfo {
    pub threshold: Threshold,
    /// Silencing flag in force while the tick was tested against the lines.
    pub silenced: bool,
    pub signals: usize,
    pub contrarian_signals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEngineConfig {
    pub agents: Vec<AgentConfig>,
    pub unit_size: f64,
    pub cost_per_trade: f64,
}

/// Agents plus position machine, stepped one tick at a time.
#[derive(Debug, Clone)]
pub struct DeltaEngine {
    agents: Vec<Agent>,
    state: EngineState,
    cost_per_trade: f64,
    signals: Vec<Signal>,
    last_step: Vec<AgentTickInfo>,
    last_tick: Option<Tick>,
}

impl DeltaEngine {
    pub fn new(config: DeltaEngineConfig) -> Result<Self, EngineError> {
        if config.agents.is_empty() {
            return Err(EngineError::InvalidParams(
                "at least one agent is required".into(),
            ));
        }
        if !(config.cost_per_trade.is_finite() && config.cost_per_trade >= 0.0) {
            return Err(EngineError::InvalidParams(
                "cost_per_trade must be non-negative".into(),
            ));
        }
        let mut agents = config
            .agents
            .into_iter()
            .map(Agent::new)
            .collect::<Result<Vec<_>, _>>()?;
        agents.sort_by_key(|a| a.threshold());
        if agents
            .windows(2)
            .any(|w| w[0].threshold() == w[1].threshold())
        {
            return Err(EngineError::InvalidParams(
                "duplicate agent threshold".into(),
            ));
        }
        Ok(Self {
            last_step: Vec::with_capacity(agents.len()),
            agents,
            state: EngineState::new(config.unit_size)?,
            cost_per_trade: config.cost_per_trade,
            signals: Vec::new(),
            last_tick: None,
        })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    /// Signals raised on the latest tick, ascending by threshold.
    pub fn last_signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn last_step(&self) -> &[AgentTickInfo] {
        &self.last_step
    }

    pub fn last_tick(&self) -> Option<Tick> {
        self.last_tick
    }

    /// Feeds one tick through every agent (ascending threshold), then
    /// re-evaluates silencing, then aggregates into at most one trade.
    pub fn step(&mut self, tick: Tick) -> Result<Option<TradeRecord>, EngineError> {
        self.signals.clear();
        self.last_step.clear();
        for agent in &mut self.agents {
            let silenced = agent.is_silenced();
            let start = self.signals.len();
            let n = agent.on_tick(tick, &mut self.signals)?;
            let contrarian = self.signals[start..]
                .iter()
                .filter(|s| s.contrarian)
                .count();
            agent.maybe_silence_update(tick.timestamp);
            self.last_step.push(AgentTickInfo {
                threshold: agent.threshold(),
                silenced,
                signals: n,
                contrarian_signals: contrarian,
            });
        }
        self.last_tick = Some(tick);
        Ok(self
            .state
            .aggregate_and_trade(&self.signals, tick, self.cost_per_trade))
    }

    pub fn mark_to_market(&self) -> f64 {
        match self.last_tick {
            Some(t) => self.state.mark_to_market(t.price),
            None => self.state.realized_pnl(),
        }
    }
}
