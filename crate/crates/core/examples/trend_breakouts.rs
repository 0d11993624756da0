//! Resistance and support lines fitted to overshoots, and the breakouts they
//! produce as a GBM path is replayed.
//!
//! ```bash
//! cargo run --release -p delta-engine --example trend_breakouts
//! ```

use delta_engine::intrinsic::{DissectionState, IntrinsicEvent, Threshold};
use delta_engine::tick::{generate_gbm, GbmParams};
use delta_engine::trend::{detect_breakout, fit_trend_line, LineKind, LookBack};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let series = generate_gbm(&GbmParams {
        s0: 100.0,
        mu: 0.0,
        sigma: 2e-4,
        dt: 1.0,
        n: 50_000,
        seed: 5,
    })?;
    let delta = Threshold::new(0.002)?;
    let look_back = LookBack::new(4)?;

    let mut state = DissectionState::new(delta, series.first());
    let mut events: Vec<IntrinsicEvent> = Vec::new();
    let mut shown = 0;
    let (mut up, mut down) = (0, 0);

    for &tick in series.ticks() {
        let before = events.len();
        state.update_into(tick, &mut events)?;
        let Some(ordinal) = state.last_ordinal() else {
            continue;
        };

        for kind in [LineKind::Resistance, LineKind::Support] {
            // Refit only when this line's overshoot set changed.
            let changed = events[before..]
                .iter()
                .any(|e| e.is_overshoot(kind.source_direction()));
            if events.len() == before || !changed {
                continue;
            }
            let Ok(line) = fit_trend_line(&events, kind, look_back) else {
                continue;
            };
            if shown < 4 {
                println!(
                    "{kind:?} over ordinals {}..: slope {:+.5} per event, level {:.4} at ordinal {ordinal}",
                    line.anchor_ordinal,
                    line.slope,
                    line.evaluate(ordinal)?
                );
                shown += 1;
            }
        }

        for kind in [LineKind::Resistance, LineKind::Support] {
            let Ok(line) = fit_trend_line(&events, kind, look_back) else {
                continue;
            };
            if let Some(b) = detect_breakout(&line, tick.price, ordinal, tick.timestamp, 0.0)? {
                match b.direction {
                    delta_engine::intrinsic::Direction::Up => up += 1,
                    delta_engine::intrinsic::Direction::Down => down += 1,
                }
                if up + down <= 3 {
                    println!(
                        "breakout {} at t={}s: price {:.4} vs line {:.4}, mode {:?}",
                        b.direction.as_str(),
                        b.timestamp / 1_000_000_000,
                        b.price,
                        line.evaluate(ordinal)?,
                        state.mode()
                    );
                }
            }
        }
    }
    println!(
        "\n{} events, {up} upward and {down} downward breakout ticks",
        events.len()
    );
    Ok(())
}
