//! Intrinsic-time dissection: a hand-sized series traced event by event, then
//! a streamed GBM path at several thresholds.
//!
//! ```bash
//! cargo run --release -p delta-engine --example dissect_series
//! ```

use delta_engine::intrinsic::{dissect, DissectionState, Mode, Threshold};
use delta_engine::tick::{generate_gbm, GbmParams, TickSeries};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prices = [
        100.0, 101.0, 99.99, 98.9901, 98.0, 99.5, 100.1, 101.2, 100.0,
    ];
    let series = TickSeries::from_prices("TOY", &prices)?;
    let delta = Threshold::new(0.01)?;

    println!("delta = {delta}");
    let mut state = DissectionState::new(delta, series.first());
    for tick in series.ticks() {
        let events = state.update(*tick)?;
        let tags: Vec<String> = events
            .iter()
            .map(|e| {
                format!(
                    "#{} {} {}",
                    e.ordinal,
                    e.kind.as_str(),
                    e.direction.as_str()
                )
            })
            .collect();
        println!(
            "t={:>2}s price {:>8} mode {:<5} extreme {:>8} {}",
            tick.timestamp / 1_000_000_000,
            tick.price,
            match state.mode() {
                Mode::Unset => "unset",
                Mode::Up => "up",
                Mode::Down => "down",
            },
            state.extreme_price(),
            tags.join(", ")
        );
    }

    // Batch dissection gives the same stream.
    assert_eq!(dissect(&series, delta)?.len() as u64, state.next_ordinal());

    let gbm = generate_gbm(&GbmParams {
        s0: 100.0,
        mu: 0.0,
        sigma: 5e-5,
        dt: 1.0,
        n: 500_000,
        seed: 3,
    })?;
    println!("\n{} ticks of {}", gbm.len(), gbm.instrument());
    println!(
        "{:>8} {:>8} {:>8} {:>14}",
        "delta", "DCs", "OSs", "ticks per DC"
    );
    for d in [0.0005, 0.001, 0.002, 0.004] {
        let events = dissect(&gbm, Threshold::new(d)?)?;
        let dcs = events.iter().filter(|e| e.is_dc()).count();
        println!(
            "{:>8} {:>8} {:>8} {:>14.1}",
            d,
            dcs,
            events.len() - dcs,
            gbm.len() as f64 / dcs.max(1) as f64
        );
    }
    Ok(())
}
