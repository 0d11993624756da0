//! Seeded GBM generation, tick CSV output and the parse round trip.
//!
//! ```bash
//! cargo run --release -p delta-engine --example gbm_generation [out.csv]
//! ```

use std::io::BufReader;

use delta_engine::backtest::emit_tick_csv;
use delta_engine::tick::{generate_gbm, parse_tick_csv, GbmParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = GbmParams {
        s0: 100.0,
        mu: 0.0,
        sigma: 0.002,
        dt: 1.0,
        n: 86_400,
        seed: 42,
    };
    let series = generate_gbm(&params)?;
    let again = generate_gbm(&params)?;
    assert_eq!(series, again, "same seed, same path");

    let log_returns: Vec<f64> = series
        .ticks()
        .windows(2)
        .map(|w| (w[1].price / w[0].price).ln())
        .collect();
    let n = log_returns.len() as f64;
    let mean = log_returns.iter().sum::<f64>() / n;
    let sd = (log_returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    println!(
        "{}: {} ticks, last price {:.4}",
        series.instrument(),
        series.len(),
        series.last().price
    );
    println!(
        "per-tick log-return sd {sd:.6} (sigma * sqrt(dt) = {})",
        params.sigma * params.dt.sqrt()
    );

    let path = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("gbm_42.csv"));
    emit_tick_csv(&series, &path)?;
    let parsed = parse_tick_csv(
        BufReader::new(std::fs::File::open(&path)?),
        series.instrument(),
    )?;
    assert_eq!(parsed, series, "CSV round trip is exact");
    println!("wrote and re-read {}", path.display());
    Ok(())
}
