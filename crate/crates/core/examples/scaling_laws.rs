//! Scaling laws measured on a finely sampled GBM path: the change-count and
//! overshoot laws, the volatility proxy and the bridging check.
//!
//! ```bash
//! cargo run --release -p delta-engine --example scaling_laws
//! ```

use delta_engine::intrinsic::{dissect, Threshold};
use delta_engine::scaling::{
    avg_overshoot_law_from_stats, bridging_check, dc_count_law_from_stats, segment_stats,
    volatility_proxy, SegmentStats,
};
use delta_engine::tick::{generate_gbm, GbmParams};

const SIGMA: f64 = 5e-5;
const HOUR: i64 = 3_600_000_000_000;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let series = generate_gbm(&GbmParams {
        s0: 100.0,
        mu: 0.0,
        sigma: SIGMA,
        dt: 1.0,
        n: 2_000_000,
        seed: 21,
    })?;
    let grid: Vec<Threshold> = [1e-3, 1.41e-3, 2e-3, 2.83e-3, 4e-3]
        .iter()
        .map(|&d| Threshold::new(d))
        .collect::<Result<_, _>>()?;

    let stats: Vec<SegmentStats> = grid
        .iter()
        .map(|&t| segment_stats(&series, t))
        .collect::<Result<_, _>>()?;
    println!(
        "{:>8} {:>8} {:>8} {:>12}",
        "delta", "DCs", "OSs", "mean w/d"
    );
    for s in &stats {
        println!(
            "{:>8} {:>8} {:>8} {:>12.3}",
            s.threshold.to_string(),
            s.dc_count,
            s.os_count,
            s.mean_overshoot().unwrap_or(0.0) / s.threshold.value()
        );
    }

    let counts = dc_count_law_from_stats(&stats)?;
    let overshoot = avg_overshoot_law_from_stats(&stats)?;
    println!(
        "\nN(delta)     = {:.4e} * delta^{:.3}  (r^2 {:.4})",
        counts.c, counts.alpha, counts.r_squared
    );
    println!(
        "<omega>(delta) = {:.4e} * delta^{:.3}  (r^2 {:.4})",
        overshoot.c, overshoot.alpha, overshoot.r_squared
    );
    println!("{}", serde_json::to_string(&counts)?);

    let end = series.last().timestamp;
    for &t in &grid[..2] {
        let est = volatility_proxy(
            &dissect(&series, t)?,
            t,
            end - series.first().timestamp,
            end,
        )?;
        println!(
            "\nvolatility proxy at {t}: {:.3e} per root second (true {SIGMA:e})",
            est.sigma_hat
        );
        let b = bridging_check(&series, t, HOUR)?;
        println!(
            "bridging at {t}: N*E[w^2] {:.4e}, hourly RV {:.4e}, ratio {:.3}",
            b.lhs,
            b.rhs,
            b.lhs / b.rhs
        );
    }
    Ok(())
}
