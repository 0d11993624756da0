//! Full backtest on a synthetic GBM path, with all report files written to a
//! directory.
//!
//! ```bash
//! cargo run --release -p delta-engine --example delta_engine_backtest [output_dir]
//! ```

use std::path::PathBuf;

use delta_engine::backtest::{emit_reports, load_config, run_backtest};

const CONFIG: &str = "\
# one million seconds of GBM, 0.2% per root second
gbm_s0 = 100
gbm_mu = 0
gbm_sigma = 0.002
gbm_dt = 1
gbm_n = 1000000
gbm_seed = 42

thresholds = 0.001,0.002,0.004
look_backs = 3,5,8
epsilon = 0
unit_size = 1
vol_window_ns = 3600000000000
sync_band_kappa = 1
cost_per_trade = 0
sampling_interval_ns = 3600000000000
output_dir = target/delta-engine-example
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = load_config(CONFIG)?;
    if let Some(dir) = std::env::args().nth(1) {
        config.output_dir = PathBuf::from(dir);
    }

    let report = run_backtest(&config)?;
    println!("{} ticks of {}", report.n_ticks, report.instrument);
    println!(
        "{:>8} {:>8} {:>8} {:>10} {:>9} {:>11} {:>9}",
        "delta", "DCs", "OSs", "signals", "contra", "silenced", "lines"
    );
    for a in &report.agents {
        println!(
            "{:>8} {:>8} {:>8} {:>10} {:>9} {:>11} {:>9}",
            a.threshold.to_string(),
            a.dc_count,
            a.os_count,
            a.signals,
            a.contrarian_signals,
            a.silenced_ticks,
            a.final_lines.len()
        );
    }
    println!("trades: {}", report.trades.len());
    for t in report.trades.iter().take(5) {
        println!(
            "  {:>16} {:<5} {:>3} @ {:.5} (delta {})",
            t.timestamp,
            t.direction.as_str(),
            t.size,
            t.price,
            t.triggering_threshold
        );
    }
    println!("final mark-to-market PnL: {:.4}", report.final_pnl);
    if let Some(fit) = report.study.scaling_fits.dc_count_law.ok() {
        println!(
            "DC-count law: alpha {:.3}, C {:.4e}, r^2 {:.4}",
            fit.alpha, fit.c, fit.r_squared
        );
    }

    for path in emit_reports(&report, &config.output_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
