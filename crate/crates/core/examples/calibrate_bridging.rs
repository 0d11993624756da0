//! Reproduces the calibration behind `scaling::BRIDGING_CALIBRATION`.
//!
//! For each seed a one-million-second GBM path (sigma 0.002 per root second,
//! one tick per second) is dissected at 1e-3 and 2e-3, and the ratio
//! `N_DC * mean(omega^2) / RV` is computed against hourly realized variance.
//! The calibration constant is the mean ratio. A second block repeats the
//! measurement on a finely sampled path, where the ratio approaches 2.
//!
//! ```bash
//! cargo run --release -p delta-engine --example calibrate_bridging
//! ```

use delta_engine::scaling::{bridging_check_calibrated, BRIDGING_CALIBRATION};
use delta_engine::tick::{generate_gbm, GbmParams};
use delta_engine::Threshold;

const HOUR: i64 = 3_600_000_000_000;

fn ratios(sigma: f64, n: usize, seeds: std::ops::RangeInclusive<u64>, deltas: &[f64]) -> Vec<f64> {
    let mut all = Vec::new();
    for seed in seeds {
        let series = generate_gbm(&GbmParams {
            s0: 100.0,
            mu: 0.0,
            sigma,
            dt: 1.0,
            n,
            seed,
        })
        .unwrap();
        let mut line = format!("seed {seed:>5}");
        for &d in deltas {
            let r =
                bridging_check_calibrated(&series, Threshold::new(d).unwrap(), HOUR, 1.0).unwrap();
            let ratio = r.lhs / r.rhs;
            line.push_str(&format!(
                "  delta {d}: N_DC {:>7} ratio {ratio:.4}",
                r.dc_count
            ));
            all.push(ratio);
        }
        println!("{line}");
    }
    all
}

fn summarize(label: &str, xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
    println!("{label}: mean ratio {mean:.4}, sd {sd:.4}, n {}", xs.len());
    mean
}

fn main() {
    println!("coarse sampling: sigma 0.002/sqrt(s), dt 1 s, n 1e6");
    let coarse = ratios(0.002, 1_000_000, 1001..=1020, &[1e-3, 2e-3]);
    let k = summarize("coarse", &coarse);
    println!("frozen BRIDGING_CALIBRATION = {BRIDGING_CALIBRATION}, measured {k:.4}");

    println!("\nfine sampling: sigma 2e-5/sqrt(s), dt 1 s, n 4e6");
    let fine = ratios(2e-5, 4_000_000, 2001..=2005, &[1e-3, 2e-3]);
    summarize("fine", &fine);
}
