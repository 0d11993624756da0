//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! ```bash
//! cargo test --release -p delta-engine --test acceptance
//! ```

mod common;

use std::path::Path;
use std::time::Instant;

use delta_engine::backtest::{emit_reports, run_backtest, run_backtest_on, DataSource, RunConfig};
use delta_engine::engine::{AgentConfig, DeltaEngine, DeltaEngineConfig, TradeDirection};
use delta_engine::intrinsic::dissect;
use delta_engine::scaling::{
    bridging_from_parts, dc_count_law_from_stats, fit_power_law, realized_variance, segment_stats,
    LogLogPoint, SegmentStats, BRIDGING_CALIBRATION,
};
use delta_engine::tick::{generate_gbm, GbmParams, NormalStream, TickSeries};
use delta_engine::trend::LookBack;

use common::{
    grid_random_walk, log_spaced, matches_reference, random_gbm, thresholds, uniform_int,
};

const HOUR: i64 = 3_600_000_000_000;

// Tolerances.
const ALPHA_TARGET: f64 = -2.0;
const ALPHA_TOL: f64 = 0.15;
const OVERSHOOT_RATIO_LO: f64 = 0.9;
const OVERSHOOT_RATIO_HI: f64 = 1.1;
const BRIDGING_TOL: f64 = 0.25;
const FIT_REL_TOL: f64 = 1e-9;

// Workloads.
const ORACLE_SERIES: usize = 1000;
const ORACLE_MAX_LEN: usize = 100_000;
const ORACLE_GRID: [f64; 4] = [0.001, 0.005, 0.01, 0.05];
const GBM_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const GBM_SIGMA: f64 = 0.002;
const GBM_TICKS: usize = 1_000_000;
const FUZZ_SEEDS: u64 = 20;
const FUZZ_KAPPAS: [f64; 4] = [1.0, 0.5, 0.2, 0.1];

struct Verdict {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: &'static str, name: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict {
        id,
        name,
        pass,
        detail,
    }
}

fn gbm(seed: u64, n: usize) -> TickSeries {
    generate_gbm(&GbmParams {
        s0: 100.0,
        mu: 0.0,
        sigma: GBM_SIGMA,
        dt: 1.0,
        n,
        seed,
    })
    .unwrap()
}

/// Criteria 1 and 2 share the randomized corpus.
fn oracle_and_monotonicity() -> (Verdict, Verdict) {
    let grid = thresholds(&ORACLE_GRID);
    let mut rng = NormalStream::new(0xACCE_0001);
    let mut mismatches = Vec::new();
    let mut non_monotone = Vec::new();
    let (mut total_ticks, mut total_events) = (0usize, 0usize);

    for i in 0..ORACLE_SERIES {
        let len = uniform_int(&mut rng, 2, ORACLE_MAX_LEN);
        let series = if i % 2 == 0 {
            grid_random_walk(&mut rng, len)
        } else {
            random_gbm(&mut rng, len)
        };
        total_ticks += series.len();
        let mut dc_counts = Vec::with_capacity(grid.len());
        for &t in &grid {
            let events = dissect(&series, t).unwrap();
            total_events += events.len();
            if let Err(e) = matches_reference(&series, t, &events) {
                mismatches.push(format!("series {i} delta {t}: {e}"));
            }
            dc_counts.push(events.iter().filter(|e| e.is_dc()).count());
        }
        if dc_counts.windows(2).any(|w| w[0] < w[1]) {
            non_monotone.push(format!("series {i}: {dc_counts:?}"));
        }
    }

    let c1 =
        verdict(
            "C1",
            "dissection matches reference",
            mismatches.is_empty(),
            format!(
            "{ORACLE_SERIES} series, {total_ticks} ticks, {total_events} events, {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
        );
    let c2 = verdict(
        "C2",
        "DC count non-increasing in delta",
        non_monotone.is_empty(),
        format!(
            "{ORACLE_SERIES} series x {:?}, {} violations{}",
            ORACLE_GRID,
            non_monotone.len(),
            non_monotone
                .first()
                .map(|m| format!(" (first: {m})"))
                .unwrap_or_default()
        ),
    );
    (c1, c2)
}

/// Criteria 3, 4 and 5 share the GBM paths.
fn gbm_statistics() -> (Verdict, Verdict, Verdict, Vec<String>) {
    let grid = log_spaced(5e-4, 5e-3, 6);
    let bridging_grid = thresholds(&[1e-3, 2e-3]);
    let mut alphas = Vec::new();
    let mut ratio_lo = f64::INFINITY;
    let mut ratio_hi = f64::NEG_INFINITY;
    let mut ratio_fails = 0;
    let mut worst_bridging: f64 = 0.0;
    let mut monotone_ok = true;
    let mut notes = Vec::new();

    for seed in GBM_SEEDS {
        let series = gbm(seed, GBM_TICKS);
        let stats: Vec<SegmentStats> = grid
            .iter()
            .map(|&t| segment_stats(&series, t).unwrap())
            .collect();
        monotone_ok &= stats.windows(2).all(|w| w[0].dc_count >= w[1].dc_count);

        let alpha = dc_count_law_from_stats(&stats)
            .map(|f| f.alpha)
            .unwrap_or(f64::NAN);
        alphas.push(alpha);

        let ratios: Vec<f64> = stats
            .iter()
            .map(|s| s.mean_overshoot().unwrap_or(f64::NAN) / s.threshold.value())
            .collect();
        for &r in &ratios {
            ratio_lo = ratio_lo.min(r);
            ratio_hi = ratio_hi.max(r);
            if !(OVERSHOOT_RATIO_LO..=OVERSHOOT_RATIO_HI).contains(&r) {
                ratio_fails += 1;
            }
        }

        let rv = realized_variance(&series, HOUR).unwrap();
        let mut errs = Vec::new();
        for &t in &bridging_grid {
            let s = segment_stats(&series, t).unwrap();
            let r = bridging_from_parts(&s, &rv, HOUR, BRIDGING_CALIBRATION);
            worst_bridging = worst_bridging.max(r.calibrated_relative_error);
            errs.push(format!("{:.3}", r.calibrated_relative_error));
        }
        notes.push(format!(
            "seed {seed}: alpha {alpha:.3}, mean(omega)/delta {:?}, bridging err {:?}",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>(),
            errs
        ));
    }

    let alpha_ok = alphas.iter().all(|a| (a - ALPHA_TARGET).abs() <= ALPHA_TOL);
    let c3 = verdict(
        "C3",
        "GBM DC-count exponent",
        alpha_ok,
        format!(
            "alpha per seed {:?}, required [{}, {}]",
            alphas.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>(),
            ALPHA_TARGET - ALPHA_TOL,
            ALPHA_TARGET + ALPHA_TOL
        ),
    );
    let c4 = verdict(
        "C4",
        "GBM mean overshoot / delta",
        ratio_fails == 0,
        format!(
            "ratios span [{ratio_lo:.3}, {ratio_hi:.3}], {ratio_fails}/{} outside [{OVERSHOOT_RATIO_LO}, {OVERSHOOT_RATIO_HI}]",
            GBM_SEEDS.len() * grid.len()
        ),
    );
    let c5 = verdict(
        "C5",
        "calibrated bridging identity",
        worst_bridging <= BRIDGING_TOL,
        format!("K = {BRIDGING_CALIBRATION}, worst calibrated error {worst_bridging:.4}, required <= {BRIDGING_TOL}"),
    );
    if !monotone_ok {
        notes.push("DC count not monotone on a GBM path".into());
    }
    (c3, c4, c5, notes)
}

fn power_law_recovery() -> Verdict {
    let mut rng = NormalStream::new(0xACCE_0006);
    let mut worst_c: f64 = 0.0;
    let mut worst_alpha: f64 = 0.0;
    for _ in 0..100 {
        let c = 10f64.powf(-3.0 + 6.0 * rng.next_uniform());
        let magnitude = 0.1 + 2.9 * rng.next_uniform();
        let alpha = if rng.next_uniform() < 0.5 {
            -magnitude
        } else {
            magnitude
        };
        let n = uniform_int(&mut rng, 2, 20);
        let mut xs: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(-4.0 + 8.0 * rng.next_uniform()))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 2 {
            xs = vec![0.5, 2.0];
        }
        let points: Vec<LogLogPoint> = xs
            .iter()
            .map(|&x| LogLogPoint::new(x, c * x.powf(alpha)))
            .collect();
        let fit = fit_power_law(&points).unwrap();
        worst_c = worst_c.max((fit.c - c).abs() / c);
        worst_alpha = worst_alpha.max((fit.alpha - alpha).abs() / alpha.abs());
    }
    verdict(
        "C6",
        "power-law fit recovery",
        worst_c <= FIT_REL_TOL && worst_alpha <= FIT_REL_TOL,
        format!("100 laws, worst relative error C {worst_c:.2e}, alpha {worst_alpha:.2e}, required <= {FIT_REL_TOL:e}"),
    )
}

fn engine_config(kappa: f64, cost: f64) -> DeltaEngineConfig {
    let look_backs: Vec<LookBack> = [3, 5, 8]
        .iter()
        .map(|&k| LookBack::new(k).unwrap())
        .collect();
    DeltaEngineConfig {
        agents: thresholds(&[0.001, 0.002, 0.004])
            .into_iter()
            .map(|threshold| AgentConfig {
                threshold,
                look_backs: look_backs.clone(),
                epsilon: 0.0,
                vol_window: HOUR,
                sync_band_kappa: kappa,
            })
            .collect(),
        unit_size: 1.0,
        cost_per_trade: cost,
    }
}

fn engine_fuzz() -> Verdict {
    let unit = 1.0;
    let mut violations = Vec::new();
    let (mut trades, mut silenced_ticks, mut signals) = (0usize, 0usize, 0usize);

    for seed in 0..FUZZ_SEEDS {
        let kappa = FUZZ_KAPPAS[seed as usize % FUZZ_KAPPAS.len()];
        let series = gbm(1000 + seed, GBM_TICKS);
        let mut engine = DeltaEngine::new(engine_config(kappa, 0.0)).unwrap();
        let mut last_dir: Option<TradeDirection> = None;
        let mut n_trades = 0usize;
        for &tick in series.ticks() {
            let trade = engine.step(tick).unwrap();
            for info in engine.last_step() {
                signals += info.signals;
                if info.silenced {
                    silenced_ticks += 1;
                    if info.signals > 0 {
                        violations.push(format!(
                            "seed {seed}: silenced agent {} signalled",
                            info.threshold
                        ));
                    }
                }
            }
            let exposure = engine.state().net_exposure();
            if !(exposure == 0.0 || exposure == unit || exposure == -unit) {
                violations.push(format!("seed {seed}: exposure {exposure}"));
            }
            if let Some(t) = trade {
                let want = if n_trades == 0 { unit } else { 2.0 * unit };
                if t.size != want {
                    violations.push(format!("seed {seed}: trade {n_trades} size {}", t.size));
                }
                if last_dir == Some(t.direction) {
                    violations.push(format!(
                        "seed {seed}: trade {n_trades} repeats {:?}",
                        t.direction
                    ));
                }
                last_dir = Some(t.direction);
                n_trades += 1;
            }
            if violations.len() > 10 {
                break;
            }
        }
        trades += n_trades;
    }

    // The invariants must actually be exercised.
    let exercised = trades > 0 && silenced_ticks > 0;
    verdict(
        "C7",
        "engine invariants under fuzzing",
        violations.is_empty() && exercised,
        format!(
            "{FUZZ_SEEDS} runs x {GBM_TICKS} ticks, {trades} trades, {signals} signals, {silenced_ticks} silenced agent-ticks, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

fn pnl_decoupling() -> Verdict {
    let series = gbm(77, 200_000);
    let config = |cost: f64| {
        let mut c = RunConfig::new(
            DataSource::Gbm(GbmParams {
                s0: 100.0,
                mu: 0.0,
                sigma: GBM_SIGMA,
                dt: 1.0,
                n: 200_000,
                seed: 77,
            }),
            thresholds(&[0.001, 0.002, 0.004]),
            "unused".into(),
        );
        c.cost_per_trade = cost;
        c
    };
    let free = run_backtest_on(&config(0.0), &series).unwrap();
    let costly = run_backtest_on(&config(0.5), &series).unwrap();
    let strip = |r: &delta_engine::BacktestReport| {
        r.trades
            .iter()
            .map(|t| {
                (
                    t.timestamp,
                    t.direction,
                    t.size.to_bits(),
                    t.price.to_bits(),
                    t.triggering_threshold,
                )
            })
            .collect::<Vec<_>>()
    };
    let same = strip(&free) == strip(&costly);
    let costs_ok =
        free.trades.iter().all(|t| t.cost == 0.0) && costly.trades.iter().all(|t| t.cost == 0.5);
    verdict(
        "C8",
        "trade log independent of cost",
        same && costs_ok && !free.trades.is_empty(),
        format!(
            "{} vs {} trades, identical modulo cost: {same}, pnl {:.4} vs {:.4}",
            free.trades.len(),
            costly.trades.len(),
            free.final_pnl,
            costly.final_pnl
        ),
    )
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = RunConfig::new(
        DataSource::Gbm(GbmParams {
            s0: 100.0,
            mu: 0.0,
            sigma: GBM_SIGMA,
            dt: 1.0,
            n: 200_000,
            seed: 9,
        }),
        thresholds(&[0.001, 0.002, 0.004]),
        tmp.path().join("out"),
    );
    config.cost_per_trade = 0.01;
    let mut runs = Vec::new();
    for _ in 0..2 {
        // Same config, same directory: the second run overwrites the first.
        let report = run_backtest(&config).unwrap();
        emit_reports(&report, &config.output_dir).unwrap();
        runs.push(read_dir_sorted(&config.output_dir));
    }
    let bytes: usize = runs[0].iter().map(|(_, b)| b.len()).sum();
    verdict(
        "C9",
        "byte-identical reruns",
        runs[0] == runs[1] && !runs[0].is_empty(),
        format!(
            "{} files, {bytes} bytes per run, identical: {}",
            runs[0].len(),
            runs[0] == runs[1]
        ),
    )
}

fn main() {
    let started = Instant::now();
    let mut verdicts = Vec::new();
    let mut notes = Vec::new();

    let t = Instant::now();
    let (c1, c2) = oracle_and_monotonicity();
    notes.push(format!("C1/C2 took {:.1}s", t.elapsed().as_secs_f64()));
    verdicts.extend([c1, c2]);

    let t = Instant::now();
    let (c3, c4, c5, gbm_notes) = gbm_statistics();
    notes.extend(gbm_notes);
    notes.push(format!("C3-C5 took {:.1}s", t.elapsed().as_secs_f64()));
    verdicts.extend([c3, c4, c5]);

    verdicts.push(power_law_recovery());

    let t = Instant::now();
    verdicts.push(engine_fuzz());
    notes.push(format!("C7 took {:.1}s", t.elapsed().as_secs_f64()));

    verdicts.push(pnl_decoupling());
    verdicts.push(determinism());

    for n in &notes {
        println!("  note: {n}");
    }
    for v in &verdicts {
        println!(
            "{} {} {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.name,
            v.detail
        );
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        verdicts.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
