//! Test-only helpers: a reference dissector and random series generators.
#![allow(dead_code)]

use delta_engine::intrinsic::{EventKind, IntrinsicEvent, Threshold};
use delta_engine::tick::{generate_gbm, GbmParams, NormalStream, Tick, TickSeries};

/// `(is_dc, is_up, tick_index)` in emission order.
pub type RefEvent = (bool, bool, usize);

/// Reference dissection, structured differently from the streaming state
/// machine: locate the mode-setting tick by scanning prefix extremes, then
/// walk segment by segment, first finding the reversal that closes the
/// segment and only then replaying the segment for overshoot crossings.
pub fn reference_dissect(prices: &[f64], delta: f64) -> Vec<RefEvent> {
    let up = 1.0 + delta;
    let down = 1.0 - delta;
    let n = prices.len();

    // Mode-setting tick.
    let mut start = None;
    let (mut lo, mut hi) = (prices[0], prices[0]);
    for (i, &p) in prices.iter().enumerate() {
        lo = lo.min(p);
        hi = hi.max(p);
        if p >= lo * up {
            start = Some((i, true));
            break;
        }
        if p <= hi * down {
            start = Some((i, false));
            break;
        }
    }
    let Some((mut seg_start, mut going_up)) = start else {
        return Vec::new();
    };

    let mut out = Vec::new();
    let mut after_dc = false;
    loop {
        // Pass 1: the tick that reverses this segment, if any.
        let mut extreme = prices[seg_start];
        let mut reversal = None;
        for (j, &p) in prices.iter().enumerate().skip(seg_start + 1) {
            let reverses = if going_up {
                p <= extreme * down
            } else {
                p >= extreme * up
            };
            if reverses {
                reversal = Some(j);
                break;
            }
            extreme = if going_up {
                extreme.max(p)
            } else {
                extreme.min(p)
            };
        }
        let seg_end = reversal.unwrap_or(n);

        // Pass 2: overshoot crossings inside the segment.
        if after_dc {
            let mut level = prices[seg_start];
            for (j, &p) in prices.iter().enumerate().take(seg_end).skip(seg_start + 1) {
                loop {
                    let crossed = if going_up {
                        p >= level * up
                    } else {
                        p <= level * down
                    };
                    if !crossed {
                        break;
                    }
                    level *= if going_up { up } else { down };
                    out.push((false, going_up, j));
                }
            }
        }

        match reversal {
            Some(r) => {
                going_up = !going_up;
                out.push((true, going_up, r));
                seg_start = r;
                after_dc = true;
            }
            None => break,
        }
    }
    out
}

/// Compares a dissection against the reference, field by field.
pub fn matches_reference(
    series: &TickSeries,
    threshold: Threshold,
    events: &[IntrinsicEvent],
) -> Result<(), String> {
    let prices: Vec<f64> = series.prices().collect();
    let expected = reference_dissect(&prices, threshold.value());
    if expected.len() != events.len() {
        return Err(format!(
            "event count differs: reference {} vs implementation {}",
            expected.len(),
            events.len()
        ));
    }
    let ticks = series.ticks();
    for (ordinal, (&(is_dc, is_up, idx), e)) in expected.iter().zip(events).enumerate() {
        let kind = if is_dc {
            EventKind::DirectionalChange
        } else {
            EventKind::Overshoot
        };
        let ok = e.kind == kind
            && (e.direction == delta_engine::intrinsic::Direction::Up) == is_up
            && e.price == ticks[idx].price
            && e.timestamp == ticks[idx].timestamp
            && e.ordinal == ordinal as u64
            && e.threshold == threshold;
        if !ok {
            return Err(format!(
                "event {ordinal} differs: reference ({kind:?}, up={is_up}, tick {idx}) vs {e:?}"
            ));
        }
    }
    Ok(())
}

/// Uniform integer in `[lo, hi]`.
pub fn uniform_int(rng: &mut NormalStream, lo: usize, hi: usize) -> usize {
    lo + ((rng.next_uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
}

/// Price-grid random walk: 0.01 ticks, steps of -3..=3 ticks with occasional
/// jumps, floored at 1.0. Grid prices make exact boundary ties common.
pub fn grid_random_walk(rng: &mut NormalStream, len: usize) -> TickSeries {
    let mut k: i64 = 10_000;
    let mut ticks = Vec::with_capacity(len);
    let mut t = 0i64;
    for _ in 0..len {
        ticks.push(Tick::new(t, k as f64 * 0.01));
        let u = rng.next_uniform();
        let step = if u < 0.01 {
            (rng.next_normal() * 300.0) as i64
        } else {
            uniform_int(rng, 0, 6) as i64 - 3
        };
        k = (k + step).max(100);
        // Bursts of equal timestamps now and then.
        if rng.next_uniform() > 0.1 {
            t += 1 + uniform_int(rng, 0, 1_000_000_000) as i64;
        }
    }
    TickSeries::new("RW", ticks).expect("valid walk")
}

pub fn random_gbm(rng: &mut NormalStream, len: usize) -> TickSeries {
    let sigma = 1e-4 * 100f64.powf(rng.next_uniform());
    let seed = (rng.next_uniform() * 1e15) as u64;
    generate_gbm(&GbmParams {
        s0: 100.0,
        mu: 0.0,
        sigma,
        dt: 1.0,
        n: len.max(2) - 1,
        seed,
    })
    .expect("valid gbm")
}

pub fn thresholds(values: &[f64]) -> Vec<Threshold> {
    values.iter().map(|&d| Threshold::new(d).unwrap()).collect()
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<Threshold> {
    (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            Threshold::new(lo * (hi / lo).powf(f)).unwrap()
        })
        .collect()
}
