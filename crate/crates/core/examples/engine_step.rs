//! Driving the multi-scale engine tick by tick: per-agent signals, silencing
//! and the position machine.
//!
//! ```bash
//! cargo run --release -p delta-engine --example engine_step
//! ```

use delta_engine::engine::{AgentConfig, DeltaEngine, DeltaEngineConfig};
use delta_engine::intrinsic::Threshold;
use delta_engine::tick::{generate_gbm, GbmParams};
use delta_engine::trend::LookBack;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let look_backs = vec![LookBack::new(3)?, LookBack::new(5)?];
    let agents = [0.002, 0.004, 0.008]
        .iter()
        .map(|&d| {
            Ok(AgentConfig {
                threshold: Threshold::new(d)?,
                look_backs: look_backs.clone(),
                epsilon: 0.0,
                vol_window: 1_800_000_000_000,
                sync_band_kappa: 0.3,
            })
        })
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    let mut engine = DeltaEngine::new(DeltaEngineConfig {
        agents,
        unit_size: 1.0,
        cost_per_trade: 0.0,
    })?;

    let series = generate_gbm(&GbmParams {
        s0: 100.0,
        mu: 0.0,
        sigma: 5e-4,
        dt: 1.0,
        n: 200_000,
        seed: 8,
    })?;
    let mut silenced = vec![0usize; engine.agents().len()];
    for &tick in series.ticks() {
        let trade = engine.step(tick)?;
        for (i, info) in engine.last_step().iter().enumerate() {
            silenced[i] += info.silenced as usize;
        }
        if let Some(t) = trade {
            if engine.state().trades().len() <= 6 {
                let sig = engine
                    .last_signals()
                    .iter()
                    .filter(|s| s.contrarian)
                    .count();
                println!(
                    "t={:>6}s {:<5} {} @ {:.4} from delta {} ({sig} contrarian signals), exposure {:+}",
                    t.timestamp / 1_000_000_000,
                    t.direction.as_str(),
                    t.size,
                    t.price,
                    t.triggering_threshold,
                    engine.state().net_exposure()
                );
            }
        }
    }

    println!(
        "\n{} trades, mark-to-market PnL {:.4}",
        engine.state().trades().len(),
        engine.mark_to_market()
    );
    for (agent, s) in engine.agents().iter().zip(&silenced) {
        println!(
            "agent {}: {} events, silenced on {s} ticks, DC rate {:.4}/s observed vs {:.4}/s long run",
            agent.threshold(),
            agent.events().len(),
            agent.observed_dc_rate(),
            agent.expected_dc_rate()
        );
    }
    Ok(())
}
