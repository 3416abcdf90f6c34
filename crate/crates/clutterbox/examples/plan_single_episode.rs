//! One full search episode: observe, segment, complete, remember, compute
//! shadows, sample actions, execute — until the target ball is picked.
//!
//! ```bash
//! cargo run --release --example plan_single_episode
//! ```

use clutterbox::completion::CompleterKind;
use clutterbox::harness::{replay_trace, scenario, scenario_file};
use clutterbox::planner::{run_episode, PlannerConfig};
use clutterbox::scene::scene_to_toml;

fn main() -> anyhow::Result<()> {
    let scene = scenario("scene_b")?;
    let mut config = PlannerConfig::default();
    config.n_samples = 64;
    config.completion = CompleterKind::PrismHull;
    config.memory = true;

    let mut trace = run_episode(&scene, &config, 2024);
    println!("scene_b, seed 2024 -> {:?} in {} moves", trace.status, trace.moves);
    for step in &trace.steps {
        let reward = step
            .reward
            .map(|r| format!("reward {:+.2} (info {:.0}, collisions {:.0})", r.total, r.info, r.collision))
            .unwrap_or_else(|| "terminal target pick".into());
        println!(
            "  {}. {:?} on {:12} {}",
            step.step + 1,
            step.action.kind,
            step.exec_object,
            reward
        );
    }

    // Traces are self-contained: embed the scene, round-trip through
    // JSON, re-execute, compare bit for bit.
    trace.scene_toml = Some(scene_to_toml(&scenario_file("scene_b")?));
    let diffs = replay_trace(&trace)?;
    println!(
        "replay: {}",
        if diffs.is_empty() { "reproduced bit-for-bit".into() } else { format!("{diffs:?}") }
    );
    Ok(())
}
