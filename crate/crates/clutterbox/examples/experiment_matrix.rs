//! A small experiment matrix: baseline vs fully-augmented planner on one
//! scene, with per-cell statistics and a one-sided significance test.
//!
//! ```bash
//! cargo run --release --example experiment_matrix
//! ```

use clutterbox::completion::CompleterKind;
use clutterbox::harness::{
    run_experiment, write_outputs, ConfigCell, ExperimentFile, ExperimentSpec,
};
use clutterbox::planner::PlannerConfig;

fn main() -> anyhow::Result<()> {
    let mut planner = PlannerConfig::default();
    planner.n_samples = 48;
    let file = ExperimentFile {
        master_seed: 17,
        trials: 10,
        scenes: vec!["scene_b".into()],
        output_dir: None,
        save_traces: false,
        planner,
        configs: vec![
            ConfigCell { name: "baseline".into(), completion: CompleterKind::Off, memory: false, memory_alpha: None },
            ConfigCell {
                name: "augmented".into(),
                completion: CompleterKind::PrismHull,
                memory: true,
                memory_alpha: None,
            },
        ],
    };
    let spec = ExperimentSpec::from_spec_file(&file, None)?;
    let result = run_experiment(&spec)?;

    for cell in &result.cells {
        println!(
            "{:10} mean {:.2} moves (stderr {:.2}), success ratio {:.2}",
            cell.config, cell.mean_moves, cell.stderr_moves, cell.success_ratio
        );
    }
    for s in &result.significance {
        if s.config_a == "baseline" {
            println!(
                "one-sided Welch test ({} fewer moves than {}): t = {:.2}, df = {:.1}, p = {:.4}",
                s.config_b, s.config_a, s.t, s.df, s.p_one_sided
            );
        }
    }

    let dir = std::env::temp_dir().join("clutterbox_matrix_demo");
    write_outputs(&result, &dir, false)?;
    println!("CSV output (trials/summary/significance/timing) in {}", dir.display());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
