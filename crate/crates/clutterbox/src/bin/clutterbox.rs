//! Thin command-line front end; all functionality lives in the library.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use clutterbox::completion::{
    evaluate_completer, load_dataset, save_dataset, synthesize_dataset, voxelize_primitive,
    CameraExtrudeCompleter, Completer, ExternalCompleter, NullCompleter, PrismHullCompleter,
    PrimitiveSpec, SynthConfig,
};
use clutterbox::harness::{
    replay_trace, run_experiment, scenario_file, scenario_names, write_outputs, ExperimentSpec,
};
use clutterbox::planner::EpisodeTrace;
use clutterbox::scene::scene_to_toml;

#[derive(Parser)]
#[command(name = "clutterbox", about = "Tabletop object-search simulator and experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment matrix and write CSV results.
    Run {
        /// Experiment description (TOML).
        experiment: PathBuf,
        /// Override the experiment file's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize an occluded shape-completion dataset.
    Synth {
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
        /// Shapes to include: box, cylinder, sphere, prism.
        #[arg(long, value_delimiter = ',', default_values_t = vec!["box".to_string(), "cylinder".to_string()])]
        shapes: Vec<String>,
        /// Rotations sampled per shape.
        #[arg(long, default_value_t = 120)]
        rotations: usize,
        /// Reconstruction grid side length in voxels.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Voxel edge in meters.
        #[arg(long, default_value_t = 0.004)]
        resolution: f64,
        /// Fraction of the view blocked by the obstacle mask.
        #[arg(long, default_value_t = 0.25)]
        occlusion_fraction: f64,
        /// Voxels the normalized triple is shifted toward the camera.
        #[arg(long, default_value_t = 4)]
        offset: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Benchmark a completer over a dataset; writes per-example CSV.
    Eval {
        /// Dataset directory produced by `synth`.
        #[arg(long)]
        dataset: PathBuf,
        /// null | prism_hull | camera_extrude | external:<dir>
        #[arg(long)]
        completer: String,
        /// Output CSV path.
        #[arg(long)]
        csv: PathBuf,
    },
    /// Re-execute a recorded episode trace and report any divergence.
    Replay {
        trace: PathBuf,
    },
    /// Inspect the built-in scenario library.
    Scenes {
        #[command(subcommand)]
        command: ScenesCommand,
    },
}

#[derive(Subcommand)]
enum ScenesCommand {
    /// List scenario names.
    List,
    /// Print (or write) a scenario as a scene file.
    Emit {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { experiment, out } => {
            let spec = ExperimentSpec::from_file(&experiment)?;
            let result = run_experiment(&spec)?;
            for cell in &result.cells {
                println!(
                    "{}/{}: mean {:.3} moves (stderr {:.3}), success {:.3}, ejected {}, move-limit {}",
                    cell.scene,
                    cell.config,
                    cell.mean_moves,
                    cell.stderr_moves,
                    cell.success_ratio,
                    cell.ejected,
                    cell.move_limit
                );
            }
            for s in &result.significance {
                println!(
                    "{} | {} vs {}: t = {:.3}, p(one-sided, {} fewer moves) = {:.4}",
                    s.scope, s.config_a, s.config_b, s.t, s.config_b, s.p_one_sided
                );
            }
            let dir = out
                .or(spec.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("results"));
            write_outputs(&result, &dir, spec.save_traces)?;
            println!("wrote {}", dir.display());
        }
        Command::Synth {
            out,
            shapes,
            rotations,
            grid,
            resolution,
            occlusion_fraction,
            offset,
            seed,
        } => {
            let mut lib = Vec::new();
            for name in &shapes {
                let spec = match name.as_str() {
                    "box" => PrimitiveSpec::Box { size: [0.10, 0.07, 0.12] },
                    "cylinder" => PrimitiveSpec::Cylinder { radius: 0.045, height: 0.12 },
                    "sphere" => PrimitiveSpec::Sphere { radius: 0.05 },
                    "prism" => PrimitiveSpec::Prism { sides: 6, radius: 0.05, height: 0.1 },
                    other => bail!("unknown shape `{other}`"),
                };
                lib.push((name.clone(), voxelize_primitive(&spec, resolution)?));
            }
            let cfg = SynthConfig {
                grid_n: grid,
                resolution,
                rotations,
                occluder_fraction: occlusion_fraction,
                shift_offset: offset,
                camera_distance_factor: 2.0,
                seed,
            };
            let dataset = synthesize_dataset(&lib, &cfg);
            save_dataset(&dataset, &out)?;
            println!("wrote {} triples to {}", dataset.len(), out.display());
        }
        Command::Eval { dataset, completer, csv } => {
            let triples = load_dataset(&dataset)?;
            if triples.is_empty() {
                bail!("dataset is empty");
            }
            let camera = triples[0].camera;
            let boxed: Box<dyn Completer> = match completer.as_str() {
                "null" => Box::new(NullCompleter),
                "prism_hull" => Box::new(PrismHullCompleter),
                "camera_extrude" => Box::new(CameraExtrudeCompleter::new(camera, 16)),
                other => match other.strip_prefix("external:") {
                    Some(dir) => Box::new(ExternalCompleter::new(dir)),
                    None => bail!("unknown completer `{other}`"),
                },
            };
            let stats = evaluate_completer(boxed.as_ref(), &triples);
            let mut w = csv::Writer::from_path(&csv)
                .with_context(|| format!("writing {}", csv.display()))?;
            w.write_record(["example_id", "shape", "chamfer"])?;
            for row in &stats.rows {
                w.write_record([
                    row.example_id.to_string(),
                    row.shape.clone(),
                    row.chamfer.map(|c| c.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
            println!(
                "{}: mean chamfer {:.6e} (stderr {:.2e}) over {} examples, {} failed -> {}",
                stats.completer,
                stats.mean,
                stats.stderr,
                stats.rows.len(),
                stats.failed,
                csv.display()
            );
        }
        Command::Replay { trace } => {
            let text = std::fs::read_to_string(&trace)
                .with_context(|| format!("reading {}", trace.display()))?;
            let recorded = EpisodeTrace::from_json(&text)?;
            let diffs = replay_trace(&recorded)?;
            if diffs.is_empty() {
                println!(
                    "replay of {} ({} moves, {:?}) reproduced bit-for-bit",
                    trace.display(),
                    recorded.moves,
                    recorded.status
                );
            } else {
                for d in &diffs {
                    eprintln!("divergence: {d}");
                }
                bail!("{} divergences", diffs.len());
            }
        }
        Command::Scenes { command } => match command {
            ScenesCommand::List => {
                for name in scenario_names() {
                    println!("{name}");
                }
            }
            ScenesCommand::Emit { name, out } => {
                let file = scenario_file(&name)?;
                let text = scene_to_toml(&file);
                match out {
                    Some(path) => {
                        std::fs::write(&path, text)?;
                        println!("wrote {}", path.display());
                    }
                    None => print!("{text}"),
                }
            }
        },
    }
    Ok(())
}
