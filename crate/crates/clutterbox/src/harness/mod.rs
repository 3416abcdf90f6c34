//! Experiment runner: seeded trial matrices over scenes and feature-flag
//! configurations, with CSV output, a significance report, a per-stage
//! timing report, and trace replay.

mod scenarios;
mod stats;

pub use scenarios::{scenario, scenario_file, scenario_names, TARGET_COLOR};
pub use stats::{incomplete_beta, mean_std, stderr, student_t_sf, welch_t_test, WelchTest};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::completion::CompleterKind;
use crate::error::{Error, Result};
use crate::planner::{run_episode, EpisodeTrace, PlannerConfig, StageTimings, TerminalStatus};
use crate::rng::trial_seed;
use crate::scene::{build_scene, parse_scene, scene_to_toml, Scene};

/// Environment variable selecting the trial worker-pool size.
pub const WORKERS_ENV: &str = "CLUTTERBOX_WORKERS";

/// On-disk experiment description (TOML, unknown fields rejected).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub master_seed: u64,
    pub trials: usize,
    /// Library scenario names or paths to scene files.
    pub scenes: Vec<String>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub save_traces: bool,
    /// Base planner settings shared by every cell.
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(rename = "config")]
    pub configs: Vec<ConfigCell>,
}

/// One named feature-flag bundle. `memory_alpha` optionally overrides the
/// base planner's decay rate, so a single experiment can sweep it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigCell {
    pub name: String,
    pub completion: CompleterKind,
    pub memory: bool,
    #[serde(default)]
    pub memory_alpha: Option<f64>,
}

/// A resolved experiment: scenes loaded, configs validated.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenes: Vec<(String, Scene, String)>,
    pub configs: Vec<ConfigCell>,
    pub trials: usize,
    pub master_seed: u64,
    pub base_planner: PlannerConfig,
    pub output_dir: Option<PathBuf>,
    pub save_traces: bool,
}

impl ExperimentSpec {
    pub fn from_file(path: &Path) -> Result<ExperimentSpec> {
        let text = std::fs::read_to_string(path)?;
        let file: ExperimentFile = toml::from_str(&text).map_err(|e| Error::Parse {
            file: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_spec_file(&file, path.parent())
    }

    pub fn from_spec_file(file: &ExperimentFile, base_dir: Option<&Path>) -> Result<ExperimentSpec> {
        if file.trials == 0 {
            return Err(Error::Parse {
                file: "experiment".into(),
                message: "trials must be >= 1".into(),
            });
        }
        let mut names = std::collections::HashSet::new();
        for c in &file.configs {
            if !names.insert(c.name.as_str()) {
                return Err(Error::Parse {
                    file: "experiment".into(),
                    message: format!("duplicate config name `{}`", c.name),
                });
            }
        }
        if file.configs.is_empty() {
            return Err(Error::Parse {
                file: "experiment".into(),
                message: "at least one [[config]] is required".into(),
            });
        }
        let mut scenes = Vec::new();
        for entry in &file.scenes {
            if let Ok(scene_file) = scenario_file(entry) {
                let toml_text = scene_to_toml(&scene_file);
                scenes.push((entry.clone(), build_scene(&scene_file, entry)?, toml_text));
            } else {
                let path = match base_dir {
                    Some(dir) if !Path::new(entry).is_absolute() => dir.join(entry),
                    _ => PathBuf::from(entry),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse {
                    file: path.display().to_string(),
                    message: format!("not a library scenario and not readable: {e}"),
                })?;
                let scene = parse_scene(&text, &path.display().to_string())?;
                scenes.push((scene.name.clone(), scene, text));
            }
        }
        Ok(ExperimentSpec {
            scenes,
            configs: file.configs.clone(),
            trials: file.trials,
            master_seed: file.master_seed,
            base_planner: file.planner.clone(),
            output_dir: file.output_dir.clone(),
            save_traces: file.save_traces,
        })
    }

    pub fn planner_for(&self, cell: &ConfigCell) -> PlannerConfig {
        let mut cfg = self.base_planner.clone();
        cfg.completion = cell.completion.clone();
        cfg.memory = cell.memory;
        if let Some(alpha) = cell.memory_alpha {
            cfg.memory_alpha = alpha;
        }
        cfg
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRow {
    pub scene: String,
    pub config: String,
    pub trial: usize,
    pub seed: u64,
    pub moves: usize,
    pub status: &'static str,
    pub starved: bool,
    /// Set when the episode panicked; the trial is excluded from means.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CellSummary {
    pub scene: String,
    pub config: String,
    pub trials: usize,
    pub failed_trials: usize,
    pub mean_moves: f64,
    pub stderr_moves: f64,
    pub success_ratio: f64,
    pub ejected: usize,
    pub move_limit: usize,
}

#[derive(Debug, Clone)]
pub struct SignificanceRow {
    /// Scene name, or "pooled" for the all-scene aggregate.
    pub scope: String,
    pub config_a: String,
    pub config_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub df: f64,
    /// One-sided: evidence that config_b needs fewer moves than config_a.
    pub p_one_sided: f64,
}

#[derive(Debug, Clone)]
pub struct TimingRow {
    pub scene: String,
    pub config: String,
    pub stage: &'static str,
    pub mean_seconds: f64,
}

/// Everything an experiment run produces.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<TrialRow>,
    pub cells: Vec<CellSummary>,
    pub significance: Vec<SignificanceRow>,
    pub timing: Vec<TimingRow>,
    pub traces: Vec<EpisodeTrace>,
}

fn status_str(s: TerminalStatus) -> &'static str {
    match s {
        TerminalStatus::Success => "success",
        TerminalStatus::Ejected => "ejected",
        TerminalStatus::MoveLimit => "move_limit",
    }
}

/// Run the full (scene x config x trial) matrix on a worker pool sized by
/// `CLUTTERBOX_WORKERS` (default: rayon's). Trial seeds are derived by a
/// stable hash of (master seed, scene, config, trial), so adding a
/// configuration never perturbs other cells. Output rows are sorted, and
/// a re-run of the same spec is byte-identical.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut jobs = Vec::new();
    for (scene_name, scene, scene_toml) in &spec.scenes {
        for cell in &spec.configs {
            let planner = spec.planner_for(cell);
            for trial in 0..spec.trials {
                let seed = trial_seed(spec.master_seed, scene_name, &cell.name, trial as u64);
                jobs.push((scene_name.clone(), scene, scene_toml, cell.name.clone(), planner.clone(), trial, seed));
            }
        }
    }

    let run_all = || -> Vec<(TrialRow, Option<EpisodeTrace>)> {
        jobs.par_iter()
            .map(|(scene_name, scene, scene_toml, config_name, planner, trial, seed)| {
                let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                    run_episode(scene, planner, *seed)
                }));
                match outcome {
                    Ok(mut trace) => {
                        trace.scene_toml = Some((*scene_toml).clone());
                        let row = TrialRow {
                            scene: scene_name.clone(),
                            config: config_name.clone(),
                            trial: *trial,
                            seed: *seed,
                            moves: trace.moves,
                            status: status_str(trace.status),
                            starved: trace.starved,
                            error: None,
                        };
                        (row, Some(trace))
                    }
                    Err(panic) => {
                        let message = panic
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_else(|| "episode panicked".into());
                        let row = TrialRow {
                            scene: scene_name.clone(),
                            config: config_name.clone(),
                            trial: *trial,
                            seed: *seed,
                            moves: 0,
                            status: "error",
                            starved: false,
                            error: Some(message),
                        };
                        (row, None)
                    }
                }
            })
            .collect()
    };

    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let mut results: Vec<(TrialRow, Option<EpisodeTrace>)> = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Parse { file: "worker pool".into(), message: e.to_string() })?;
        pool.install(run_all)
    } else {
        run_all()
    };

    results.sort_by(|(a, _), (b, _)| {
        (&a.scene, &a.config, a.trial).cmp(&(&b.scene, &b.config, b.trial))
    });
    let rows: Vec<TrialRow> = results.iter().map(|(r, _)| r.clone()).collect();
    let traces: Vec<EpisodeTrace> = results.into_iter().filter_map(|(_, t)| t).collect();

    let cells = summarize(&rows);
    let significance = significance_report(spec, &rows);
    let timing = timing_report(&rows, &traces);
    Ok(ResultTable { rows, cells, significance, timing, traces })
}

/// Per-cell move counts of clean (non-error) trials.
fn cell_moves(rows: &[TrialRow], scene: Option<&str>, config: &str) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.error.is_none() && r.config == config && scene.is_none_or(|s| r.scene == s))
        .map(|r| r.moves as f64)
        .collect()
}

fn summarize(rows: &[TrialRow]) -> Vec<CellSummary> {
    let mut keys: Vec<(String, String)> = rows
        .iter()
        .map(|r| (r.scene.clone(), r.config.clone()))
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(scene, config)| {
            let in_cell: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| r.scene == scene && r.config == config)
                .collect();
            let clean: Vec<&TrialRow> = in_cell.iter().copied().filter(|r| r.error.is_none()).collect();
            let moves: Vec<f64> = clean.iter().map(|r| r.moves as f64).collect();
            let (mean, _) = mean_std(&moves);
            let successes = clean.iter().filter(|r| r.status == "success").count();
            CellSummary {
                scene,
                config,
                trials: in_cell.len(),
                failed_trials: in_cell.len() - clean.len(),
                mean_moves: mean,
                stderr_moves: stderr(&moves),
                success_ratio: successes as f64 / in_cell.len().max(1) as f64,
                ejected: clean.iter().filter(|r| r.status == "ejected").count(),
                move_limit: clean.iter().filter(|r| r.status == "move_limit").count(),
            }
        })
        .collect()
}

/// One-sided Welch tests between every ordered config pair, per scene and
/// pooled over all scenes. Orientation: does config_b beat config_a
/// (fewer moves)?
fn significance_report(spec: &ExperimentSpec, rows: &[TrialRow]) -> Vec<SignificanceRow> {
    let mut out = Vec::new();
    let mut scopes: Vec<Option<String>> =
        spec.scenes.iter().map(|(name, _, _)| Some(name.clone())).collect();
    if spec.scenes.len() > 1 {
        scopes.push(None);
    }
    for scope in scopes {
        for a in &spec.configs {
            for b in &spec.configs {
                if a.name == b.name {
                    continue;
                }
                let moves_a = cell_moves(rows, scope.as_deref(), &a.name);
                let moves_b = cell_moves(rows, scope.as_deref(), &b.name);
                if moves_a.is_empty() || moves_b.is_empty() {
                    continue;
                }
                let test = welch_t_test(&moves_a, &moves_b);
                out.push(SignificanceRow {
                    scope: scope.clone().unwrap_or_else(|| "pooled".into()),
                    config_a: a.name.clone(),
                    config_b: b.name.clone(),
                    n_a: moves_a.len(),
                    n_b: moves_b.len(),
                    mean_a: mean_std(&moves_a).0,
                    mean_b: mean_std(&moves_b).0,
                    t: test.t,
                    df: test.df,
                    p_one_sided: test.p_one_sided,
                });
            }
        }
    }
    out
}

/// Mean wall-clock per pipeline stage per cell, from the traces' per-step
/// stage timings.
pub fn timing_report(rows: &[TrialRow], traces: &[EpisodeTrace]) -> Vec<TimingRow> {
    // Map (scene, config) -> accumulated stage sums and step count.
    let mut acc: BTreeMap<(String, String), ([f64; 8], usize)> = BTreeMap::new();
    let mut trace_iter = traces.iter();
    for row in rows.iter().filter(|r| r.error.is_none()) {
        let Some(trace) = trace_iter.next() else { break };
        let entry = acc
            .entry((row.scene.clone(), row.config.clone()))
            .or_insert(([0.0; 8], 0));
        for step in &trace.steps {
            for (k, v) in step.timings.by_stage().iter().enumerate() {
                entry.0[k] += v;
            }
            entry.1 += 1;
        }
    }
    let mut out = Vec::new();
    for ((scene, config), (sums, steps)) in acc {
        for (k, stage) in StageTimings::STAGES.iter().enumerate() {
            out.push(TimingRow {
                scene: scene.clone(),
                config: config.clone(),
                stage,
                mean_seconds: if steps > 0 { sums[k] / steps as f64 } else { 0.0 },
            });
        }
    }
    out
}

/// Write trials.csv, summary.csv, significance.csv, timing.csv (and
/// traces/, when enabled) under `dir`. All but timing.csv are
/// deterministic given the spec.
pub fn write_outputs(result: &ResultTable, dir: &Path, save_traces: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let csv_err = |e: csv::Error| Error::Parse { file: "csv output".into(), message: e.to_string() };

    let mut w = csv::Writer::from_path(dir.join("trials.csv")).map_err(csv_err)?;
    w.write_record(["scene", "config", "trial", "seed", "moves", "status", "starved", "error"])
        .map_err(csv_err)?;
    for r in &result.rows {
        w.write_record([
            r.scene.as_str(),
            r.config.as_str(),
            &r.trial.to_string(),
            &r.seed.to_string(),
            &r.moves.to_string(),
            r.status,
            &r.starved.to_string(),
            r.error.as_deref().unwrap_or(""),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(csv_err)?;
    w.write_record([
        "scene",
        "config",
        "trials",
        "failed_trials",
        "mean_moves",
        "stderr_moves",
        "success_ratio",
        "ejected",
        "move_limit",
    ])
    .map_err(csv_err)?;
    for c in &result.cells {
        w.write_record([
            c.scene.as_str(),
            c.config.as_str(),
            &c.trials.to_string(),
            &c.failed_trials.to_string(),
            &c.mean_moves.to_string(),
            &c.stderr_moves.to_string(),
            &c.success_ratio.to_string(),
            &c.ejected.to_string(),
            &c.move_limit.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("significance.csv")).map_err(csv_err)?;
    w.write_record([
        "scope",
        "config_a",
        "config_b",
        "n_a",
        "n_b",
        "mean_a",
        "mean_b",
        "t",
        "df",
        "p_one_sided",
    ])
    .map_err(csv_err)?;
    for s in &result.significance {
        w.write_record([
            s.scope.as_str(),
            s.config_a.as_str(),
            s.config_b.as_str(),
            &s.n_a.to_string(),
            &s.n_b.to_string(),
            &s.mean_a.to_string(),
            &s.mean_b.to_string(),
            &s.t.to_string(),
            &s.df.to_string(),
            &s.p_one_sided.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("timing.csv")).map_err(csv_err)?;
    w.write_record(["scene", "config", "stage", "mean_seconds"]).map_err(csv_err)?;
    for t in &result.timing {
        w.write_record([
            t.scene.as_str(),
            t.config.as_str(),
            t.stage,
            &t.mean_seconds.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;

    if save_traces {
        let tdir = dir.join("traces");
        std::fs::create_dir_all(&tdir)?;
        let mut trace_iter = result.traces.iter();
        for row in result.rows.iter().filter(|r| r.error.is_none()) {
            let Some(trace) = trace_iter.next() else { break };
            let name = format!("{}__{}__{:03}.json", row.scene, row.config, row.trial);
            std::fs::write(tdir.join(name), trace.to_json())?;
        }
    }
    Ok(())
}

/// Re-run a recorded episode from its embedded scene and config; returns
/// the mismatch list (empty = reproduced bit-for-bit).
pub fn replay_trace(trace: &EpisodeTrace) -> Result<Vec<String>> {
    let scene_toml = trace.scene_toml.as_ref().ok_or_else(|| Error::Parse {
        file: "trace".into(),
        message: "trace carries no embedded scene".into(),
    })?;
    let scene = parse_scene(scene_toml, "embedded scene")?;
    let fresh = run_episode(&scene, &trace.config, trace.seed);
    Ok(trace.replay_diff(&fresh))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec(trials: usize) -> ExperimentSpec {
        let file = ExperimentFile {
            master_seed: 11,
            trials,
            scenes: vec!["scene_a".into()],
            output_dir: None,
            save_traces: false,
            planner: {
                let mut p = PlannerConfig::default();
                p.n_samples = 8;
                p
            },
            configs: vec![
                ConfigCell { name: "baseline".into(), completion: CompleterKind::Off, memory: false, memory_alpha: None },
                ConfigCell { name: "memory".into(), completion: CompleterKind::Off, memory: true, memory_alpha: None },
            ],
        };
        ExperimentSpec::from_spec_file(&file, None).unwrap()
    }

    #[test]
    fn single_cell_single_trial() {
        let mut spec = tiny_spec(1);
        spec.configs.truncate(1);
        let result = run_experiment(&spec).unwrap();
        assert_eq!(result.rows.len(), 1);
        assert_eq!(result.cells.len(), 1);
        assert_eq!(result.cells[0].trials, 1);
        assert!(result.rows[0].moves >= 1);
    }

    #[test]
    fn identical_specs_give_identical_statistics() {
        let spec = tiny_spec(2);
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.seed, rb.seed);
            assert_eq!(ra.moves, rb.moves);
            assert_eq!(ra.status, rb.status);
        }
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            assert_eq!(ca.mean_moves, cb.mean_moves);
            assert_eq!(ca.success_ratio, cb.success_ratio);
        }
    }

    #[test]
    fn cell_alpha_override_applies() {
        let spec = tiny_spec(1);
        let mut cell = spec.configs[1].clone();
        cell.memory_alpha = Some(0.75);
        let cfg = spec.planner_for(&cell);
        assert_eq!(cfg.memory_alpha, 0.75);
        assert!(cfg.memory);
        let plain = spec.planner_for(&spec.configs[1]);
        assert_eq!(plain.memory_alpha, PlannerConfig::default().memory_alpha);
    }

    #[test]
    fn duplicate_config_names_rejected() {
        let file = ExperimentFile {
            master_seed: 1,
            trials: 1,
            scenes: vec!["scene_a".into()],
            output_dir: None,
            save_traces: false,
            planner: PlannerConfig::default(),
            configs: vec![
                ConfigCell { name: "x".into(), completion: CompleterKind::Off, memory: false, memory_alpha: None },
                ConfigCell { name: "x".into(), completion: CompleterKind::Off, memory: true, memory_alpha: None },
            ],
        };
        assert!(ExperimentSpec::from_spec_file(&file, None).is_err());
    }

    #[test]
    fn experiment_file_parses_and_rejects_unknowns() {
        let text = r#"
master_seed = 5
trials = 2
scenes = ["scene_b"]

[planner]
n_samples = 16

[[config]]
name = "baseline"
completion = "off"
memory = false

[[config]]
name = "full"
completion = "prism_hull"
memory = true
"#;
        let file: ExperimentFile = toml::from_str(text).unwrap();
        assert_eq!(file.configs.len(), 2);
        assert_eq!(file.planner.n_samples, 16);
        assert_eq!(file.configs[1].completion, CompleterKind::PrismHull);

        let bad = text.replace("trials = 2", "trials = 2\nfrobnicate = true");
        assert!(toml::from_str::<ExperimentFile>(&bad).is_err());
    }

    #[test]
    fn timing_rows_are_positive_and_bounded() {
        let mut spec = tiny_spec(1);
        spec.configs.truncate(1);
        let result = run_experiment(&spec).unwrap();
        assert!(!result.timing.is_empty());
        assert!(result.timing.iter().any(|t| t.mean_seconds > 0.0));
        // Stage sums never exceed the episode wall time.
        for trace in &result.traces {
            let stage_total: f64 = trace.steps.iter().map(|s| s.timings.sum()).sum();
            assert!(
                stage_total <= trace.total_seconds + 1e-6,
                "stages {stage_total} > total {}",
                trace.total_seconds
            );
        }
    }

    #[test]
    fn significance_recomputes_from_trial_rows() {
        // Independent recomputation of the Welch statistic from the
        // per-trial rows, written out longhand.
        let spec = tiny_spec(3);
        let result = run_experiment(&spec).unwrap();
        let collect = |config: &str| -> Vec<f64> {
            result
                .rows
                .iter()
                .filter(|r| r.config == config && r.error.is_none())
                .map(|r| r.moves as f64)
                .collect()
        };
        let a = collect("baseline");
        let b = collect("memory");
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64]| {
            let m = mean(v);
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
        };
        let se = (var(&a) / a.len() as f64 + var(&b) / b.len() as f64).sqrt();
        let row = result
            .significance
            .iter()
            .find(|s| s.config_a == "baseline" && s.config_b == "memory")
            .unwrap();
        if se == 0.0 {
            assert!(row.t.is_infinite() || row.t == 0.0);
        } else {
            let t = (mean(&a) - mean(&b)) / se;
            assert!((row.t - t).abs() < 1e-12, "{} vs {}", row.t, t);
        }
        assert_eq!(row.n_a, a.len());
        assert_eq!(row.n_b, b.len());
    }

    #[test]
    fn replay_reproduces_recorded_trace() {
        let spec = tiny_spec(1);
        let result = run_experiment(&spec).unwrap();
        let trace = &result.traces[0];
        let diffs = replay_trace(trace).unwrap();
        assert!(diffs.is_empty(), "{diffs:?}");
    }
}
