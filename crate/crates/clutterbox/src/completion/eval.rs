//! Completer benchmarking over synthesized datasets.

use std::collections::BTreeMap;

use super::{complete, Completer, CompletionInput, DatasetTriple};
use crate::voxel::grid_distance;

#[derive(Debug, Clone)]
pub struct EvalRow {
    pub example_id: usize,
    pub shape: String,
    /// Per-example distance between the completed volume and the truth;
    /// None when completion failed (the error is recorded instead).
    pub chamfer: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct EvalStats {
    pub completer: &'static str,
    pub rows: Vec<EvalRow>,
    pub mean: f64,
    /// Sample standard deviation of the per-example distances divided by
    /// sqrt(N).
    pub stderr: f64,
    pub failed: usize,
    pub per_shape: BTreeMap<String, (f64, f64, usize)>,
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt() / (n as f64).sqrt())
}

/// Run the completer over every triple; failures are recorded as failed
/// examples and excluded from the aggregates.
pub fn evaluate_completer(completer: &dyn Completer, dataset: &[DatasetTriple]) -> EvalStats {
    assert!(!dataset.is_empty(), "dataset must be nonempty");
    let mut rows = Vec::with_capacity(dataset.len());
    for t in dataset {
        let row = (|| -> Result<f64, String> {
            let input = CompletionInput::new(t.partial.clone(), t.free.clone())
                .map_err(|e| e.to_string())?;
            let out = complete(completer, &input).map_err(|e| e.to_string())?;
            grid_distance(&out.completed, &t.truth).map_err(|e| e.to_string())
        })();
        rows.push(match row {
            Ok(d) => EvalRow {
                example_id: t.meta.example_id,
                shape: t.meta.shape.clone(),
                chamfer: Some(d),
                error: None,
            },
            Err(e) => EvalRow {
                example_id: t.meta.example_id,
                shape: t.meta.shape.clone(),
                chamfer: None,
                error: Some(e),
            },
        });
    }

    let ok: Vec<f64> = rows.iter().filter_map(|r| r.chamfer).collect();
    let (mean, stderr) = mean_stderr(&ok);
    let mut per_shape = BTreeMap::new();
    let shapes: std::collections::BTreeSet<&str> =
        rows.iter().map(|r| r.shape.as_str()).collect();
    for shape in shapes {
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.shape == shape)
            .filter_map(|r| r.chamfer)
            .collect();
        let (m, s) = mean_stderr(&vals);
        per_shape.insert(shape.to_string(), (m, s, vals.len()));
    }
    EvalStats {
        completer: completer.name(),
        failed: rows.iter().filter(|r| r.chamfer.is_none()).count(),
        rows,
        mean,
        stderr,
        per_shape,
    }
}
