//! Dataset on disk: one directory holding a `manifest.csv` plus three
//! binary grid files per example.

use std::path::Path;

use super::{DatasetTriple, TripleMeta};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::voxel::{load_grid, save_grid};

/// Manifest columns, one row per example.
const HEADER: [&str; 12] = [
    "example_id",
    "shape",
    "rotation",
    "roll",
    "pitch",
    "yaw",
    "occluder_fraction",
    "seed",
    "camera_x",
    "camera_y",
    "camera_z",
    "prefix",
];

pub fn save_dataset(dataset: &[DatasetTriple], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("manifest.csv"))
        .map_err(|e| Error::Parse { file: "manifest.csv".into(), message: e.to_string() })?;
    w.write_record(HEADER)
        .map_err(|e| Error::Parse { file: "manifest.csv".into(), message: e.to_string() })?;
    for t in dataset {
        let prefix = format!("ex{:05}", t.meta.example_id);
        save_grid(&t.partial, &dir.join(format!("{prefix}_partial.vxg")))?;
        save_grid(&t.free, &dir.join(format!("{prefix}_free.vxg")))?;
        save_grid(&t.truth, &dir.join(format!("{prefix}_truth.vxg")))?;
        w.write_record([
            t.meta.example_id.to_string(),
            t.meta.shape.clone(),
            t.meta.rotation.to_string(),
            t.meta.rpy[0].to_string(),
            t.meta.rpy[1].to_string(),
            t.meta.rpy[2].to_string(),
            t.meta.occluder_fraction.to_string(),
            t.meta.seed.to_string(),
            t.camera.x.to_string(),
            t.camera.y.to_string(),
            t.camera.z.to_string(),
            prefix,
        ])
        .map_err(|e| Error::Parse { file: "manifest.csv".into(), message: e.to_string() })?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(dir: &Path) -> Result<Vec<DatasetTriple>> {
    let manifest = dir.join("manifest.csv");
    let bad = |message: String| Error::Parse {
        file: manifest.display().to_string(),
        message,
    };
    let mut r = csv::Reader::from_path(&manifest).map_err(|e| bad(e.to_string()))?;
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != HEADER.len() {
            return Err(bad(format!("expected {} fields, got {}", HEADER.len(), record.len())));
        }
        let field = |i: usize| record.get(i).unwrap();
        let parse_f = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| bad(format!("bad float in column {}", HEADER[i])))
        };
        let parse_u = |i: usize| -> Result<u64> {
            field(i).parse().map_err(|_| bad(format!("bad integer in column {}", HEADER[i])))
        };
        let prefix = field(11).to_string();
        out.push(DatasetTriple {
            partial: load_grid(&dir.join(format!("{prefix}_partial.vxg")))?,
            free: load_grid(&dir.join(format!("{prefix}_free.vxg")))?,
            truth: load_grid(&dir.join(format!("{prefix}_truth.vxg")))?,
            camera: Vec3::new(parse_f(8)?, parse_f(9)?, parse_f(10)?),
            meta: TripleMeta {
                example_id: parse_u(0)? as usize,
                shape: field(1).to_string(),
                rotation: parse_u(2)? as usize,
                rpy: [parse_f(3)?, parse_f(4)?, parse_f(5)?],
                occluder_fraction: parse_f(6)?,
                seed: parse_u(7)?,
            },
        });
    }
    Ok(out)
}
