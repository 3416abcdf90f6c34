//! Ground-truth class-agnostic segmentation with an optional
//! under-segmentation noise model, and color-threshold target detection.

use super::{Observation, PixelLabel, TargetClassifier};
use crate::rng::Pcg32;

/// One planning segment: the pixels it covers and the ground-truth scene
/// object indices merged into it (one entry when noise is off).
#[derive(Debug, Clone)]
pub struct SegmentMask {
    pub pixels: Vec<usize>,
    pub object_indices: Vec<usize>,
}

/// Under-segmentation noise: each pair of objects whose visible pixel
/// sets touch is merged into one segment with probability `p_merge`.
#[derive(Debug, Clone, Copy)]
pub struct SegmentationNoiseModel {
    pub p_merge: f64,
}

impl Default for SegmentationNoiseModel {
    fn default() -> Self {
        SegmentationNoiseModel { p_merge: 0.0 }
    }
}

/// Partition the observation's labeled pixels into per-object masks.
/// Table and background pixels are rejected. With noise enabled, masks of
/// adjacent objects may merge (seeded, deterministic).
pub fn segment(
    obs: &Observation,
    noise: &SegmentationNoiseModel,
    rng: &mut Pcg32,
) -> Vec<SegmentMask> {
    // Pixels per visible object, keyed by scene object index (sorted).
    let mut per_object: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (pix, label) in obs.labels.iter().enumerate() {
        if let PixelLabel::Object(i) = label {
            per_object.entry(*i as usize).or_default().push(pix);
        }
    }
    let visible: Vec<usize> = per_object.keys().copied().collect();
    if visible.is_empty() {
        return Vec::new();
    }

    // Union-find over visible objects.
    let slot_of = |obj: usize, visible: &[usize]| visible.binary_search(&obj).unwrap();
    let mut parent: Vec<usize> = (0..visible.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }

    if noise.p_merge > 0.0 {
        // Adjacency: 4-connected pixels belonging to different objects.
        let mut adjacent = std::collections::BTreeSet::new();
        let w = obs.width;
        for (pix, label) in obs.labels.iter().enumerate() {
            let PixelLabel::Object(a) = label else { continue };
            let x = pix % w;
            let neighbors = [
                (x + 1 < w).then(|| pix + 1),
                (pix + w < obs.labels.len()).then(|| pix + w),
            ];
            for n in neighbors.into_iter().flatten() {
                if let PixelLabel::Object(b) = obs.labels[n] {
                    if b != *a {
                        let (lo, hi) = if *a < b { (*a, b) } else { (b, *a) };
                        adjacent.insert((lo as usize, hi as usize));
                    }
                }
            }
        }
        for (a, b) in adjacent {
            if rng.chance(noise.p_merge) {
                let (ra, rb) = (
                    find(&mut parent, slot_of(a, &visible)),
                    find(&mut parent, slot_of(b, &visible)),
                );
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }

    // Collect groups in order of their smallest member object index.
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (slot, &obj) in visible.iter().enumerate() {
        let root = find(&mut parent, slot);
        groups.entry(root).or_default().push(obj);
    }
    groups
        .into_values()
        .map(|object_indices| {
            let mut pixels: Vec<usize> = object_indices
                .iter()
                .flat_map(|o| per_object[o].iter().copied())
                .collect();
            pixels.sort_unstable();
            SegmentMask { pixels, object_indices }
        })
        .collect()
}

/// Pixels whose RGB Euclidean distance to the classifier's reference
/// color falls below the threshold.
pub fn detect_target(obs: &Observation, classifier: &TargetClassifier) -> Vec<bool> {
    obs.color.iter().map(|c| classifier.matches(*c)).collect()
}
