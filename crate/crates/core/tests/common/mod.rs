#![allow(dead_code)]

use std::path::PathBuf;

use bitvision_core::annotation::{BBox, BBoxAnnotation};
use bitvision_core::device::{load_profile, DeviceProfile};
use bitvision_core::metrics::{Detection, GroundTruth};

pub fn profiles_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../profiles")
}

pub fn shipped_profile(name: &str) -> DeviceProfile {
    load_profile(profiles_dir().join(name)).unwrap()
}

fn area(b: &BBox) -> f64 {
    (b.x_max - b.x_min) * (b.y_max - b.y_min)
}

/// Intersection by explicit corner clamping.
pub fn oracle_iou(a: &BBox, b: &BBox) -> f64 {
    let x0 = if a.x_min > b.x_min { a.x_min } else { b.x_min };
    let y0 = if a.y_min > b.y_min { a.y_min } else { b.y_min };
    let x1 = if a.x_max < b.x_max { a.x_max } else { b.x_max };
    let y1 = if a.y_max < b.y_max { a.y_max } else { b.y_max };
    if x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let i = (x1 - x0) * (y1 - y0);
    i / (area(a) + area(b) - i)
}

/// Exhaustive-threshold AP: for every cutoff k the top-k detections are
/// matched from scratch, giving (P_k, R_k); AP sums each recall increase
/// times the best precision reachable at that recall or beyond.
pub fn oracle_ap(dets: &[Detection], gts: &GroundTruth, class: &str, thr: f64) -> Option<f64> {
    let npos: usize = gts
        .values()
        .map(|v| v.iter().filter(|b| b.class_label == class).count())
        .sum();
    if npos == 0 {
        return None;
    }
    let mut ranked: Vec<(usize, &Detection)> = dets
        .iter()
        .enumerate()
        .filter(|(_, d)| d.class_label == class)
        .collect();
    // descending confidence, input order on ties
    ranked.sort_by(|a, b| {
        b.1.confidence
            .partial_cmp(&a.1.confidence)
            .unwrap()
            .then(a.0.cmp(&b.0))
    });
    let mut points = Vec::new();
    for k in 1..=ranked.len() {
        let mut used: Vec<(String, usize)> = Vec::new();
        let mut tp = 0;
        for (_, d) in &ranked[..k] {
            let cands: Vec<(usize, &BBoxAnnotation)> = gts
                .get(&d.image_id)
                .map(|v| v.iter().filter(|b| b.class_label == class).enumerate().collect())
                .unwrap_or_default();
            let mut best: Option<(usize, f64)> = None;
            for (gi, g) in cands {
                if used.contains(&(d.image_id.clone(), gi)) {
                    continue;
                }
                let v = oracle_iou(&d.bbox, &g.bbox);
                match best {
                    Some((_, bv)) if bv >= v => {}
                    _ => best = Some((gi, v)),
                }
            }
            if let Some((gi, v)) = best {
                if v >= thr {
                    used.push((d.image_id.clone(), gi));
                    tp += 1;
                }
            }
        }
        points.push((tp as f64 / k as f64, tp as f64 / npos as f64));
    }
    let mut levels: Vec<f64> = points.iter().map(|p| p.1).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let mut ap = 0.0;
    let mut prev = 0.0;
    for r in levels {
        if r <= 0.0 {
            continue;
        }
        let best = points
            .iter()
            .filter(|p| p.1 >= r)
            .map(|p| p.0)
            .fold(0.0, f64::max);
        ap += (r - prev) * best;
        prev = r;
    }
    Some(ap)
}
