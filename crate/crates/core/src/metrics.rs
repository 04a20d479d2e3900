//! IoU-thresholded average precision and mAP.
//!
//! Detections of a class are ranked by confidence (stable on ties) and
//! matched greedily: each takes the unmatched ground truth in its image with
//! the highest IoU (lowest index on ties) if that IoU reaches the threshold.
//! AP is the all-point interpolated area under the precision/recall curve.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotation::{io_error, read_annotation_doc, AnnotationError, BBox, BBoxAnnotation};

pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.5, 0.75];

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("prediction line {line}: {msg}")]
    PredictionLine { line: usize, msg: String },
    #[error("unknown class `{0}` in predictions")]
    UnknownClass(String),
    #[error("no ground truth file for predicted image `{0}`")]
    MissingGroundTruth(String),
    #[error("IoU threshold {0} outside (0, 1)")]
    Threshold(f64),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub class_label: String,
    pub bbox: BBox,
    pub confidence: f64,
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = a.x_max.min(b.x_max) - a.x_min.max(b.x_min);
    let ih = a.y_max.min(b.y_max) - a.y_min.max(b.y_min);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Ground truth keyed by image id.
pub type GroundTruth = BTreeMap<String, Vec<BBoxAnnotation>>;

/// TP flags of a class's detections in ranked order, plus the GT count.
fn ranked_matches(dets: &[Detection], gts: &GroundTruth, class_label: &str, threshold: f64) -> (Vec<bool>, usize) {
    let mut ranked: Vec<&Detection> = dets.iter().filter(|d| d.class_label == class_label).collect();
    // stable: ties keep input order
    ranked.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));

    let class_gts: HashMap<&str, Vec<&BBox>> = gts
        .iter()
        .map(|(img, boxes)| {
            (
                img.as_str(),
                boxes
                    .iter()
                    .filter(|b| b.class_label == class_label)
                    .map(|b| &b.bbox)
                    .collect(),
            )
        })
        .collect();
    let npos = class_gts.values().map(Vec::len).sum();
    let mut taken: HashMap<&str, Vec<bool>> = class_gts
        .iter()
        .map(|(k, v)| (*k, vec![false; v.len()]))
        .collect();

    let mut flags = Vec::with_capacity(ranked.len());
    for det in ranked {
        let mut hit = false;
        if let (Some(boxes), Some(used)) = (class_gts.get(det.image_id.as_str()), taken.get_mut(det.image_id.as_str())) {
            let mut best: Option<(usize, f64)> = None;
            for (i, gt) in boxes.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let v = iou(&det.bbox, gt);
                if best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((i, v));
                }
            }
            if let Some((i, v)) = best {
                if v >= threshold {
                    used[i] = true;
                    hit = true;
                }
            }
        }
        flags.push(hit);
    }
    (flags, npos)
}

/// All-point interpolated AP. `None` when the class has no ground truth.
pub fn average_precision(
    dets: &[Detection],
    gts: &GroundTruth,
    class_label: &str,
    iou_threshold: f64,
) -> Option<f64> {
    let (flags, npos) = ranked_matches(dets, gts, class_label, iou_threshold);
    if npos == 0 {
        return None;
    }
    let mut precision = Vec::with_capacity(flags.len());
    let mut recall = Vec::with_capacity(flags.len());
    let mut tp = 0usize;
    for (k, &hit) in flags.iter().enumerate() {
        if hit {
            tp += 1;
        }
        precision.push(tp as f64 / (k + 1) as f64);
        recall.push(tp as f64 / npos as f64);
    }
    // precision envelope, non-increasing from the right
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (p, r) in precision.iter().zip(&recall) {
        if *r > prev_recall {
            ap += (r - prev_recall) * p;
            prev_recall = *r;
        }
    }
    Some(ap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: String,
    pub gt_count: usize,
    pub det_count: usize,
    /// AP per threshold, aligned with `EvalReport::thresholds`; `null` when
    /// the class has no ground truth.
    pub ap: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub thresholds: Vec<f64>,
    pub classes: Vec<ClassReport>,
    /// Mean of the defined per-class APs at each threshold.
    pub map: Vec<Option<f64>>,
}

impl EvalReport {
    pub fn map_at(&self, threshold: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .position(|t| (t - threshold).abs() < 1e-12)
            .and_then(|i| self.map[i])
    }

    /// Plain-text table, percentages to two decimals.
    pub fn to_table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}", v * 100.0));
        let mut out = format!("{:<20} {:>6} {:>6}", "class", "gt", "dets");
        for t in &self.thresholds {
            out += &format!(" {:>10}", format!("AP@{t}"));
        }
        out.push('\n');
        for c in &self.classes {
            out += &format!("{:<20} {:>6} {:>6}", c.class, c.gt_count, c.det_count);
            for ap in &c.ap {
                out += &format!(" {:>10}", pct(*ap));
            }
            out.push('\n');
        }
        for (t, m) in self.thresholds.iter().zip(&self.map) {
            out += &format!("mAP@{t} {}\n", pct(*m));
        }
        out
    }
}

pub fn evaluate_sets(
    dets: &[Detection],
    gts: &GroundTruth,
    classes: &[String],
    thresholds: &[f64],
) -> Result<EvalReport, EvalError> {
    for t in thresholds {
        if !(*t > 0.0 && *t < 1.0) {
            return Err(EvalError::Threshold(*t));
        }
    }
    if let Some(d) = dets.iter().find(|d| !classes.contains(&d.class_label)) {
        return Err(EvalError::UnknownClass(d.class_label.clone()));
    }
    let class_reports: Vec<ClassReport> = classes
        .iter()
        .map(|c| ClassReport {
            class: c.clone(),
            gt_count: gts.values().flatten().filter(|b| &b.class_label == c).count(),
            det_count: dets.iter().filter(|d| &d.class_label == c).count(),
            ap: thresholds
                .iter()
                .map(|&t| average_precision(dets, gts, c, t))
                .collect(),
        })
        .collect();
    let map = (0..thresholds.len())
        .map(|i| {
            let defined: Vec<f64> = class_reports.iter().filter_map(|c| c.ap[i]).collect();
            (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
        })
        .collect();
    Ok(EvalReport {
        thresholds: thresholds.to_vec(),
        classes: class_reports,
        map,
    })
}

/// Parses `image_id class_label confidence x_min y_min x_max y_max` lines.
pub fn parse_predictions(text: &str) -> Result<Vec<Detection>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: String| EvalError::PredictionLine { line: line_no, msg };
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", fields.len())));
        }
        let mut nums = [0f64; 5];
        for (v, f) in nums.iter_mut().zip(&fields[2..]) {
            *v = f.parse().map_err(|_| err(format!("bad number `{f}`")))?;
        }
        let [confidence, x0, y0, x1, y1] = nums;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(err(format!("confidence {confidence} outside [0, 1]")));
        }
        let bbox = BBox::new(x0, y0, x1, y1);
        if !bbox.is_valid() {
            return Err(err("box has min >= max".to_string()));
        }
        out.push(Detection {
            image_id: fields[0].to_string(),
            class_label: fields[1].to_string(),
            bbox,
            confidence,
        });
    }
    Ok(out)
}

pub fn format_prediction(d: &Detection) -> String {
    format!(
        "{} {} {:.6} {} {} {} {}",
        d.image_id, d.class_label, d.confidence, d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max
    )
}

/// Loads every `*.json` annotation in `dir`, keyed by file stem.
pub fn load_ground_truth(dir: impl AsRef<Path>) -> Result<GroundTruth, EvalError> {
    let dir = dir.as_ref();
    let mut out = GroundTruth::new();
    let entries = std::fs::read_dir(dir).map_err(io_error(dir))?;
    for entry in entries {
        let path = entry.map_err(io_error(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        out.insert(stem, read_annotation_doc(&path)?.boxes);
    }
    Ok(out)
}

fn image_key(id: &str) -> &str {
    Path::new(id)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(id)
}

/// File-level evaluation: `pred_file` in the prediction grammar, `gt_dir`
/// holding JSON annotations named after their images.
pub fn evaluate(
    pred_file: impl AsRef<Path>,
    gt_dir: impl AsRef<Path>,
    classes: &[String],
    thresholds: &[f64],
) -> Result<EvalReport, EvalError> {
    let pred_file = pred_file.as_ref();
    let text = std::fs::read_to_string(pred_file).map_err(io_error(pred_file))?;
    let mut dets = parse_predictions(&text)?;
    let gts = load_ground_truth(gt_dir)?;
    for d in &mut dets {
        if !gts.contains_key(&d.image_id) {
            let key = image_key(&d.image_id);
            if !gts.contains_key(key) {
                return Err(EvalError::MissingGroundTruth(d.image_id.clone()));
            }
            d.image_id = key.to_string();
        }
    }
    evaluate_sets(&dets, &gts, classes, thresholds)
}
