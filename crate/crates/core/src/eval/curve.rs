use serde::{Deserialize, Serialize};

use super::matching::match_detections;
use super::Prediction;
use crate::annotations::Annotation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    /// Every prediction with at least this confidence is counted.
    pub confidence: f64,
}

/// Precision/recall pairs, one per distinct confidence, highest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub n_ground_truth: usize,
    pub points: Vec<PrPoint>,
}

impl PrCurve {
    /// Build from `(confidence, is_true_positive)` pairs. Predictions sharing
    /// a confidence enter the ranking together and yield a single point.
    pub fn from_scored(mut scored: Vec<(f64, bool)>, n_ground_truth: usize) -> Self {
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut points = Vec::new();
        let (mut tp, mut fp) = (0usize, 0usize);
        let mut i = 0;
        while i < scored.len() {
            let conf = scored[i].0;
            while i < scored.len() && scored[i].0 == conf {
                if scored[i].1 {
                    tp += 1;
                } else {
                    fp += 1;
                }
                i += 1;
            }
            let recall = if n_ground_truth == 0 {
                0.0
            } else {
                tp as f64 / n_ground_truth as f64
            };
            points.push(PrPoint {
                recall,
                precision: tp as f64 / (tp + fp) as f64,
                confidence: conf,
            });
        }
        PrCurve {
            n_ground_truth,
            points,
        }
    }

    pub fn max_recall(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.recall)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("recall,precision,confidence\n");
        for p in &self.points {
            s.push_str(&format!("{:.6},{:.6},{:.6}\n", p.recall, p.precision, p.confidence));
        }
        s
    }
}

/// Curve for one class at one IoU threshold, matching each image separately.
pub fn pr_curve(images: &[(Vec<Prediction>, Vec<Annotation>)], class_id: u32, iou_thresh: f64) -> PrCurve {
    let n_classes = class_id as usize + 1;
    let mut scored = Vec::new();
    let mut n_gt = 0;
    for (preds, gts) in images {
        let m = match_detections(preds, gts, iou_thresh, n_classes);
        n_gt += gts.iter().filter(|g| g.class_id == class_id).count();
        for (p, tp) in preds.iter().zip(&m.tp) {
            if p.class_id == class_id {
                scored.push((p.confidence, *tp));
            }
        }
    }
    PrCurve::from_scored(scored, n_gt)
}

/// Interpolated AP over `n_points` evenly spaced recall levels in [0, 1]:
/// the mean, over levels r, of the best precision reached at recall ≥ r.
pub fn average_precision(curve: &PrCurve, n_points: usize) -> f64 {
    if curve.n_ground_truth == 0 || curve.points.is_empty() || n_points < 2 {
        return 0.0;
    }
    // Suffix maxima of precision, so each level is one binary search.
    let mut envelope: Vec<f64> = curve.points.iter().map(|p| p.precision).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let steps = (n_points - 1) as f64;
    let mut sum = 0.0;
    for k in 0..n_points {
        let r = k as f64 / steps;
        let idx = curve.points.partition_point(|p| p.recall < r);
        if idx < envelope.len() {
            sum += envelope[idx];
        }
    }
    sum / n_points as f64
}
