use super::iou::iou_norm;
use super::Prediction;
use crate::annotations::Annotation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    /// Per prediction, in input order: true = true positive.
    pub tp: Vec<bool>,
    /// Per prediction, in input order: index of the matched ground truth.
    pub matched_gt: Vec<Option<usize>>,
    /// Unmatched ground truths per class id.
    pub false_negatives: Vec<usize>,
}

/// Greedy matching for one image.
///
/// Predictions are visited by descending confidence (stable, so ties keep
/// input order). Each takes the unmatched ground truth of the same class
/// with the highest IoU, provided it reaches `iou_thresh`; equal IoUs go to
/// the lowest ground-truth index.
pub fn match_detections(preds: &[Prediction], gts: &[Annotation], iou_thresh: f64, n_classes: usize) -> MatchResult {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].confidence.total_cmp(&preds[a].confidence));

    let mut gt_taken = vec![false; gts.len()];
    let mut tp = vec![false; preds.len()];
    let mut matched_gt = vec![None; preds.len()];
    for &pi in &order {
        let p = &preds[pi];
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in gts.iter().enumerate() {
            if gt_taken[gi] || g.class_id != p.class_id {
                continue;
            }
            let v = iou_norm(&p.bbox, &g.bbox);
            if v >= iou_thresh && best.is_none_or(|(_, b)| v > b) {
                best = Some((gi, v));
            }
        }
        if let Some((gi, _)) = best {
            gt_taken[gi] = true;
            tp[pi] = true;
            matched_gt[pi] = Some(gi);
        }
    }

    let mut false_negatives = vec![0; n_classes];
    for (g, taken) in gts.iter().zip(&gt_taken) {
        if !taken {
            if let Some(c) = false_negatives.get_mut(g.class_id as usize) {
                *c += 1;
            }
        }
    }
    MatchResult {
        tp,
        matched_gt,
        false_negatives,
    }
}
