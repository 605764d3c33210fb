//! Reference implementations written without reuse of library internals.
//! Each one favours obviousness over speed.

#![allow(dead_code)]

pub mod invariants;

use czforge::annotations::{Annotation, NormBBox};
use czforge::eval::Prediction;
use rand::Rng;

/// IoU of integer boxes `(x0, y0, x1, y1)` by counting unit cells.
pub fn iou_by_counting(a: (i64, i64, i64, i64), b: (i64, i64, i64, i64)) -> f64 {
    let lo_x = a.0.min(b.0);
    let hi_x = a.2.max(b.2);
    let lo_y = a.1.min(b.1);
    let hi_y = a.3.max(b.3);
    let inside = |r: (i64, i64, i64, i64), x: i64, y: i64| x >= r.0 && x < r.2 && y >= r.1 && y < r.3;
    let (mut inter, mut union) = (0u64, 0u64);
    for y in lo_y..hi_y {
        for x in lo_x..hi_x {
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            if ia && ib {
                inter += 1;
            }
            if ia || ib {
                union += 1;
            }
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn plain_iou(a: &NormBBox, b: &NormBBox) -> f64 {
    let (ax0, ay0, ax1, ay1) = (a.cx - a.w / 2.0, a.cy - a.h / 2.0, a.cx + a.w / 2.0, a.cy + a.h / 2.0);
    let (bx0, by0, bx1, by1) = (b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.cx + b.w / 2.0, b.cy + b.h / 2.0);
    let iw = ax1.min(bx1) - ax0.max(bx0);
    let ih = ay1.min(by1) - ay0.max(by0);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    // Areas from corner differences, the same rounding the library sees.
    inter / ((ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter)
}

/// Greedy same-class matching written as repeated linear scans.
/// Returns true-positive flags in input order.
pub fn naive_match(preds: &[Prediction], gts: &[Annotation], thr: f64) -> Vec<bool> {
    let mut visited = vec![false; preds.len()];
    let mut taken = vec![false; gts.len()];
    let mut tp = vec![false; preds.len()];
    for _ in 0..preds.len() {
        // Highest confidence not yet visited, earliest on ties.
        let mut pick: Option<usize> = None;
        for i in 0..preds.len() {
            if !visited[i] && pick.is_none_or(|p| preds[i].confidence > preds[p].confidence) {
                pick = Some(i);
            }
        }
        let i = pick.unwrap();
        visited[i] = true;
        let mut best: Option<usize> = None;
        let mut best_iou = -1.0;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] || gt.class_id != preds[i].class_id {
                continue;
            }
            let v = plain_iou(&preds[i].bbox, &gt.bbox);
            if v >= thr && v > best_iou {
                best = Some(g);
                best_iou = v;
            }
        }
        if let Some(g) = best {
            taken[g] = true;
            tp[i] = true;
        }
    }
    tp
}

/// `(recall, precision)` at every distinct confidence, highest first.
pub fn naive_curve(scored: &[(f64, bool)], n_gt: usize) -> Vec<(f64, f64)> {
    let mut confs: Vec<f64> = scored.iter().map(|s| s.0).collect();
    confs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    confs.dedup();
    confs
        .iter()
        .map(|&c| {
            let tp = scored.iter().filter(|s| s.0 >= c && s.1).count();
            let all = scored.iter().filter(|s| s.0 >= c).count();
            let r = if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 };
            (r, tp as f64 / all as f64)
        })
        .collect()
}

/// Mean over 101 recall levels of the best precision at recall ≥ level.
pub fn naive_ap101(curve: &[(f64, f64)], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 0..101 {
        let r = k as f64 / 100.0;
        let mut best = 0.0f64;
        for &(rec, prec) in curve {
            if rec >= r && prec > best {
                best = prec;
            }
        }
        sum += best;
    }
    sum / 101.0
}

/// Exact area under the interpolated precision envelope.
pub fn naive_ap_all_points(curve: &[(f64, f64)], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut area = 0.0;
    let mut prev_r = 0.0;
    let mut recalls: Vec<f64> = curve.iter().map(|c| c.0).collect();
    recalls.sort_by(|a, b| a.partial_cmp(b).unwrap());
    recalls.dedup();
    for r in recalls {
        let env = curve.iter().filter(|c| c.0 >= r).map(|c| c.1).fold(0.0, f64::max);
        area += (r - prev_r) * env;
        prev_r = r;
    }
    area
}

pub struct NaiveClass {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map50: f64,
    pub map50_95: f64,
}

/// Whole-split evaluation for one class, recomputing everything per threshold.
pub fn naive_class_eval(
    images: &[(Vec<Prediction>, Vec<Annotation>)],
    class_id: u32,
    conf_thr: f64,
    thresholds: &[f64],
) -> NaiveClass {
    let filtered: Vec<(Vec<Prediction>, &Vec<Annotation>)> = images
        .iter()
        .map(|(p, g)| (p.iter().filter(|x| x.confidence >= conf_thr).copied().collect(), g))
        .collect();
    let n_gt: usize = images.iter().map(|(_, g)| g.iter().filter(|a| a.class_id == class_id).count()).sum();
    let ap_at = |thr: f64| {
        let mut scored = Vec::new();
        for (p, g) in &filtered {
            let tp = naive_match(p, g, thr);
            for (x, t) in p.iter().zip(tp) {
                if x.class_id == class_id {
                    scored.push((x.confidence, t));
                }
            }
        }
        (naive_ap101(&naive_curve(&scored, n_gt), n_gt), scored)
    };
    let (map50, scored50) = ap_at(0.5);
    let mut sum = 0.0;
    for &t in thresholds {
        sum += ap_at(t).0;
    }
    let tp = scored50.iter().filter(|s| s.1).count();
    let fp = scored50.len() - tp;
    let precision = if scored50.is_empty() { 0.0 } else { tp as f64 / scored50.len() as f64 };
    let recall = if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 };
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    NaiveClass {
        tp,
        fp,
        fn_: n_gt - tp,
        precision,
        recall,
        f1,
        map50,
        map50_95: sum / thresholds.len() as f64,
    }
}

/// Random valid box on a coarse grid, so that overlaps are common.
pub fn random_box(rng: &mut impl Rng) -> NormBBox {
    let w = rng.gen_range(2..=8) as f64 / 20.0;
    let h = rng.gen_range(2..=8) as f64 / 20.0;
    let cx = rng.gen_range(2..=18) as f64 / 20.0;
    let cy = rng.gen_range(2..=18) as f64 / 20.0;
    NormBBox { cx, cy, w, h }
}

/// Jitter a box so predictions land at a spread of IoUs against it.
pub fn jitter(rng: &mut impl Rng, b: &NormBBox) -> NormBBox {
    let s = rng.gen_range(0.0..0.08);
    NormBBox {
        cx: (b.cx + rng.gen_range(-s..=s)).clamp(0.0, 1.0),
        cy: (b.cy + rng.gen_range(-s..=s)).clamp(0.0, 1.0),
        w: (b.w * rng.gen_range(0.8..1.25)).min(1.0),
        h: (b.h * rng.gen_range(0.8..1.25)).min(1.0),
    }
}

/// Small random evaluation instance: ≤ `max_gt` ground truths and ≤ `max_pred`
/// predictions spread over a few images and classes.
pub fn random_instance(rng: &mut impl Rng, n_images: usize, n_classes: u32, max_gt: usize, max_pred: usize) -> Vec<(Vec<Prediction>, Vec<Annotation>)> {
    let mut images: Vec<(Vec<Prediction>, Vec<Annotation>)> = vec![(vec![], vec![]); n_images];
    let n_gt = rng.gen_range(0..=max_gt);
    for _ in 0..n_gt {
        let i = rng.gen_range(0..n_images);
        images[i].1.push(Annotation::new(rng.gen_range(0..n_classes), random_box(rng)));
    }
    let n_pred = rng.gen_range(0..=max_pred);
    for _ in 0..n_pred {
        let i = rng.gen_range(0..n_images);
        let conf = rng.gen_range(1..=20) as f64 / 20.0;
        let (class, bbox) = if !images[i].1.is_empty() && rng.gen_bool(0.7) {
            let g = images[i].1[rng.gen_range(0..images[i].1.len())];
            let class = if rng.gen_bool(0.9) { g.class_id } else { rng.gen_range(0..n_classes) };
            (class, jitter(rng, &g.bbox))
        } else {
            (rng.gen_range(0..n_classes), random_box(rng))
        };
        images[i].0.push(Prediction::new(class, bbox, conf));
    }
    images
}
