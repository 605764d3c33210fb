use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::curve::{average_precision, PrCurve};
use super::iou::iou_norm;
use super::matching::match_detections;
use super::{EvalConfig, Prediction};
use crate::annotations::{ClassRegistry, ImageRecord};
use crate::error::{Error, Result};
use crate::exec::{self, Workers};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class_id: u32,
    pub name: String,
    /// Ground-truth objects of this class.
    pub support: usize,
    pub predictions: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map50: f64,
    pub map50_95: f64,
    /// AP at each configured IoU threshold.
    pub ap: Vec<f64>,
}

/// Unweighted means over classes that have ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map50: f64,
    pub map50_95: f64,
    pub classes_counted: usize,
}

/// Rows are predicted classes, columns ground truth; the last index of each
/// axis is background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCurve {
    pub class_id: u32,
    pub iou_threshold: f64,
    pub curve: PrCurve,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    pub per_image_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub images: usize,
    pub classes: Vec<ClassRow>,
    pub summary: Summary,
    pub confusion: ConfusionMatrix,
    #[serde(skip)]
    pub curves: Vec<ClassCurve>,
    pub timing: Timing,
}

struct ImageEval {
    /// Per threshold, per prediction (in input order): class, confidence, tp.
    scored: Vec<Vec<(u32, f64, bool)>>,
    /// Ground-truth count per class.
    gt: Vec<usize>,
    confusion: Vec<Vec<usize>>,
    elapsed_ms: f64,
}

fn eval_image(record: &ImageRecord, preds: &[Prediction], thresholds: &[f64], conf_thr: f64, n: usize) -> ImageEval {
    let start = Instant::now();
    let kept: Vec<Prediction> = preds.iter().filter(|p| p.confidence >= conf_thr).copied().collect();
    let gts = &record.annotations;
    let scored = thresholds
        .iter()
        .map(|&t| {
            let m = match_detections(&kept, gts, t, n);
            kept.iter().zip(&m.tp).map(|(p, tp)| (p.class_id, p.confidence, *tp)).collect()
        })
        .collect();
    let gt = record.class_counts(n);
    let confusion = confusion_for_image(&kept, gts, n);
    ImageEval {
        scored,
        gt,
        confusion,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Class-agnostic greedy pairing at IoU ≥ 0.5, highest IoU first.
fn confusion_for_image(preds: &[Prediction], gts: &[crate::annotations::Annotation], n: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; n + 1]; n + 1];
    let mut pairs = Vec::new();
    for (pi, p) in preds.iter().enumerate() {
        for (gi, g) in gts.iter().enumerate() {
            let v = iou_norm(&p.bbox, &g.bbox);
            if v >= 0.5 {
                pairs.push((v, pi, gi));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut p_used = vec![false; preds.len()];
    let mut g_used = vec![false; gts.len()];
    for (_, pi, gi) in pairs {
        if p_used[pi] || g_used[gi] {
            continue;
        }
        p_used[pi] = true;
        g_used[gi] = true;
        m[preds[pi].class_id as usize][gts[gi].class_id as usize] += 1;
    }
    for (p, used) in preds.iter().zip(&p_used) {
        if !used {
            m[p.class_id as usize][n] += 1;
        }
    }
    for (g, used) in gts.iter().zip(&g_used) {
        if !used {
            m[n][g.class_id as usize] += 1;
        }
    }
    m
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Evaluate `predictions[i]` against `records[i]` for every image.
pub fn evaluate(
    records: &[ImageRecord],
    predictions: &[Vec<Prediction>],
    registry: &ClassRegistry,
    config: &EvalConfig,
    workers: Workers,
) -> Result<EvalReport> {
    config.validate()?;
    if records.len() != predictions.len() {
        return Err(Error::InvalidParam(format!(
            "{} images but {} prediction sets",
            records.len(),
            predictions.len()
        )));
    }
    let n = registry.len();
    for (r, preds) in records.iter().zip(predictions) {
        let bad_gt = r.annotations.iter().find(|a| !registry.contains(a.class_id));
        let bad_pred = preds.iter().find(|p| !registry.contains(p.class_id));
        if let Some(id) = bad_gt.map(|a| a.class_id).or(bad_pred.map(|p| p.class_id)) {
            return Err(Error::Dataset(format!("{}: unknown class id {id}", r.image_id)));
        }
    }

    // Thresholds to match at: the configured ones, plus 0.5 if absent.
    let mut thresholds = config.iou_thresholds.clone();
    let idx50 = match thresholds.iter().position(|t| (t - 0.5).abs() < 1e-12) {
        Some(i) => i,
        None => {
            thresholds.push(0.5);
            thresholds.len() - 1
        }
    };

    let start = Instant::now();
    let per_image = exec::map_range(workers, records.len(), |i| {
        eval_image(&records[i], &predictions[i], &thresholds, config.conf_threshold, n)
    });
    let total_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut gt = vec![0usize; n];
    let mut confusion = vec![vec![0usize; n + 1]; n + 1];
    for im in &per_image {
        for (g, k) in gt.iter_mut().zip(&im.gt) {
            *g += k;
        }
        for (row, add) in confusion.iter_mut().zip(&im.confusion) {
            for (a, b) in row.iter_mut().zip(add) {
                *a += b;
            }
        }
    }

    let mut curves = Vec::new();
    let mut classes = Vec::with_capacity(n);
    for (c, name) in registry.iter() {
        let ci = c as usize;
        let mut ap = Vec::with_capacity(thresholds.len());
        let mut curve50 = None;
        for (ti, &t) in thresholds.iter().enumerate() {
            let scored: Vec<(f64, bool)> = per_image
                .iter()
                .flat_map(|im| im.scored[ti].iter().filter(|s| s.0 == c).map(|s| (s.1, s.2)))
                .collect();
            let curve = PrCurve::from_scored(scored, gt[ci]);
            ap.push(average_precision(&curve, config.interpolation_points));
            if ti == idx50 {
                curve50 = Some(curve.clone());
            }
            if ti < config.iou_thresholds.len() {
                curves.push(ClassCurve {
                    class_id: c,
                    iou_threshold: t,
                    curve,
                });
            }
        }
        let map50 = ap[idx50];
        ap.truncate(config.iou_thresholds.len());
        let map50_95 = ap.iter().sum::<f64>() / ap.len() as f64;

        let curve50 = curve50.expect("0.5 is always matched");
        let predictions: usize = per_image.iter().map(|im| im.scored[idx50].iter().filter(|s| s.0 == c).count()).sum();
        let tp: usize = per_image
            .iter()
            .map(|im| im.scored[idx50].iter().filter(|s| s.0 == c && s.2).count())
            .sum();
        debug_assert_eq!(curve50.points.last().map_or(0.0, |p| p.recall), ratio(tp, gt[ci]));
        let precision = ratio(tp, predictions);
        let recall = ratio(tp, gt[ci]);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        classes.push(ClassRow {
            class_id: c,
            name: name.to_string(),
            support: gt[ci],
            predictions,
            tp,
            fp: predictions - tp,
            fn_: gt[ci] - tp,
            precision,
            recall,
            f1,
            map50,
            map50_95,
            ap,
        });
    }

    let counted: Vec<&ClassRow> = classes.iter().filter(|r| r.support > 0).collect();
    let mean = |f: fn(&ClassRow) -> f64| {
        if counted.is_empty() {
            0.0
        } else {
            counted.iter().map(|r| f(r)).sum::<f64>() / counted.len() as f64
        }
    };
    let summary = Summary {
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f1: mean(|r| r.f1),
        map50: mean(|r| r.map50),
        map50_95: mean(|r| r.map50_95),
        classes_counted: counted.len(),
    };

    let mut labels: Vec<String> = registry.names().to_vec();
    labels.push("background".into());
    let per_image_sum: f64 = per_image.iter().map(|im| im.elapsed_ms).sum();
    Ok(EvalReport {
        config: config.clone(),
        images: records.len(),
        classes,
        summary,
        confusion: ConfusionMatrix {
            labels,
            matrix: confusion,
        },
        curves,
        timing: Timing {
            total_ms,
            per_image_ms: if records.is_empty() {
                0.0
            } else {
                per_image_sum / records.len() as f64
            },
        },
    })
}

impl EvalReport {
    /// Copy with wall-clock fields zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.timing = Timing::default();
        r
    }

    pub fn class(&self, name: &str) -> Option<&ClassRow> {
        self.classes.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per class plus `all`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("Class,Precision,Recall,mAP50,mAP50-95,Time (ms/img)\n");
        let t = self.timing.per_image_ms;
        for r in &self.classes {
            let _ = writeln!(
                s,
                "{},{:.4},{:.4},{:.4},{:.4},{:.3}",
                r.name, r.precision, r.recall, r.map50, r.map50_95, t
            );
        }
        let m = &self.summary;
        let _ = writeln!(
            s,
            "all,{:.4},{:.4},{:.4},{:.4},{:.3}",
            m.precision, m.recall, m.map50, m.map50_95, t
        );
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<12} {:>7} {:>9} {:>7} {:>7} {:>7} {:>9}\n",
            "Class", "Objects", "Precision", "Recall", "F1", "mAP50", "mAP50-95"
        );
        for r in &self.classes {
            let _ = writeln!(
                s,
                "{:<12} {:>7} {:>9.4} {:>7.4} {:>7.4} {:>7.4} {:>9.4}",
                r.name, r.support, r.precision, r.recall, r.f1, r.map50, r.map50_95
            );
        }
        let m = &self.summary;
        let support: usize = self.classes.iter().map(|r| r.support).sum();
        let _ = writeln!(
            s,
            "{:<12} {:>7} {:>9.4} {:>7.4} {:>7.4} {:>7.4} {:>9.4}",
            "all", support, m.precision, m.recall, m.f1, m.map50, m.map50_95
        );
        let _ = writeln!(s, "{} images, {:.3} ms/img", self.images, self.timing.per_image_ms);
        s
    }

    /// Write `pr_<class>_iou<NN>.csv` for every class and threshold.
    pub fn write_curves(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut out = Vec::new();
        for c in &self.curves {
            let name = self
                .classes
                .iter()
                .find(|r| r.class_id == c.class_id)
                .map_or_else(|| c.class_id.to_string(), |r| r.name.to_lowercase());
            let path = dir.join(format!("pr_{name}_iou{:02}.csv", (c.iou_threshold * 100.0).round() as u32));
            std::fs::write(&path, c.curve.to_csv()).map_err(|e| Error::io(&path, e))?;
            out.push(path);
        }
        Ok(out)
    }
}
