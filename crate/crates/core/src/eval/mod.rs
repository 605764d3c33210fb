//! Detection metrics: IoU, confidence-ranked matching, precision, recall,
//! F1, PR curves, 101-point AP, mAP50, mAP50-95 and a confusion matrix.

mod curve;
mod io;
mod iou;
mod matching;
mod report;

use serde::{Deserialize, Serialize};

use crate::annotations::NormBBox;
use crate::error::{Error, Result};

pub use curve::{average_precision, pr_curve, PrCurve, PrPoint};
pub use io::{load_prediction_dir, parse_prediction_file, serialize_predictions};
pub use iou::{iou, iou_norm, iou_pixel, AnyBox};
pub use matching::{match_detections, MatchResult};
pub use report::{evaluate, ClassCurve, ClassRow, ConfusionMatrix, EvalReport, Summary, Timing};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class_id: u32,
    pub bbox: NormBBox,
    pub confidence: f64,
}

impl Prediction {
    pub fn new(class_id: u32, bbox: NormBBox, confidence: f64) -> Self {
        Self {
            class_id,
            bbox,
            confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Strictly increasing, each in (0, 1].
    pub iou_thresholds: Vec<f64>,
    /// Predictions below this confidence are discarded before evaluation.
    pub conf_threshold: f64,
    pub interpolation_points: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_thresholds: (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect(),
            conf_threshold: 0.2,
            interpolation_points: 101,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iou_thresholds.is_empty() {
            return Err(Error::InvalidParam("no IoU thresholds".into()));
        }
        for t in &self.iou_thresholds {
            if !(*t > 0.0 && *t <= 1.0) {
                return Err(Error::InvalidParam(format!("IoU threshold {t} not in (0, 1]")));
            }
        }
        if self.iou_thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParam("IoU thresholds must be strictly increasing".into()));
        }
        if !(0.0..=1.0).contains(&self.conf_threshold) {
            return Err(Error::InvalidParam(format!("confidence threshold {} not in [0, 1]", self.conf_threshold)));
        }
        if self.interpolation_points < 2 {
            return Err(Error::InvalidParam("interpolation needs at least 2 points".into()));
        }
        Ok(())
    }

    /// Parse `lo:step:hi` (e.g. `0.5:0.05:0.95`) or a comma list.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn parse_thresholds(s: &str) -> Result<Vec<f64>> {
        let bad = || Error::InvalidParam(format!("invalid IoU threshold set `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let out = if parts.len() == 3 {
            let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
            let (lo, step, hi) = (nums[0], nums[1], nums[2]);
            if !(step > 0.0) || hi < lo {
                return Err(bad());
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            // Round to the step's decimal grid so 0.5 + 9·0.05 prints as 0.95.
            (0..=n).map(|i| ((lo + step * i as f64) * 1e6).round() / 1e6).collect()
        } else {
            s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<Vec<f64>>>()?
        };
        Ok(out)
    }
}
