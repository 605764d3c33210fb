use serde::{Deserialize, Serialize};

use super::ImageRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum RemovalReason {
    /// No annotated obstacle.
    NoObjects,
    /// An object covers more than the allowed fraction of the frame.
    TooClose { annotation: usize, area: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<ImageRecord>,
    pub removed: Vec<(ImageRecord, RemovalReason)>,
}

/// Drop records without objects or with an object whose normalized area
/// `w·h` exceeds `max_area_frac`. Both partitions keep input order.
pub fn filter_records(records: Vec<ImageRecord>, max_area_frac: f64) -> Result<FilterOutcome> {
    if !(max_area_frac > 0.0 && max_area_frac <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "max area fraction must be in (0, 1], got {max_area_frac}"
        )));
    }
    let mut out = FilterOutcome::default();
    for rec in records {
        let reason = if rec.annotations.is_empty() {
            Some(RemovalReason::NoObjects)
        } else {
            rec.annotations
                .iter()
                .enumerate()
                .find(|(_, a)| a.bbox.area() > max_area_frac)
                .map(|(i, a)| RemovalReason::TooClose {
                    annotation: i,
                    area: a.bbox.area(),
                })
        };
        match reason {
            Some(r) => out.removed.push((rec, r)),
            None => out.kept.push(rec),
        }
    }
    Ok(out)
}
