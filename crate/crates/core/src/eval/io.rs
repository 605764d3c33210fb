use std::collections::HashMap;
use std::fmt::Write;
use std::path::Path;

use super::Prediction;
use crate::annotations::yolo::{format_coord, format_extent, parse_box, parse_class, parse_number};
use crate::annotations::ClassRegistry;
use crate::error::{Error, Result};

/// Parse a prediction file: `class confidence cx cy w h` per line.
pub fn parse_prediction_file(text: &str, registry: &ClassRegistry) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 6 {
            return Err(Error::label(line_no, format!("expected 6 fields, found {}", fields.len())));
        }
        let class_id = parse_class(fields[0], registry, line_no)?;
        let confidence = parse_number(fields[1], "confidence", line_no)?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::label(line_no, "confidence out of range"));
        }
        let bbox = parse_box(&fields[2..], line_no)?;
        out.push(Prediction {
            class_id,
            bbox,
            confidence,
        });
    }
    Ok(out)
}

pub fn serialize_predictions(preds: &[Prediction]) -> String {
    let mut s = String::new();
    for p in preds {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            p.class_id,
            format_coord(p.confidence),
            format_coord(p.bbox.cx),
            format_coord(p.bbox.cy),
            format_extent(p.bbox.w),
            format_extent(p.bbox.h)
        );
    }
    s
}

/// Load `<stem>.txt` prediction files for the given image ids, in that order.
///
/// A missing file means the image has no predictions. A file whose stem
/// matches no image is an error.
pub fn load_prediction_dir(dir: &Path, image_ids: &[&str], registry: &ClassRegistry) -> Result<Vec<Vec<Prediction>>> {
    let index: HashMap<&str, usize> = image_ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut out = vec![Vec::new(); image_ids.len()];
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            paths.push(path);
        }
    }
    paths.sort();
    for path in paths {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let Some(&i) = index.get(stem) else {
            return Err(Error::in_file(&path, Error::Dataset("prediction file has no matching image".into())));
        };
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        out[i] = parse_prediction_file(&text, registry).map_err(|e| Error::in_file(&path, e))?;
    }
    Ok(out)
}
