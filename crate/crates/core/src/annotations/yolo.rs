use std::fmt::Write;

use super::{Annotation, ClassRegistry, NormBBox};
use crate::error::{Error, Result};

/// Parse one YOLO label file (`class cx cy w h` per line).
///
/// Blank lines are skipped; anything else that does not describe a valid
/// box is an error naming the 1-based line.
pub fn parse_yolo_label(text: &str, registry: &ClassRegistry) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::label(line_no, format!("expected 5 fields, found {}", fields.len())));
        }
        let class_id = parse_class(fields[0], registry, line_no)?;
        let bbox = parse_box(&fields[1..], line_no)?;
        out.push(Annotation { class_id, bbox });
    }
    Ok(out)
}

pub(crate) fn parse_class(token: &str, registry: &ClassRegistry, line: usize) -> Result<u32> {
    let id: u32 = token
        .parse()
        .map_err(|_| Error::label(line, format!("non-numeric class id `{token}`")))?;
    if !registry.contains(id) {
        return Err(Error::label(line, format!("unknown class id {id}")));
    }
    Ok(id)
}

pub(crate) fn parse_number(token: &str, what: &str, line: usize) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::label(line, format!("non-numeric {what} `{token}`"))),
    }
}

pub(crate) fn parse_box(tokens: &[&str], line: usize) -> Result<NormBBox> {
    let cx = parse_number(tokens[0], "cx", line)?;
    let cy = parse_number(tokens[1], "cy", line)?;
    let w = parse_number(tokens[2], "w", line)?;
    let h = parse_number(tokens[3], "h", line)?;
    let bbox = NormBBox { cx, cy, w, h };
    bbox.check().map_err(|cause| Error::label(line, cause))?;
    Ok(bbox)
}

/// Six-decimal rendering used for every coordinate written to disk.
pub fn format_coord(v: f64) -> String {
    format!("{v:.6}")
}

/// Extents are never rendered as zero so the written file stays valid.
pub(crate) fn format_extent(v: f64) -> String {
    format_coord(v.max(0.000_001))
}

/// Render annotations as a YOLO label file.
pub fn serialize_yolo_label(annotations: &[Annotation]) -> String {
    let mut s = String::with_capacity(annotations.len() * 40);
    for a in annotations {
        let b = &a.bbox;
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            a.class_id,
            format_coord(b.cx),
            format_coord(b.cy),
            format_extent(b.w),
            format_extent(b.h)
        );
    }
    s
}
