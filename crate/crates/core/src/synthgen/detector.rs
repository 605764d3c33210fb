use super::scene::{BEACON_R, POST_H};
use super::{BARRIER, BEACON, CONE};
use crate::annotations::PixelBBox;
use crate::eval::Prediction;
use crate::imaging::{rgb_to_hsv, Rgb8Image};

/// Hue windows in degrees, `[lo, hi)`; red wraps through 0.
const RED_HUE: (f64, f64) = (345.0, 10.0);
const ORANGE_HUE: (f64, f64) = (15.0, 36.0);
const AMBER_HUE: (f64, f64) = (40.0, 60.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    pub min_saturation: f64,
    pub min_value: f64,
    /// Components smaller than this many pixels are ignored.
    pub min_area: usize,
    /// Component area that earns full confidence.
    pub expected_min_area: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            min_saturation: 0.55,
            min_value: 0.35,
            min_area: 6,
            expected_min_area: 120.0,
        }
    }
}

fn in_window(h: f64, (lo, hi): (f64, f64)) -> bool {
    if lo <= hi {
        h >= lo && h < hi
    } else {
        h >= lo || h < hi
    }
}

fn signature(rgb: [u8; 3], p: &DetectorParams) -> Option<u32> {
    let hsv = rgb_to_hsv(rgb);
    if hsv.s < p.min_saturation || hsv.v < p.min_value {
        return None;
    }
    if in_window(hsv.h, ORANGE_HUE) {
        Some(CONE)
    } else if in_window(hsv.h, RED_HUE) {
        Some(BARRIER)
    } else if in_window(hsv.h, AMBER_HUE) {
        Some(BEACON)
    } else {
        None
    }
}

/// Colour-segmentation detector for scenes drawn by this module, using
/// default parameters.
pub fn reference_detector(image: &Rgb8Image) -> Vec<Prediction> {
    detect_with(image, &DetectorParams::default())
}

/// Segment the three obstacle signatures, take 8-connected components and
/// emit one prediction per component with its tight box. Beacon boxes are
/// extended downward by the post length implied by the disc diameter.
/// Confidence is `min(1, area / expected_min_area)`.
pub fn detect_with(image: &Rgb8Image, params: &DetectorParams) -> Vec<Prediction> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let classes: Vec<Option<u32>> = image
        .as_bytes()
        .chunks_exact(3)
        .map(|p| signature([p[0], p[1], p[2]], params))
        .collect();
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut out = Vec::new();

    for start in 0..w * h {
        let Some(class_id) = classes[start] else { continue };
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut area = 0usize;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            area += 1;
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] && classes[j] == Some(class_id) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if area < params.min_area {
            continue;
        }
        let mut bbox = PixelBBox {
            xmin: x0 as f64,
            ymin: y0 as f64,
            xmax: (x1 + 1) as f64,
            ymax: (y1 + 1) as f64,
        };
        if class_id == BEACON {
            let post = bbox.height() * POST_H / (2.0 * BEACON_R);
            bbox.ymax = (bbox.ymax + post.round()).min(h as f64);
        }
        let confidence = (area as f64 / params.expected_min_area).min(1.0);
        let nb = bbox.to_norm(image.width(), image.height());
        if nb.is_valid() {
            out.push(Prediction {
                class_id,
                bbox: nb,
                confidence,
            });
        }
    }
    // Component discovery follows raster order; report strongest first.
    out.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    out
}
