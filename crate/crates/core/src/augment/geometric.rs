use super::AugmentOp;
use crate::annotations::{Annotation, NormBBox};
use crate::error::{Error, Result};
use crate::imaging::{clamp_u8, Rgb, Rgb8Image};

/// Pixel-space affine map `x' = a·x + b·y + c`, `y' = d·x + e·y + f`.
///
/// Coordinates are continuous: pixel `(i, j)` covers `[i, i+1) × [j, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        e: 1.0,
        f: 0.0,
    };

    /// Linear part `[[a, b], [d, e]]` applied about `(cx, cy)`, then shifted by `(tx, ty)`.
    #[allow(clippy::too_many_arguments)]
    fn about(cx: f64, cy: f64, a: f64, b: f64, d: f64, e: f64, tx: f64, ty: f64) -> Self {
        Affine {
            a,
            b,
            c: cx - a * cx - b * cy + tx,
            d,
            e,
            f: cy - d * cx - e * cy + ty,
        }
    }

    /// Forward map of a geometric op on a `width × height` image.
    pub fn for_op(op: &AugmentOp, width: u32, height: u32) -> Option<Affine> {
        let (w, h) = (f64::from(width), f64::from(height));
        let (cx, cy) = (w / 2.0, h / 2.0);
        Some(match *op {
            AugmentOp::HFlip => Affine::about(cx, cy, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0),
            AugmentOp::VFlip => Affine::about(cx, cy, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0),
            AugmentOp::Rotate { degrees } => {
                let (sin, cos) = sin_cos_degrees(degrees);
                // y points down, so a counter-clockwise turn on screen maps
                // (1, 0) to (cos, -sin).
                Affine::about(cx, cy, cos, sin, -sin, cos, 0.0, 0.0)
            }
            AugmentOp::Shear { kx, ky } => Affine::about(cx, cy, 1.0, kx, ky, 1.0, 0.0, 0.0),
            AugmentOp::ScaleTranslate { sx, sy, tx, ty } => Affine::about(cx, cy, sx, 0.0, 0.0, sy, tx * w, ty * h),
            _ => return None,
        })
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.a * x + self.b * y + self.c, self.d * x + self.e * y + self.f)
    }

    pub fn inverse(&self) -> Option<Affine> {
        let det = self.a * self.e - self.b * self.d;
        if det.abs() < 1e-12 || !det.is_finite() {
            return None;
        }
        let (a, b, d, e) = (self.e / det, -self.b / det, -self.d / det, self.a / det);
        Some(Affine {
            a,
            b,
            c: -(a * self.c + b * self.f),
            d,
            e,
            f: -(d * self.c + e * self.f),
        })
    }
}

/// Exact values at multiples of 90°, so quarter turns permute pixels exactly.
#[allow(clippy::redundant_guards)]
fn sin_cos_degrees(deg: f64) -> (f64, f64) {
    let d = deg.rem_euclid(360.0);
    match d {
        x if x == 0.0 => (0.0, 1.0),
        x if x == 90.0 => (1.0, 0.0),
        x if x == 180.0 => (0.0, -1.0),
        x if x == 270.0 => (-1.0, 0.0),
        _ => d.to_radians().sin_cos(),
    }
}

/// Resample `image` under `op` and transform its boxes.
///
/// Each box's corners are mapped and replaced by their axis-aligned hull,
/// clipped to the frame. A box is dropped when the clipped hull keeps less
/// than `min_visibility` of the unclipped hull's area.
pub fn apply_geometric(
    image: &Rgb8Image,
    annotations: &[Annotation],
    op: &AugmentOp,
    fill: Rgb,
    min_visibility: f64,
) -> Result<(Rgb8Image, Vec<Annotation>)> {
    op.validate()?;
    if !(min_visibility > 0.0 && min_visibility <= 1.0) {
        return Err(Error::InvalidParam(format!("min_visibility must be in (0, 1], got {min_visibility}")));
    }
    let (w, h) = (image.width(), image.height());
    let Some(fwd) = Affine::for_op(op, w, h) else {
        return Err(Error::InvalidParam(format!("{} is not a geometric op", op.name())));
    };
    if op.is_identity() {
        return Ok((image.clone(), annotations.to_vec()));
    }

    let (out, boxes) = match op {
        AugmentOp::HFlip => (
            flip(image, true),
            annotations
                .iter()
                .map(|a| Annotation::new(a.class_id, NormBBox { cx: 1.0 - a.bbox.cx, ..a.bbox }))
                .collect(),
        ),
        AugmentOp::VFlip => (
            flip(image, false),
            annotations
                .iter()
                .map(|a| Annotation::new(a.class_id, NormBBox { cy: 1.0 - a.bbox.cy, ..a.bbox }))
                .collect(),
        ),
        _ => {
            let inv = fwd
                .inverse()
                .ok_or_else(|| Error::InvalidParam(format!("{} is not invertible", op.name())))?;
            let out = resample(image, &inv, fill);
            let boxes = annotations
                .iter()
                .filter_map(|a| transform_box(&a.bbox, &fwd, w, h, min_visibility).map(|b| Annotation::new(a.class_id, b)))
                .collect();
            (out, boxes)
        }
    };
    Ok((out, boxes))
}

fn flip(image: &Rgb8Image, horizontal: bool) -> Rgb8Image {
    let (w, h) = (image.width(), image.height());
    let mut out = Rgb8Image::filled(w, h, [0, 0, 0]);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = if horizontal { (w - 1 - x, y) } else { (x, h - 1 - y) };
            out.put(x, y, image.get(sx, sy));
        }
    }
    out
}

/// Inverse-mapped bilinear resampling; taps outside the source read `fill`.
fn resample(image: &Rgb8Image, inv: &Affine, fill: Rgb) -> Rgb8Image {
    let (w, h) = (image.width(), image.height());
    let (wi, hi) = (i64::from(w), i64::from(h));
    let tap = |x: i64, y: i64| -> Rgb {
        if x < 0 || y < 0 || x >= wi || y >= hi {
            fill
        } else {
            image.get(x as u32, y as u32)
        }
    };
    let mut out = Rgb8Image::filled(w, h, fill);
    for v in 0..h {
        for u in 0..w {
            let (sx, sy) = inv.apply(f64::from(u) + 0.5, f64::from(v) + 0.5);
            let (px, py) = (sx - 0.5, sy - 0.5);
            if !(px > -1.0 && py > -1.0 && px < wi as f64 && py < hi as f64) {
                continue;
            }
            let (x0, y0) = (px.floor(), py.floor());
            let (fx, fy) = (px - x0, py - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            let px = if fx == 0.0 && fy == 0.0 {
                tap(x0, y0)
            } else {
                let (p00, p10, p01, p11) = (tap(x0, y0), tap(x0 + 1, y0), tap(x0, y0 + 1), tap(x0 + 1, y0 + 1));
                let mut c = [0u8; 3];
                for k in 0..3 {
                    let top = f64::from(p00[k]) * (1.0 - fx) + f64::from(p10[k]) * fx;
                    let bot = f64::from(p01[k]) * (1.0 - fx) + f64::from(p11[k]) * fx;
                    c[k] = clamp_u8(top * (1.0 - fy) + bot * fy);
                }
                c
            };
            out.put(u, v, px);
        }
    }
    out
}

fn transform_box(b: &NormBBox, fwd: &Affine, width: u32, height: u32, min_visibility: f64) -> Option<NormBBox> {
    let (w, h) = (f64::from(width), f64::from(height));
    let p = b.to_pixel(width, height);
    let corners = [(p.xmin, p.ymin), (p.xmax, p.ymin), (p.xmin, p.ymax), (p.xmax, p.ymax)].map(|(x, y)| fwd.apply(x, y));
    let xs = corners.map(|c| c.0);
    let ys = corners.map(|c| c.1);
    let (x0, x1) = (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = (ys.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let hull_area = (x1 - x0) * (y1 - y0);
    let (cx0, cy0, cx1, cy1) = (x0.max(0.0), y0.max(0.0), x1.min(w), y1.min(h));
    if cx1 <= cx0 || cy1 <= cy0 || hull_area <= 0.0 {
        return None;
    }
    let visible = (cx1 - cx0) * (cy1 - cy0);
    if visible < min_visibility * hull_area {
        return None;
    }
    let nb = NormBBox::from_corners(cx0 / w, cy0 / h, cx1 / w, cy1 / h);
    nb.is_valid().then_some(nb)
}
