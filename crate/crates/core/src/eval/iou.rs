use crate::annotations::{NormBBox, PixelBBox};
use crate::error::{Error, Result};

/// A box in either coordinate space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnyBox {
    Norm(NormBBox),
    Pixel(PixelBBox),
}

fn overlap(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> f64 {
    let iw = (a.2.min(b.2) - a.0.max(b.0)).max(0.0);
    let ih = (a.3.min(b.3) - a.1.max(b.1)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = (a.2 - a.0) * (a.3 - a.1) + (b.2 - b.0) * (b.3 - b.1) - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).min(1.0)
    }
}

pub fn iou_norm(a: &NormBBox, b: &NormBBox) -> f64 {
    overlap(a.corners(), b.corners())
}

pub fn iou_pixel(a: &PixelBBox, b: &PixelBBox) -> f64 {
    overlap((a.xmin, a.ymin, a.xmax, a.ymax), (b.xmin, b.ymin, b.xmax, b.ymax))
}

/// IoU of two boxes that must share a coordinate space.
pub fn iou(a: &AnyBox, b: &AnyBox) -> Result<f64> {
    match (a, b) {
        (AnyBox::Norm(a), AnyBox::Norm(b)) => Ok(iou_norm(a, b)),
        (AnyBox::Pixel(a), AnyBox::Pixel(b)) => Ok(iou_pixel(a, b)),
        _ => Err(Error::InvalidParam("IoU of boxes in different coordinate spaces".into())),
    }
}
