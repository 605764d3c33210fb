//! Seeded drift augmentation with box co-transformation.
//!
//! Photometric ops change pixels only. Geometric ops resample the image
//! under an affine map and carry every ground-truth box through the same
//! map (axis-aligned hull of the four mapped corners, clipped to the frame).

mod geometric;
mod photometric;
mod pipeline;
mod presets;

use serde::{Deserialize, Serialize};

use crate::annotations::Annotation;
use crate::error::{Error, Result};
use crate::imaging::{Rgb, Rgb8Image};

pub use geometric::{apply_geometric, Affine};
pub use photometric::{apply_photometric, gaussian_kernel};
pub use pipeline::{
    apply_pipeline, parse_pipeline, replay, AugmentPipeline, AugmentProvenance, OpTemplate, Param, Step, StepRecord,
};
pub use presets::{preset, PRESET_NAMES};

/// Letterbox gray used for regions that map outside the source image.
pub const DEFAULT_FILL: Rgb = [114, 114, 114];
pub const DEFAULT_MIN_VISIBILITY: f64 = 0.3;

/// One fully parameterized transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AugmentOp {
    /// `out = in · gain` per channel.
    Brightness { gain: f64 },
    /// `out = (in − 128) · factor + 128` per channel.
    Contrast { factor: f64 },
    /// HSV saturation scaled by `factor`, capped at 1.
    Saturation { factor: f64 },
    /// HSV hue rotated by `degrees`.
    HueShift { degrees: f64 },
    /// Additive N(0, sigma²) per channel, sigma in 0–255 intensity units.
    GaussianNoise { sigma: f64, seed: u64 },
    /// Separable Gaussian blur, sigma in pixels.
    GaussianBlur { sigma: f64 },
    #[serde(rename = "hflip")]
    HFlip,
    #[serde(rename = "vflip")]
    VFlip,
    /// Rotation about the image center, positive = counter-clockwise on screen.
    Rotate { degrees: f64 },
    /// `x' = x + kx·(y − cy)`, `y' = y + ky·(x − cx)` about the center.
    Shear { kx: f64, ky: f64 },
    /// Scale about the center, then shift by a fraction of the image size.
    ScaleTranslate { sx: f64, sy: f64, tx: f64, ty: f64 },
}

impl AugmentOp {
    pub fn name(&self) -> &'static str {
        match self {
            AugmentOp::Brightness { .. } => "brightness",
            AugmentOp::Contrast { .. } => "contrast",
            AugmentOp::Saturation { .. } => "saturation",
            AugmentOp::HueShift { .. } => "hue_shift",
            AugmentOp::GaussianNoise { .. } => "gaussian_noise",
            AugmentOp::GaussianBlur { .. } => "gaussian_blur",
            AugmentOp::HFlip => "hflip",
            AugmentOp::VFlip => "vflip",
            AugmentOp::Rotate { .. } => "rotate",
            AugmentOp::Shear { .. } => "shear",
            AugmentOp::ScaleTranslate { .. } => "scale_translate",
        }
    }

    pub fn is_photometric(&self) -> bool {
        matches!(
            self,
            AugmentOp::Brightness { .. }
                | AugmentOp::Contrast { .. }
                | AugmentOp::Saturation { .. }
                | AugmentOp::HueShift { .. }
                | AugmentOp::GaussianNoise { .. }
                | AugmentOp::GaussianBlur { .. }
        )
    }

    /// True for parameter values that leave pixels and boxes untouched.
    pub fn is_identity(&self) -> bool {
        match *self {
            AugmentOp::Brightness { gain } => gain == 1.0,
            AugmentOp::Contrast { factor } | AugmentOp::Saturation { factor } => factor == 1.0,
            AugmentOp::HueShift { degrees } => degrees.rem_euclid(360.0) == 0.0,
            AugmentOp::GaussianNoise { sigma, .. } | AugmentOp::GaussianBlur { sigma } => sigma == 0.0,
            AugmentOp::HFlip | AugmentOp::VFlip => false,
            AugmentOp::Rotate { degrees } => degrees.rem_euclid(360.0) == 0.0,
            AugmentOp::Shear { kx, ky } => kx == 0.0 && ky == 0.0,
            AugmentOp::ScaleTranslate { sx, sy, tx, ty } => sx == 1.0 && sy == 1.0 && tx == 0.0 && ty == 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParam(format!("{}: {what} = {v}", self.name())));
        let finite = |v: f64| v.is_finite();
        match *self {
            AugmentOp::Brightness { gain: v } if !(finite(v) && (0.0..=4.0).contains(&v)) => bad("gain must be in [0, 4]", v),
            AugmentOp::Contrast { factor: v } | AugmentOp::Saturation { factor: v }
                if !(finite(v) && (0.0..=4.0).contains(&v)) =>
            {
                bad("factor must be in [0, 4]", v)
            }
            AugmentOp::HueShift { degrees: v } | AugmentOp::Rotate { degrees: v } if !finite(v) => {
                bad("degrees must be finite", v)
            }
            AugmentOp::GaussianNoise { sigma: v, .. } | AugmentOp::GaussianBlur { sigma: v } if !(finite(v) && v >= 0.0) => {
                bad("sigma must be >= 0", v)
            }
            AugmentOp::GaussianBlur { sigma } if sigma > 64.0 => bad("sigma must be <= 64", sigma),
            AugmentOp::Shear { kx, ky } => {
                for (n, v) in [("kx", kx), ("ky", ky)] {
                    if !(finite(v) && v.abs() <= 1.0) {
                        return bad(&format!("{n} must be in [-1, 1]"), v);
                    }
                }
                if (1.0 - kx * ky).abs() < 1e-6 {
                    return Err(Error::InvalidParam(format!("shear: kx = {kx}, ky = {ky} is singular")));
                }
                Ok(())
            }
            AugmentOp::ScaleTranslate { sx, sy, tx, ty } => {
                for (n, v) in [("sx", sx), ("sy", sy)] {
                    if !(finite(v) && v > 0.0 && v <= 4.0) {
                        return bad(&format!("{n} must be in (0, 4]"), v);
                    }
                }
                for (n, v) in [("tx", tx), ("ty", ty)] {
                    if !(finite(v) && v.abs() <= 1.0) {
                        return bad(&format!("{n} must be in [-1, 1]"), v);
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Apply any op. Photometric ops return the annotations unchanged.
pub fn apply_op(
    image: &Rgb8Image,
    annotations: &[Annotation],
    op: &AugmentOp,
    fill: Rgb,
    min_visibility: f64,
) -> Result<(Rgb8Image, Vec<Annotation>)> {
    if op.is_photometric() {
        Ok((apply_photometric(image, op)?, annotations.to_vec()))
    } else {
        apply_geometric(image, annotations, op, fill, min_visibility)
    }
}
