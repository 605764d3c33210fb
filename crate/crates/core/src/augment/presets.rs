//! Named pipelines.
//!
//! - `light_drift`: dim light, mild sensor noise, occasional defocus.
//! - `heavy_drift`: brightness gain 0.4, blur sigma 3, noise sigma 25, always on.
//! - `geometric`: mirroring, rotation, skew and size/position jitter.

use super::pipeline::{AugmentPipeline, OpTemplate, Param, Step};
use crate::error::{Error, Result};

pub const PRESET_NAMES: &[&str] = &["light_drift", "heavy_drift", "geometric"];

pub fn preset(name: &str) -> Result<AugmentPipeline> {
    let steps = match name {
        "light_drift" => vec![
            Step::always(OpTemplate::Brightness { gain: Param::Range(0.7, 0.9) }),
            Step::new(OpTemplate::Contrast { factor: Param::Range(0.8, 0.95) }, 0.5),
            Step::new(OpTemplate::GaussianBlur { sigma: Param::Range(0.5, 1.0) }, 0.5),
            Step::always(OpTemplate::GaussianNoise { sigma: Param::Range(4.0, 8.0) }),
        ],
        "heavy_drift" => vec![
            Step::always(OpTemplate::Brightness { gain: Param::Fixed(0.4) }),
            Step::always(OpTemplate::GaussianBlur { sigma: Param::Fixed(3.0) }),
            Step::always(OpTemplate::GaussianNoise { sigma: Param::Fixed(25.0) }),
        ],
        "geometric" => vec![
            Step::new(OpTemplate::HFlip, 0.5),
            Step::new(OpTemplate::Rotate { degrees: Param::Range(-10.0, 10.0) }, 0.5),
            Step::new(
                OpTemplate::Shear {
                    kx: Param::Range(-0.15, 0.15),
                    ky: Param::Fixed(0.0),
                },
                0.3,
            ),
            Step::new(
                OpTemplate::ScaleTranslate {
                    sx: Param::Range(0.8, 1.2),
                    sy: Param::Range(0.8, 1.2),
                    tx: Param::Range(-0.1, 0.1),
                    ty: Param::Range(-0.05, 0.05),
                },
                0.5,
            ),
        ],
        other => {
            return Err(Error::InvalidParam(format!(
                "unknown preset `{other}` (expected one of: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let mut p = AugmentPipeline::new(steps, 0)?;
    p.name = Some(name.to_string());
    Ok(p)
}
