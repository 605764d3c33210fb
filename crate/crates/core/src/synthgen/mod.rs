//! Procedural construction-zone scenes with exact ground truth.
//!
//! Scenes are flat-shaded: a sky band, a road trapezoid converging on the
//! horizon and obstacles drawn at perspective scale. Every obstacle's drawn
//! pixels are kept as an [`ObjectMask`], and its ground-truth box is the
//! tight box of that mask. [`reference_detector`] recovers the obstacles by
//! colour segmentation, which closes the loop for end-to-end tests.

mod detector;
mod generate;
mod render;
mod scene;

pub use detector::{reference_detector, DetectorParams};
pub use generate::{generate_dataset, generate_scenes, scene_stem, GeneratedScene, Manifest, ManifestImage};
pub use render::{render_scene, ObjectMask, RenderedScene};
pub use scene::{Footprint, ObstacleSpec, SceneDistribution, SceneSpec};

use crate::imaging::Rgb;

pub const CONE: u32 = 0;
pub const BARRIER: u32 = 1;
pub const BEACON: u32 = 2;

/// Canonical colours. The three obstacle signatures sit in disjoint hue
/// windows; everything else is either unsaturated or outside all windows.
pub mod palette {
    use super::Rgb;

    pub const SKY: Rgb = [135, 185, 235];
    pub const GROUND: Rgb = [85, 125, 65];
    pub const ROAD: Rgb = [72, 72, 78];
    pub const LANE: Rgb = [230, 230, 230];
    pub const CONE_ORANGE: Rgb = [255, 110, 0];
    pub const STRIPE_WHITE: Rgb = [245, 245, 245];
    pub const BARRIER_RED: Rgb = [215, 25, 25];
    pub const BEACON_AMBER: Rgb = [255, 200, 0];
    pub const POST_GRAY: Rgb = [110, 110, 110];
}
