use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{palette, BARRIER, BEACON, CONE};
use crate::error::{Error, Result};
use crate::imaging::Rgb;

/// Depth at which an obstacle's base touches the bottom edge.
pub(crate) const NEAR_DEPTH: f64 = 0.1;
/// Road half-width at the bottom edge, as a fraction of image width.
pub(crate) const ROAD_HALF_WIDTH: f64 = 0.45;
pub(crate) const ROAD_TOP_HALF_WIDTH: f64 = 0.01;

// Obstacle proportions in units of the perspective scale.
pub(crate) const CONE_H: f64 = 0.6;
pub(crate) const CONE_W: f64 = 0.4;
pub(crate) const BARRIER_W: f64 = 1.2;
pub(crate) const BARRIER_H: f64 = 0.4;
pub(crate) const BEACON_R: f64 = 0.16;
pub(crate) const POST_H: f64 = 0.35;
pub(crate) const POST_W: f64 = 0.08;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub class_id: u32,
    /// Normalized depth in (0, 1]; apparent size scales with 1/distance.
    pub distance: f64,
    /// -1 = left road edge, +1 = right road edge.
    pub lateral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub horizon_frac: f64,
    pub obstacles: Vec<ObstacleSpec>,
    pub sky: Rgb,
    pub road: Rgb,
    pub ground: Rgb,
    /// Drives the lane-marking phase.
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 640,
            height: 640,
            horizon_frac: 0.4,
            obstacles: Vec::new(),
            sky: palette::SKY,
            road: palette::ROAD,
            ground: palette::GROUND,
            seed: 0,
        }
    }
}

/// Analytic extent of an obstacle before rasterization, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    /// Perspective scale: pixels between the horizon and the base line.
    pub unit: f64,
    pub center_x: f64,
    pub base_y: f64,
}

impl Footprint {
    pub fn intersects(&self, other: &Footprint, margin: f64) -> bool {
        self.x0 - margin < other.x1 && other.x0 - margin < self.x1 && self.y0 - margin < other.y1 && other.y0 - margin < self.y1
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParam("scene dimensions must be positive".into()));
        }
        if !(self.horizon_frac > 0.0 && self.horizon_frac < 1.0) {
            return Err(Error::InvalidParam(format!("horizon_frac {} not in (0, 1)", self.horizon_frac)));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.class_id > BEACON {
                return Err(Error::InvalidParam(format!("obstacle {i}: unknown class {}", o.class_id)));
            }
            if !(o.distance > 0.0 && o.distance <= 1.0) {
                return Err(Error::InvalidParam(format!("obstacle {i}: distance {} not in (0, 1]", o.distance)));
            }
            if !o.lateral.is_finite() {
                return Err(Error::InvalidParam(format!("obstacle {i}: lateral must be finite")));
            }
        }
        Ok(())
    }

    pub fn horizon_y(&self) -> f64 {
        self.horizon_frac * f64::from(self.height)
    }

    /// Road half-width in pixels at row `y` (zero above the horizon).
    pub fn road_half_width(&self, y: f64) -> f64 {
        let g = f64::from(self.height) - self.horizon_y();
        let t = ((y - self.horizon_y()) / g).max(0.0);
        f64::from(self.width) * (ROAD_TOP_HALF_WIDTH + (ROAD_HALF_WIDTH - ROAD_TOP_HALF_WIDTH) * t)
    }

    pub fn footprint(&self, o: &ObstacleSpec) -> Footprint {
        let g = f64::from(self.height) - self.horizon_y();
        let unit = g * NEAR_DEPTH / o.distance;
        let base_y = self.horizon_y() + unit;
        let center_x = f64::from(self.width) / 2.0 + o.lateral * self.road_half_width(base_y);
        let (w, h) = match o.class_id {
            CONE => (CONE_W * unit, CONE_H * unit),
            BARRIER => (BARRIER_W * unit, BARRIER_H * unit),
            _ => (2.0 * BEACON_R * unit, (2.0 * BEACON_R + POST_H) * unit),
        };
        Footprint {
            x0: center_x - w / 2.0,
            y0: base_y - h,
            x1: center_x + w / 2.0,
            y1: base_y,
            unit,
            center_x,
            base_y,
        }
    }
}

/// Distribution that [`crate::synthgen::generate_scenes`] samples scenes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDistribution {
    pub width: u32,
    pub height: u32,
    pub horizon_frac: f64,
    pub min_obstacles: usize,
    pub max_obstacles: usize,
    pub min_distance: f64,
    pub max_distance: f64,
    pub max_lateral: f64,
    /// Reject placements whose footprints overlap an earlier one.
    pub allow_overlap: bool,
}

impl Default for SceneDistribution {
    fn default() -> Self {
        Self {
            width: 640,
            height: 640,
            horizon_frac: 0.4,
            min_obstacles: 1,
            max_obstacles: 4,
            min_distance: 0.2,
            max_distance: 1.0,
            max_lateral: 0.9,
            allow_overlap: false,
        }
    }
}

impl SceneDistribution {
    pub fn validate(&self) -> Result<()> {
        if self.min_obstacles > self.max_obstacles {
            return Err(Error::InvalidParam("min_obstacles > max_obstacles".into()));
        }
        if !(self.min_distance > 0.0 && self.min_distance <= self.max_distance && self.max_distance <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "distance bounds [{}, {}] must satisfy 0 < min <= max <= 1",
                self.min_distance, self.max_distance
            )));
        }
        if !(self.max_lateral >= 0.0 && self.max_lateral.is_finite()) {
            return Err(Error::InvalidParam("max_lateral must be >= 0".into()));
        }
        SceneSpec {
            width: self.width,
            height: self.height,
            horizon_frac: self.horizon_frac,
            ..SceneSpec::default()
        }
        .validate()
    }

    pub fn sample(&self, seed: u64) -> SceneSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = SceneSpec {
            width: self.width,
            height: self.height,
            horizon_frac: self.horizon_frac,
            seed: rng.gen(),
            ..SceneSpec::default()
        };
        let n = rng.gen_range(self.min_obstacles..=self.max_obstacles);
        let mut placed: Vec<Footprint> = Vec::new();
        for _ in 0..n {
            for _attempt in 0..32 {
                let o = ObstacleSpec {
                    class_id: rng.gen_range(0..3),
                    distance: rng.gen_range(self.min_distance..=self.max_distance),
                    lateral: rng.gen_range(-self.max_lateral..=self.max_lateral),
                };
                let fp = spec.footprint(&o);
                if self.allow_overlap || !placed.iter().any(|p| p.intersects(&fp, 3.0)) {
                    placed.push(fp);
                    spec.obstacles.push(o);
                    break;
                }
            }
        }
        spec
    }
}
