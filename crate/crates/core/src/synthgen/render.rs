use serde::{Deserialize, Serialize};

use super::scene::{Footprint, SceneSpec, BEACON_R, POST_H, POST_W};
use super::{palette, BARRIER, CONE};
use crate::annotations::{Annotation, NormBBox, PixelBBox};
use crate::error::Result;
use crate::imaging::{Rgb, Rgb8Image};
use crate::seed::splitmix64;

/// Pixels drawn for one obstacle, as run-length encoded rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectMask {
    pub class_id: u32,
    /// `(y, x_start, x_end)` with `x_end` exclusive, sorted by `y` then `x_start`.
    pub runs: Vec<(u32, u32, u32)>,
}

impl ObjectMask {
    pub fn pixel_count(&self) -> usize {
        self.runs.iter().map(|&(_, a, b)| (b - a) as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Tight half-open box of the covered pixels.
    pub fn tight_box(&self) -> Option<PixelBBox> {
        let first = self.runs.first()?;
        let last = self.runs.last()?;
        let xmin = self.runs.iter().map(|r| r.1).min()?;
        let xmax = self.runs.iter().map(|r| r.2).max()?;
        Some(PixelBBox {
            xmin: f64::from(xmin),
            ymin: f64::from(first.0),
            xmax: f64::from(xmax),
            ymax: f64::from(last.0 + 1),
        })
    }

    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.runs.iter().flat_map(|&(y, a, b)| (a..b).map(move |x| (x, y)))
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.runs.iter().any(|&(ry, a, b)| ry == y && x >= a && x < b)
    }

    fn from_rows(class_id: u32, rows: &[(u32, Vec<u32>)]) -> Self {
        let mut runs = Vec::new();
        for (y, xs) in rows {
            let mut iter = xs.iter().copied();
            if let Some(first) = iter.next() {
                let (mut start, mut end) = (first, first + 1);
                for x in iter {
                    if x == end {
                        end += 1;
                    } else {
                        runs.push((*y, start, end));
                        start = x;
                        end = x + 1;
                    }
                }
                runs.push((*y, start, end));
            }
        }
        Self { class_id, runs }
    }
}

#[derive(Debug, Clone)]
pub struct RenderedScene {
    pub image: Rgb8Image,
    /// Ground truth, one per visible obstacle, in drawing order.
    pub annotations: Vec<Annotation>,
    /// Masks aligned with `annotations`.
    pub masks: Vec<ObjectMask>,
    /// Obstacles that were omitted and why.
    pub log: Vec<String>,
}

/// Colour of an obstacle at a pixel centre, if the obstacle covers it.
fn shade(class_id: u32, fp: &Footprint, px: f64, py: f64) -> Option<Rgb> {
    let u = fp.unit;
    match class_id {
        CONE => {
            let (top, h) = (fp.y0, fp.y1 - fp.y0);
            if py < top || py >= fp.y1 {
                return None;
            }
            let t = (py - top) / h;
            let half = (fp.x1 - fp.x0) / 2.0 * t;
            let dx = (px - fp.center_x).abs();
            if dx > half {
                return None;
            }
            let banded = (0.4..0.6).contains(&t) && dx <= 0.6 * half;
            Some(if banded { palette::STRIPE_WHITE } else { palette::CONE_ORANGE })
        }
        BARRIER => {
            if px < fp.x0 || px >= fp.x1 || py < fp.y0 || py >= fp.y1 {
                return None;
            }
            let rim = (0.08 * (fp.y1 - fp.y0)).max(1.0);
            let on_rim = px - fp.x0 < rim || fp.x1 - px <= rim || py - fp.y0 < rim || fp.y1 - py <= rim;
            let stripe = ((px - fp.x0) / ((fp.x1 - fp.x0) / 7.0)).floor() as i64;
            Some(if on_rim || stripe % 2 == 0 {
                palette::BARRIER_RED
            } else {
                palette::STRIPE_WHITE
            })
        }
        _ => {
            let r = BEACON_R * u;
            let (dcx, dcy) = (fp.center_x, fp.base_y - POST_H * u - r);
            if (px - dcx).powi(2) + (py - dcy).powi(2) <= r * r {
                return Some(palette::BEACON_AMBER);
            }
            let post_top = fp.base_y - POST_H * u;
            if py >= dcy && py < fp.base_y && (px - dcx).abs() <= POST_W * u / 2.0 && py >= post_top - r {
                return Some(palette::POST_GRAY);
            }
            None
        }
    }
}

fn background(spec: &SceneSpec, px: f64, py: f64, dash_phase: f64) -> Rgb {
    let hy = spec.horizon_y();
    if py < hy {
        return spec.sky;
    }
    let cx = f64::from(spec.width) / 2.0;
    let half = spec.road_half_width(py);
    if (px - cx).abs() > half {
        return spec.ground;
    }
    // Centre dashes, periodic in inverse depth so they shrink toward the horizon.
    let depth = (f64::from(spec.height) - hy) / (py - hy).max(1e-9);
    let lane_half = half * 0.012;
    if (px - cx).abs() <= lane_half && ((depth + dash_phase) * 2.0).rem_euclid(1.0) < 0.5 {
        return palette::LANE;
    }
    spec.road
}

/// Render a scene. Far obstacles are painted first; an obstacle whose every
/// pixel is later overdrawn, or that covers no pixel, emits no annotation.
pub fn render_scene(spec: &SceneSpec) -> Result<RenderedScene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let dash_phase = (splitmix64(spec.seed) >> 11) as f64 / (1u64 << 53) as f64;

    let mut image = Rgb8Image::filled(w, h, spec.sky);
    for y in 0..h {
        for x in 0..w {
            image.put(x, y, background(spec, f64::from(x) + 0.5, f64::from(y) + 0.5, dash_phase));
        }
    }

    // Stable painter's order: farthest first, ties keep input order.
    let mut order: Vec<usize> = (0..spec.obstacles.len()).collect();
    order.sort_by(|&a, &b| {
        spec.obstacles[b]
            .distance
            .partial_cmp(&spec.obstacles[a].distance)
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut owner = vec![u32::MAX; w as usize * h as usize];
    let mut drawn: Vec<(usize, ObjectMask)> = Vec::new();
    let mut log = Vec::new();

    for &idx in &order {
        let o = &spec.obstacles[idx];
        let fp = spec.footprint(o);
        let xa = fp.x0.floor().max(0.0) as u32;
        let xb = (fp.x1.ceil().min(f64::from(w))).max(0.0) as u32;
        let ya = fp.y0.floor().max(0.0) as u32;
        let yb = (fp.y1.ceil().min(f64::from(h))).max(0.0) as u32;
        let mut rows: Vec<(u32, Vec<u32>)> = Vec::new();
        for y in ya..yb {
            let mut xs = Vec::new();
            for x in xa..xb {
                if let Some(c) = shade(o.class_id, &fp, f64::from(x) + 0.5, f64::from(y) + 0.5) {
                    image.put(x, y, c);
                    owner[(y * w + x) as usize] = drawn.len() as u32;
                    xs.push(x);
                }
            }
            if !xs.is_empty() {
                rows.push((y, xs));
            }
        }
        let mask = ObjectMask::from_rows(o.class_id, &rows);
        if mask.is_empty() {
            log.push(format!(
                "obstacle {idx} (class {}, distance {:.3}, lateral {:.3}) covers no pixel; omitted",
                o.class_id, o.distance, o.lateral
            ));
        }
        drawn.push((idx, mask));
    }

    let mut visible = vec![0usize; drawn.len()];
    for &o in &owner {
        if o != u32::MAX {
            visible[o as usize] += 1;
        }
    }

    let mut annotations = Vec::new();
    let mut masks = Vec::new();
    for (slot, (idx, mask)) in drawn.into_iter().enumerate() {
        if mask.is_empty() {
            continue;
        }
        if visible[slot] == 0 {
            log.push(format!("obstacle {idx} is fully occluded; omitted"));
            continue;
        }
        let tight = mask.tight_box().expect("non-empty mask");
        let bbox: NormBBox = tight.to_norm(w, h);
        annotations.push(Annotation::new(mask.class_id, bbox));
        masks.push(mask);
    }

    Ok(RenderedScene {
        image,
        annotations,
        masks,
        log,
    })
}
