//! Labeled-dataset data model and annotation file formats.

mod config;
mod cvat;
mod filter;
mod stats;
pub(crate) mod yolo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{parse_dataset_config, DatasetConfig};
pub use cvat::parse_cvat_xml;
pub use filter::{filter_records, FilterOutcome, RemovalReason};
pub use stats::{dataset_stats, DatasetStats};
pub use yolo::{format_coord, parse_yolo_label, serialize_yolo_label};

/// Ordered class-id → name table. Ids are contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRegistry {
    names: Vec<String>,
}

impl ClassRegistry {
    /// Registry whose ids are the positions of `names`.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Config("class registry is empty".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.trim().is_empty() {
                return Err(Error::Config(format!("class {i} has an empty name")));
            }
            if names[..i].contains(n) {
                return Err(Error::Config(format!("duplicate class name `{n}`")));
            }
        }
        Ok(Self { names })
    }

    /// Registry from explicit `(id, name)` pairs in any order.
    pub fn from_entries<S: Into<String>>(entries: impl IntoIterator<Item = (u32, S)>) -> Result<Self> {
        let mut entries: Vec<(u32, String)> = entries.into_iter().map(|(i, n)| (i, n.into())).collect();
        entries.sort_by_key(|(i, _)| *i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Config(format!("duplicate class id {}", w[0].0)));
            }
        }
        if entries.iter().enumerate().any(|(pos, (id, _))| *id as usize != pos) {
            return Err(Error::Config("non-contiguous class ids".into()));
        }
        Self::new(entries.into_iter().map(|(_, n)| n))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|p| p as u32)
    }

    pub fn contains(&self, id: u32) -> bool {
        (id as usize) < self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.names.iter().enumerate().map(|(i, n)| (i as u32, n.as_str()))
    }
}

impl Default for ClassRegistry {
    /// cone, barrier, beacon.
    fn default() -> Self {
        Self {
            names: vec!["cone".into(), "barrier".into(), "beacon".into()],
        }
    }
}

/// Normalized center-format box, YOLO convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl NormBBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { cx, cy, w, h };
        b.check().map_err(|e| Error::InvalidParam(e.into()))?;
        Ok(b)
    }

    /// Name of the first violated invariant, if any.
    pub fn check(&self) -> Result<(), &'static str> {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        let extent = |v: f64| v.is_finite() && v > 0.0 && v <= 1.0;
        if !unit(self.cx) {
            Err("cx out of range")
        } else if !unit(self.cy) {
            Err("cy out of range")
        } else if !extent(self.w) {
            Err("w out of range")
        } else if !extent(self.h) {
            Err("h out of range")
        } else if self.clipped_area() <= 0.0 {
            Err("box has no area inside the image")
        } else {
            Ok(())
        }
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// Box spanning two corners (any order), in normalized units. Not validated.
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        let (xa, xb) = (x0.min(x1), x0.max(x1));
        let (ya, yb) = (y0.min(y1), y0.max(y1));
        Self {
            cx: (xa + xb) / 2.0,
            cy: (ya + yb) / 2.0,
            w: xb - xa,
            h: yb - ya,
        }
    }

    /// `(xmin, ymin, xmax, ymax)` in normalized units.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn clipped_area(&self) -> f64 {
        let (x0, y0, x1, y1) = self.corners();
        (x1.min(1.0) - x0.max(0.0)).max(0.0) * (y1.min(1.0) - y0.max(0.0)).max(0.0)
    }

    pub fn to_pixel(&self, width: u32, height: u32) -> PixelBBox {
        let (x0, y0, x1, y1) = self.corners();
        let (w, h) = (f64::from(width), f64::from(height));
        PixelBBox {
            xmin: x0 * w,
            ymin: y0 * h,
            xmax: x1 * w,
            ymax: y1 * h,
        }
    }
}

/// Pixel-space box over the half-open region `[xmin, xmax) × [ymin, ymax)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelBBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl PixelBBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let b = Self { xmin, ymin, xmax, ymax };
        if !(xmax > xmin && ymax > ymin && xmin >= 0.0 && ymin >= 0.0) {
            return Err(Error::InvalidParam(format!("degenerate pixel box {b:?}")));
        }
        Ok(b)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn to_norm(&self, width: u32, height: u32) -> NormBBox {
        let (w, h) = (f64::from(width), f64::from(height));
        NormBBox::from_corners(self.xmin / w, self.ymin / h, self.xmax / w, self.ymax / h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub class_id: u32,
    pub bbox: NormBBox,
}

impl Annotation {
    pub fn new(class_id: u32, bbox: NormBBox) -> Self {
        Self { class_id, bbox }
    }
}

/// One image with its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub annotations: Vec<Annotation>,
}

impl ImageRecord {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32, annotations: Vec<Annotation>) -> Result<Self> {
        let image_id = image_id.into();
        if image_id.is_empty() {
            return Err(Error::Dataset("empty image id".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::Dataset(format!("{image_id}: zero image dimension")));
        }
        Ok(Self {
            image_id,
            width,
            height,
            annotations,
        })
    }

    /// Object count per class id, indexed by id.
    pub fn class_counts(&self, n_classes: usize) -> Vec<usize> {
        let mut counts = vec![0; n_classes];
        for a in &self.annotations {
            if let Some(c) = counts.get_mut(a.class_id as usize) {
                *c += 1;
            }
        }
        counts
    }
}

/// One of the three dataset partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" | "valid" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(Error::InvalidParam(format!("unknown split `{s}`"))),
        }
    }
}

/// A value per split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits<T> {
    pub train: T,
    pub val: T,
    pub test: T,
}

impl<T> Splits<T> {
    pub fn get(&self, s: Split) -> &T {
        match s {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }

    pub fn get_mut(&mut self, s: Split) -> &mut T {
        match s {
            Split::Train => &mut self.train,
            Split::Val => &mut self.val,
            Split::Test => &mut self.test,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Split, &T)> {
        Split::ALL.into_iter().map(move |s| (s, self.get(s)))
    }

    pub fn map<U>(&self, mut f: impl FnMut(Split, &T) -> U) -> Splits<U> {
        Splits {
            train: f(Split::Train, &self.train),
            val: f(Split::Val, &self.val),
            test: f(Split::Test, &self.test),
        }
    }
}
