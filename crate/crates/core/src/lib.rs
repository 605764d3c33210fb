//! Dataset forge and evaluation harness for construction-zone obstacle
//! detection.
//!
//! The crate covers the whole data path of a detector project:
//!
//! - [`annotations`]: YOLO labels, dataset config files and CVAT XML exports.
//! - [`imaging`]: 8-bit RGB buffers, PNG/PPM I/O and HSV conversion.
//! - [`augment`]: seeded drift augmentation with exact box co-transformation.
//! - [`synthgen`]: procedural construction-zone scenes with pixel-exact ground
//!   truth, plus a colour-segmentation reference detector.
//! - [`splitter`]: stratified train/val/test splitting.
//! - [`eval`]: IoU matching, PR curves, AP, mAP50, mAP50-95 and confusion
//!   matrices.
//!
//! Batch work (scene generation, augmentation, per-image matching) goes
//! through [`exec`], which uses rayon when the `parallel` feature is enabled
//! and a plain loop otherwise. Results never depend on the worker count.

pub mod annotations;
pub mod augment;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod exec;
pub mod imaging;
pub mod kvconf;
pub mod seed;
pub mod splitter;
pub mod synthgen;

pub use annotations::{Annotation, ClassRegistry, DatasetConfig, ImageRecord, NormBBox, PixelBBox};
pub use error::{Error, Result};
pub use exec::Workers;
pub use imaging::Rgb8Image;
