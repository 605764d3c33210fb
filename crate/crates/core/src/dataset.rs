//! On-disk dataset layouts.
//!
//! Flat: `images/<stem>.{png,ppm}` with `labels/<stem>.txt`.
//! Split: the same pair of directories under `images/<split>` and
//! `labels/<split>`, plus a `data.yaml` dataset config at the root.

use std::collections::HashSet;
use std::path::{Component, Path, PathBuf};

use crate::annotations::{
    parse_yolo_label, serialize_yolo_label, ClassRegistry, DatasetConfig, ImageRecord, Split, Splits,
};
use crate::error::{Error, Result};
use crate::exec::{self, Workers};
use crate::imaging::read_dimensions;

pub const CONFIG_FILE: &str = "data.yaml";

#[derive(Debug, Clone, PartialEq)]
pub struct StoredRecord {
    pub record: ImageRecord,
    pub image_path: PathBuf,
}

fn is_image(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("png" | "ppm")
    )
}

fn sorted_entries(dir: &Path, keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_file() && keep(&p) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

fn stem_of(p: &Path) -> String {
    p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string()
}

/// `images/...` maps to `labels/...`: the last `images` component is swapped.
pub fn labels_dir_for(images_dir: &Path) -> PathBuf {
    let comps: Vec<Component> = images_dir.components().collect();
    match comps.iter().rposition(|c| c.as_os_str() == "images") {
        Some(i) => {
            let mut p = PathBuf::new();
            for (j, c) in comps.iter().enumerate() {
                p.push(if j == i { "labels".as_ref() } else { c.as_os_str() });
            }
            p
        }
        None => images_dir.join("labels"),
    }
}

/// Load one image directory and its label directory. A missing label file
/// means no objects; a label file without an image is an error.
pub fn load_pair(images_dir: &Path, labels_dir: &Path, registry: &ClassRegistry, workers: Workers) -> Result<Vec<StoredRecord>> {
    let images = sorted_entries(images_dir, is_image)?;
    let mut stems = HashSet::new();
    for p in &images {
        if !stems.insert(stem_of(p)) {
            return Err(Error::in_file(p, Error::Dataset("duplicate image stem".into())));
        }
    }
    if labels_dir.is_dir() {
        for l in sorted_entries(labels_dir, |p| p.extension().is_some_and(|e| e == "txt"))? {
            if !stems.contains(&stem_of(&l)) {
                return Err(Error::in_file(&l, Error::Dataset("label file has no matching image".into())));
            }
        }
    }
    exec::try_map(workers, &images, |_, img| {
        let stem = stem_of(img);
        let (w, h) = read_dimensions(img)?;
        let lp = labels_dir.join(format!("{stem}.txt"));
        let annotations = match std::fs::read_to_string(&lp) {
            Ok(text) => parse_yolo_label(&text, registry).map_err(|e| Error::in_file(&lp, e))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(Error::io(&lp, e)),
        };
        Ok(StoredRecord {
            record: ImageRecord::new(stem, w, h, annotations)?,
            image_path: img.clone(),
        })
    })
}

pub fn load_flat(dir: &Path, registry: &ClassRegistry, workers: Workers) -> Result<Vec<StoredRecord>> {
    load_pair(&dir.join("images"), &dir.join("labels"), registry, workers)
}

/// Resolve the split directories of a dataset config. Relative paths are
/// taken relative to `base` (normally the config file's directory).
pub fn split_dirs(config: &DatasetConfig, base: &Path) -> Splits<PathBuf> {
    let root = base.join(&config.root_path);
    config.split_paths.map(|_, p| root.join(p))
}

pub fn load_split(config: &DatasetConfig, base: &Path, workers: Workers) -> Result<Splits<Vec<StoredRecord>>> {
    let dirs = split_dirs(config, base);
    let mut out: Splits<Vec<StoredRecord>> = Splits::default();
    for split in Split::ALL {
        let d = dirs.get(split);
        *out.get_mut(split) = load_pair(d, &labels_dir_for(d), &config.classes, workers)?;
    }
    Ok(out)
}

/// Read a dataset config file and every split it names.
pub fn load_config_dataset(config_path: &Path, workers: Workers) -> Result<(DatasetConfig, Splits<Vec<StoredRecord>>)> {
    let text = std::fs::read_to_string(config_path).map_err(|e| Error::io(config_path, e))?;
    let config = crate::annotations::parse_dataset_config(&text).map_err(|e| Error::in_file(config_path, e))?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let splits = load_split(&config, base, workers)?;
    Ok((config, splits))
}

/// Copy images and write labels into `images_dir` / `labels_dir`.
pub fn write_pair(images_dir: &Path, labels_dir: &Path, records: &[StoredRecord], workers: Workers) -> Result<()> {
    for d in [images_dir, labels_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    exec::try_map(workers, records, |_, r| {
        let ext = r.image_path.extension().and_then(|e| e.to_str()).unwrap_or("png");
        let dst = images_dir.join(format!("{}.{ext}", r.record.image_id));
        std::fs::copy(&r.image_path, &dst).map_err(|e| Error::io(&r.image_path, e))?;
        let lp = labels_dir.join(format!("{}.txt", r.record.image_id));
        std::fs::write(&lp, serialize_yolo_label(&r.record.annotations)).map_err(|e| Error::io(&lp, e))
    })?;
    Ok(())
}

pub fn write_flat(dir: &Path, records: &[StoredRecord], workers: Workers) -> Result<()> {
    write_pair(&dir.join("images"), &dir.join("labels"), records, workers)
}

/// Write the split layout and its `data.yaml`.
pub fn write_split(dir: &Path, splits: &Splits<Vec<StoredRecord>>, registry: &ClassRegistry, workers: Workers) -> Result<DatasetConfig> {
    for (split, recs) in splits.iter() {
        let s = split.as_str();
        write_pair(&dir.join("images").join(s), &dir.join("labels").join(s), recs, workers)?;
    }
    let config = DatasetConfig {
        root_path: ".".into(),
        split_paths: Splits::default().map(|s, _: &()| format!("images/{}", s.as_str())),
        classes: registry.clone(),
    };
    let p = dir.join(CONFIG_FILE);
    std::fs::write(&p, config.to_text()).map_err(|e| Error::io(&p, e))?;
    Ok(config)
}

/// Make `out` an empty directory. An existing non-empty directory is only
/// replaced with `force`, and never when it is, or contains, an input.
pub fn prepare_output(out: &Path, inputs: &[&Path], force: bool) -> Result<()> {
    if out.exists() {
        let abs_out = std::fs::canonicalize(out).map_err(|e| Error::io(out, e))?;
        for input in inputs {
            if let Ok(abs_in) = std::fs::canonicalize(input) {
                if abs_in.starts_with(&abs_out) {
                    return Err(Error::InvalidParam(format!(
                        "output {} would overwrite input {}",
                        out.display(),
                        input.display()
                    )));
                }
            }
        }
        let non_empty = std::fs::read_dir(out).map_err(|e| Error::io(out, e))?.next().is_some();
        if non_empty {
            if !force {
                return Err(Error::InvalidParam(format!(
                    "output {} exists and is not empty (use --force to replace it)",
                    out.display()
                )));
            }
            std::fs::remove_dir_all(out).map_err(|e| Error::io(out, e))?;
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}
