use std::path::Path;

use serde::{Deserialize, Serialize};

use super::render::{render_scene, ObjectMask};
use super::scene::{SceneDistribution, SceneSpec};
use crate::annotations::{serialize_yolo_label, Annotation};
use crate::augment::{apply_pipeline, AugmentPipeline, AugmentProvenance};
use crate::error::{Error, Result};
use crate::exec::{self, Workers};
use crate::imaging::{encode_png, Rgb8Image};
use crate::seed::derive_indexed;

#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub stem: String,
    pub scene_seed: u64,
    pub spec: SceneSpec,
    pub image: Rgb8Image,
    pub annotations: Vec<Annotation>,
    /// Masks of the clean render, before any drift.
    pub masks: Vec<ObjectMask>,
    pub log: Vec<String>,
    pub provenance: Option<AugmentProvenance>,
}

pub fn scene_stem(index: usize) -> String {
    format!("scene_{index:06}")
}

/// Render `n` scenes. Scene `i` is sampled with `derive_indexed(seed, i)`,
/// so the output does not depend on `workers`. When `drift` is given it is
/// applied with its master seed replaced by `seed`.
pub fn generate_scenes(
    n: usize,
    dist: &SceneDistribution,
    drift: Option<&AugmentPipeline>,
    seed: u64,
    workers: Workers,
) -> Result<Vec<GeneratedScene>> {
    dist.validate()?;
    let drift = drift.map(|p| p.clone().with_seed(seed));
    if let Some(p) = &drift {
        p.validate()?;
    }
    let indices: Vec<usize> = (0..n).collect();
    exec::try_map(workers, &indices, |_, &i| {
        let scene_seed = derive_indexed(seed, i as u64);
        let spec = dist.sample(scene_seed);
        let stem = scene_stem(i);
        let r = render_scene(&spec)?;
        let (image, annotations, provenance) = match &drift {
            Some(p) => {
                let (img, anns, prov) = apply_pipeline(&r.image, &r.annotations, p, &stem)?;
                (img, anns, Some(prov))
            }
            None => (r.image, r.annotations, None),
        };
        Ok(GeneratedScene {
            stem,
            scene_seed,
            spec,
            image,
            annotations,
            masks: r.masks,
            log: r.log,
            provenance,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestImage {
    pub stem: String,
    pub scene_seed: u64,
    pub objects: usize,
    pub omitted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub count: usize,
    pub distribution: SceneDistribution,
    pub drift: Option<String>,
    /// Objects per class id.
    pub class_counts: Vec<usize>,
    pub images: Vec<ManifestImage>,
}

/// Generate scenes into `out` as `images/<stem>.png` and `labels/<stem>.txt`,
/// plus `manifest.json`, `generation.log` and, with drift, `provenance.jsonl`.
pub fn generate_dataset(
    out: &Path,
    n: usize,
    dist: &SceneDistribution,
    drift: Option<&AugmentPipeline>,
    seed: u64,
    workers: Workers,
) -> Result<Manifest> {
    let scenes = generate_scenes(n, dist, drift, seed, workers)?;
    let images = out.join("images");
    let labels = out.join("labels");
    for d in [&images, &labels] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    exec::try_map(workers, &scenes, |_, s| {
        let png = encode_png(&s.image)?;
        let ip = images.join(format!("{}.png", s.stem));
        std::fs::write(&ip, png).map_err(|e| Error::io(&ip, e))?;
        let lp = labels.join(format!("{}.txt", s.stem));
        std::fs::write(&lp, serialize_yolo_label(&s.annotations)).map_err(|e| Error::io(&lp, e))
    })?;

    let mut class_counts = vec![0usize; 3];
    let mut log = String::new();
    let mut prov = String::new();
    let mut entries = Vec::with_capacity(scenes.len());
    for s in &scenes {
        for a in &s.annotations {
            class_counts[a.class_id as usize] += 1;
        }
        for line in &s.log {
            log.push_str(&format!("{}: {line}\n", s.stem));
        }
        if let Some(p) = &s.provenance {
            prov.push_str(&serde_json::to_string(p).expect("provenance serializes"));
            prov.push('\n');
        }
        entries.push(ManifestImage {
            stem: s.stem.clone(),
            scene_seed: s.scene_seed,
            objects: s.annotations.len(),
            omitted: s.log.len(),
        });
    }
    let manifest = Manifest {
        seed,
        count: n,
        distribution: dist.clone(),
        drift: drift.map(|p| p.name.clone().unwrap_or_else(|| "custom".into())),
        class_counts,
        images: entries,
    };
    let write = |name: &str, text: &str| {
        let p = out.join(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("manifest.json", &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    write("generation.log", &log)?;
    if drift.is_some() {
        write("provenance.jsonl", &prov)?;
    }
    Ok(manifest)
}
