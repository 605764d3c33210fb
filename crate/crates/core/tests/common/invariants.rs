//! Checks shared by the augmentation property tests and the acceptance run.

use czforge::annotations::serialize_yolo_label;
use czforge::augment::{apply_op, AugmentOp, DEFAULT_FILL};
use czforge::synthgen::GeneratedScene;
use rand::Rng;

/// Random op; about one in six has identity parameters.
pub fn random_op(rng: &mut impl Rng) -> AugmentOp {
    let identity = rng.gen_bool(1.0 / 6.0);
    match rng.gen_range(0..11) {
        0 => AugmentOp::Brightness { gain: if identity { 1.0 } else { rng.gen_range(0.0..3.0) } },
        1 => AugmentOp::Contrast { factor: if identity { 1.0 } else { rng.gen_range(0.0..3.0) } },
        2 => AugmentOp::Saturation { factor: if identity { 1.0 } else { rng.gen_range(0.0..3.0) } },
        3 => AugmentOp::HueShift { degrees: if identity { 0.0 } else { rng.gen_range(-180.0..180.0) } },
        4 => AugmentOp::GaussianNoise { sigma: if identity { 0.0 } else { rng.gen_range(0.5..30.0) }, seed: rng.gen() },
        5 => AugmentOp::GaussianBlur { sigma: if identity { 0.0 } else { rng.gen_range(0.3..3.0) } },
        6 => AugmentOp::HFlip,
        7 => AugmentOp::VFlip,
        8 => AugmentOp::Rotate { degrees: if identity { 0.0 } else { rng.gen_range(-180.0..180.0) } },
        9 => {
            if identity {
                AugmentOp::Shear { kx: 0.0, ky: 0.0 }
            } else {
                AugmentOp::Shear { kx: rng.gen_range(-0.4..0.4), ky: rng.gen_range(-0.4..0.4) }
            }
        }
        _ => {
            if identity {
                AugmentOp::ScaleTranslate { sx: 1.0, sy: 1.0, tx: 0.0, ty: 0.0 }
            } else {
                AugmentOp::ScaleTranslate {
                    sx: rng.gen_range(0.5..1.6),
                    sy: rng.gen_range(0.5..1.6),
                    tx: rng.gen_range(-0.3..0.3),
                    ty: rng.gen_range(-0.3..0.3),
                }
            }
        }
    }
}

/// Every pixel square of every object mask, mapped forward, lies inside the
/// object's transformed box (clipped to the frame).
fn hull_contains_masks(scene: &GeneratedScene, op: &AugmentOp) -> Result<(), String> {
    let (w, h) = (scene.image.width(), scene.image.height());
    let (wf, hf) = (f64::from(w), f64::from(h));
    let fwd = czforge::augment::Affine::for_op(op, w, h).ok_or("not geometric")?;
    for (k, (ann, mask)) in scene.annotations.iter().zip(&scene.masks).enumerate() {
        let (_, out) = apply_op(&scene.image, std::slice::from_ref(ann), op, DEFAULT_FILL, 1e-12).map_err(|e| e.to_string())?;
        let mapped: Vec<(f64, f64)> = mask
            .pixels()
            .flat_map(|(x, y)| {
                let (x, y) = (f64::from(x), f64::from(y));
                [(x, y), (x + 1.0, y), (x, y + 1.0), (x + 1.0, y + 1.0)]
            })
            .map(|(x, y)| fwd.apply(x, y))
            .collect();
        let Some(b) = out.first() else {
            // Dropped: nothing of the object may remain in frame.
            let inside = mapped.iter().any(|&(x, y)| x > 1e-9 && y > 1e-9 && x < wf - 1e-9 && y < hf - 1e-9);
            if inside {
                return Err(format!("object {k} dropped under {op:?} while still visible"));
            }
            continue;
        };
        let p = b.bbox.to_pixel(w, h);
        let eps = 1e-6;
        for &(x, y) in &mapped {
            let (x, y) = (x.clamp(0.0, wf), y.clamp(0.0, hf));
            if x < p.xmin - eps || x > p.xmax + eps || y < p.ymin - eps || y > p.ymax + eps {
                return Err(format!("object {k}: mapped point ({x}, {y}) outside box {p:?} under {op:?}"));
            }
        }
    }
    Ok(())
}

/// All per-pair invariants for one (scene, op).
pub fn check_pair(scene: &GeneratedScene, op: &AugmentOp) -> Result<(), String> {
    let labels = serialize_yolo_label(&scene.annotations);
    let (img, anns) = apply_op(&scene.image, &scene.annotations, op, DEFAULT_FILL, 0.3).map_err(|e| e.to_string())?;
    let out_labels = serialize_yolo_label(&anns);
    if op.is_photometric() && out_labels != labels {
        return Err(format!("{op:?} changed labels"));
    }
    if op.is_identity() && (img != scene.image || out_labels != labels) {
        return Err(format!("{op:?} is not a byte identity"));
    }
    match op {
        AugmentOp::HFlip | AugmentOp::VFlip => {
            let (img2, anns2) = apply_op(&img, &anns, op, DEFAULT_FILL, 0.3).map_err(|e| e.to_string())?;
            if img2 != scene.image || serialize_yolo_label(&anns2) != labels {
                return Err(format!("{op:?} twice is not the identity"));
            }
        }
        AugmentOp::Rotate { .. } | AugmentOp::Shear { .. } | AugmentOp::ScaleTranslate { .. } => {
            hull_contains_masks(scene, op)?;
        }
        _ => {}
    }
    Ok(())
}
