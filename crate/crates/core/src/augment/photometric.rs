use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::AugmentOp;
use crate::error::{Error, Result};
use crate::imaging::{clamp_u8, hsv_to_rgb, rgb_to_hsv, Rgb8Image};

/// Apply a pixel-only op. Dimensions are preserved.
///
/// Gaussian noise is drawn from ChaCha8 seeded with the op's `seed`, one
/// `rand_distr::Normal` sample per byte in row-major RGB order.
pub fn apply_photometric(image: &Rgb8Image, op: &AugmentOp) -> Result<Rgb8Image> {
    op.validate()?;
    if !op.is_photometric() {
        return Err(Error::InvalidParam(format!("{} is not a photometric op", op.name())));
    }
    if op.is_identity() {
        return Ok(image.clone());
    }
    let out = match *op {
        AugmentOp::Brightness { gain } => lut(image, |v| clamp_u8(f64::from(v) * gain)),
        AugmentOp::Contrast { factor } => lut(image, |v| clamp_u8((f64::from(v) - 128.0) * factor + 128.0)),
        AugmentOp::Saturation { factor } => image.map_pixels(|p| {
            let mut hsv = rgb_to_hsv(p);
            hsv.s = (hsv.s * factor).min(1.0);
            hsv_to_rgb(hsv)
        }),
        AugmentOp::HueShift { degrees } => image.map_pixels(|p| {
            let mut hsv = rgb_to_hsv(p);
            hsv.h = (hsv.h + degrees).rem_euclid(360.0);
            hsv_to_rgb(hsv)
        }),
        AugmentOp::GaussianNoise { sigma, seed } => noise(image, sigma, seed),
        AugmentOp::GaussianBlur { sigma } => blur(image, sigma),
        _ => unreachable!("checked above"),
    };
    Ok(out)
}

fn lut(image: &Rgb8Image, f: impl Fn(u8) -> u8) -> Rgb8Image {
    let table: Vec<u8> = (0..=255u8).map(f).collect();
    let mut out = image.clone();
    for b in out.as_bytes_mut() {
        *b = table[*b as usize];
    }
    out
}

fn noise(image: &Rgb8Image, sigma: f64, seed: u64) -> Rgb8Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, sigma).expect("sigma validated");
    let mut out = image.clone();
    for b in out.as_bytes_mut() {
        *b = clamp_u8(f64::from(*b) + dist.sample(&mut rng));
    }
    out
}

/// Normalized Gaussian weights for offsets `-r..=r`, `r = ceil(3·sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Separable blur with replicated borders. The horizontal pass keeps full
/// precision; rounding happens once after the vertical pass.
fn blur(image: &Rgb8Image, sigma: f64) -> Rgb8Image {
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let (w, h) = (image.width() as i64, image.height() as i64);
    let src = image.as_bytes();

    let mut tmp = vec![0f64; src.len()];
    for y in 0..h {
        let row = (y * w * 3) as usize;
        for x in 0..w {
            let mut acc = [0f64; 3];
            for (k, wt) in kernel.iter().enumerate() {
                let sx = (x + k as i64 - r).clamp(0, w - 1);
                let o = row + (sx * 3) as usize;
                for c in 0..3 {
                    acc[c] += wt * f64::from(src[o + c]);
                }
            }
            let o = row + (x * 3) as usize;
            tmp[o..o + 3].copy_from_slice(&acc);
        }
    }

    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0f64; 3];
            for (k, wt) in kernel.iter().enumerate() {
                let sy = (y + k as i64 - r).clamp(0, h - 1);
                let o = ((sy * w + x) * 3) as usize;
                for c in 0..3 {
                    acc[c] += wt * tmp[o + c];
                }
            }
            let o = ((y * w + x) * 3) as usize;
            for c in 0..3 {
                out[o + c] = clamp_u8(acc[c]);
            }
        }
    }
    Rgb8Image::from_raw(image.width(), image.height(), out).expect("same dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: u32, h: u32) -> Rgb8Image {
        let mut img = Rgb8Image::filled(w, h, [0, 0, 0]);
        for y in 0..h {
            for x in 0..w {
                img.put(x, y, [(x * 7 % 256) as u8, (y * 13 % 256) as u8, ((x + y) * 5 % 256) as u8]);
            }
        }
        img
    }

    #[test]
    fn brightness_and_contrast_semantics() {
        let img = gradient(16, 16);
        assert_eq!(apply_photometric(&img, &AugmentOp::Brightness { gain: 1.0 }).unwrap(), img);
        let dark = apply_photometric(&img, &AugmentOp::Brightness { gain: 0.5 }).unwrap();
        assert_eq!(dark.get(3, 0)[0], 11); // 21 · 0.5 = 10.5 → 11
        let bright = apply_photometric(&img, &AugmentOp::Brightness { gain: 4.0 }).unwrap();
        assert_eq!(bright.get(10, 0)[0], 255);

        let mid = Rgb8Image::filled(8, 8, [128, 128, 128]);
        for factor in [0.0, 0.3, 1.7, 4.0] {
            assert_eq!(apply_photometric(&mid, &AugmentOp::Contrast { factor }).unwrap(), mid);
        }
        let c = apply_photometric(&Rgb8Image::filled(1, 1, [0, 100, 255]), &AugmentOp::Contrast { factor: 2.0 }).unwrap();
        assert_eq!(c.get(0, 0), [0, 72, 255]);
    }

    #[test]
    fn saturation_and_hue() {
        let img = Rgb8Image::filled(1, 1, [200, 100, 100]);
        let gray = apply_photometric(&img, &AugmentOp::Saturation { factor: 0.0 }).unwrap();
        assert_eq!(gray.get(0, 0), [200, 200, 200]);
        let full = apply_photometric(&img, &AugmentOp::Saturation { factor: 4.0 }).unwrap();
        assert_eq!(full.get(0, 0), [200, 0, 0]);
        let red = Rgb8Image::filled(1, 1, [255, 0, 0]);
        let green = apply_photometric(&red, &AugmentOp::HueShift { degrees: 120.0 }).unwrap();
        assert_eq!(green.get(0, 0), [0, 255, 0]);
        let img = gradient(32, 32);
        assert_eq!(apply_photometric(&img, &AugmentOp::Saturation { factor: 1.0 }).unwrap(), img);
        assert_eq!(apply_photometric(&img, &AugmentOp::HueShift { degrees: 360.0 }).unwrap(), img);
    }

    #[test]
    fn noise_is_seeded() {
        let img = Rgb8Image::filled(32, 32, [128, 128, 128]);
        let a = apply_photometric(&img, &AugmentOp::GaussianNoise { sigma: 15.0, seed: 3 }).unwrap();
        let b = apply_photometric(&img, &AugmentOp::GaussianNoise { sigma: 15.0, seed: 3 }).unwrap();
        let c = apply_photometric(&img, &AugmentOp::GaussianNoise { sigma: 15.0, seed: 4 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(apply_photometric(&img, &AugmentOp::GaussianNoise { sigma: 0.0, seed: 3 }).unwrap(), img);
    }

    #[test]
    fn kernel_shape() {
        let k = gaussian_kernel(2.0);
        assert_eq!(k.len(), 13);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(k[0], k[12]);
        assert!(k[6] > k[5]);
        assert_eq!(gaussian_kernel(0.1).len(), 3);
    }

    #[test]
    fn blur_preserves_constants_and_smooths_edges() {
        let flat = Rgb8Image::filled(20, 11, [37, 200, 128]);
        assert_eq!(apply_photometric(&flat, &AugmentOp::GaussianBlur { sigma: 2.0 }).unwrap(), flat);
        let mut step = Rgb8Image::filled(20, 1, [0, 0, 0]);
        for x in 10..20 {
            step.put(x, 0, [255, 255, 255]);
        }
        let b = apply_photometric(&step, &AugmentOp::GaussianBlur { sigma: 1.0 }).unwrap();
        assert_eq!(b.get(0, 0), [0, 0, 0]);
        assert_eq!(b.get(19, 0), [255, 255, 255]);
        let (l, r) = (b.get(9, 0)[0], b.get(10, 0)[0]);
        assert!(l > 0 && l < 128 && r > 128 && r < 255, "{l} {r}");
        assert_eq!(u16::from(l) + u16::from(r), 255);
    }

    #[test]
    fn geometric_ops_rejected() {
        let img = Rgb8Image::filled(2, 2, [0, 0, 0]);
        assert!(apply_photometric(&img, &AugmentOp::HFlip).is_err());
    }
}
