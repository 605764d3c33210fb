use czforge::augment::{apply_photometric, AugmentOp};
use czforge::imaging::{hsv_to_rgb, rgb_to_hsv, Rgb8Image};
use proptest::prelude::*;

#[test]
fn hsv_roundtrip_is_exact_over_all_colours() {
    let mut worst = 0i32;
    for r in 0..=255u8 {
        for g in 0..=255u8 {
            for b in 0..=255u8 {
                let back = hsv_to_rgb(rgb_to_hsv([r, g, b]));
                for (x, y) in back.iter().zip([r, g, b]) {
                    worst = worst.max((i32::from(*x) - i32::from(y)).abs());
                }
            }
        }
    }
    assert_eq!(worst, 0);
}

#[test]
fn hsv_agrees_with_python_colorsys() {
    // colorsys.rgb_to_hsv on c/255, hue scaled to degrees.
    let cases = [
        ([255, 110, 0], 25.882352941176475, 1.0, 1.0),
        ([215, 25, 25], 0.0, 0.8837209302325582, 0.8431372549019608),
        ([12, 200, 90], 144.8936170212766, 0.9400000000000001, 0.7843137254901961),
        ([255, 200, 0], 47.05882352941177, 1.0, 1.0),
        ([1, 2, 3], 210.0, 0.6666666666666666, 0.011764705882352941),
        ([200, 100, 150], 330.0, 0.5, 0.7843137254901961),
    ];
    for (rgb, h, s, v) in cases {
        let p = rgb_to_hsv(rgb);
        assert!((p.h - h).abs() < 1e-9 && (p.s - s).abs() < 1e-12 && (p.v - v).abs() < 1e-12, "{rgb:?}: {p:?}");
    }
}

fn grey(v: u8, w: u32, h: u32) -> Rgb8Image {
    Rgb8Image::filled(w, h, [v, v, v])
}

#[test]
fn noise_spread_matches_sigma() {
    let img = grey(128, 256, 256);
    let out = apply_photometric(&img, &AugmentOp::GaussianNoise { sigma: 15.0, seed: 99 }).unwrap();
    let n = out.as_bytes().len() as f64;
    let mad: f64 = out.as_bytes().iter().map(|&b| (f64::from(b) - 128.0).abs()).sum::<f64>() / n;
    let expected = 15.0 * (2.0 / std::f64::consts::PI).sqrt();
    assert!((mad - expected).abs() / expected < 0.05, "mean absolute deviation {mad}, expected {expected}");
    let mean: f64 = out.as_bytes().iter().map(|&b| f64::from(b)).sum::<f64>() / n;
    assert!((mean - 128.0).abs() < 0.2, "mean {mean}");
}

#[test]
fn noise_saturates_instead_of_wrapping() {
    let sigma = 20.0;
    let white = apply_photometric(&grey(255, 128, 128), &AugmentOp::GaussianNoise { sigma, seed: 1 }).unwrap();
    let black = apply_photometric(&grey(0, 128, 128), &AugmentOp::GaussianNoise { sigma, seed: 2 }).unwrap();
    // A wrapped sample would land at the far end of the range.
    assert!(*white.as_bytes().iter().min().unwrap() > 255 - 6 * sigma as u8);
    assert!(*black.as_bytes().iter().max().unwrap() < 6 * sigma as u8);
    // Roughly half of the samples pile up at the bound.
    let at_top = white.as_bytes().iter().filter(|&&b| b == 255).count() as f64 / white.as_bytes().len() as f64;
    assert!((at_top - 0.51).abs() < 0.02, "{at_top}");
}

fn any_image() -> impl Strategy<Value = Rgb8Image> {
    (1u32..12, 1u32..12).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), (w * h * 3) as usize).prop_map(move |d| Rgb8Image::from_raw(w, h, d).unwrap())
    })
}

fn clamp_round(x: f64) -> u8 {
    if x <= 0.0 {
        0
    } else if x >= 255.0 {
        255
    } else {
        x.round() as u8
    }
}

proptest! {
    #[test]
    fn brightness_is_scaled_and_clamped(img in any_image(), gain in 0.0f64..4.0) {
        let out = apply_photometric(&img, &AugmentOp::Brightness { gain }).unwrap();
        for (o, i) in out.as_bytes().iter().zip(img.as_bytes()) {
            prop_assert_eq!(*o, clamp_round(f64::from(*i) * gain));
        }
    }

    #[test]
    fn contrast_pivots_on_mid_grey(img in any_image(), factor in 0.0f64..4.0) {
        let out = apply_photometric(&img, &AugmentOp::Contrast { factor }).unwrap();
        for (o, i) in out.as_bytes().iter().zip(img.as_bytes()) {
            prop_assert_eq!(*o, clamp_round((f64::from(*i) - 128.0) * factor + 128.0));
        }
    }

    #[test]
    fn desaturation_gives_grey(img in any_image()) {
        let out = apply_photometric(&img, &AugmentOp::Saturation { factor: 0.0 }).unwrap();
        for (p, q) in out.as_bytes().chunks(3).zip(img.as_bytes().chunks(3)) {
            prop_assert!(p[0] == p[1] && p[1] == p[2]);
            prop_assert_eq!(p[0], *q.iter().max().unwrap());
        }
    }

    #[test]
    fn full_turn_hue_shift_is_identity(img in any_image()) {
        let out = apply_photometric(&img, &AugmentOp::HueShift { degrees: 360.0 }).unwrap();
        prop_assert_eq!(out, img);
    }

    #[test]
    fn blur_stays_within_input_range(img in any_image(), sigma in 0.1f64..4.0) {
        let out = apply_photometric(&img, &AugmentOp::GaussianBlur { sigma }).unwrap();
        for ch in 0..3 {
            let chan = |im: &Rgb8Image| im.as_bytes().iter().skip(ch).step_by(3).copied().collect::<Vec<u8>>();
            let (i, o) = (chan(&img), chan(&out));
            prop_assert!(o.iter().min() >= i.iter().min() && o.iter().max() <= i.iter().max());
        }
    }
}
